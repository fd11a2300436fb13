#include "miraisim/harden.hpp"

#include <algorithm>
#include <iomanip>
#include <random>
#include <sstream>

#include "miraisim/hash.hpp"
#include "json.hpp"

namespace miraisim::harden {

using device::DeviceProfile;
using device::DeviceState;
using device::ServiceConfig;
using device::ServiceKind;

const char* to_string(Action a) {
    switch (a) {
        case Action::ChangeTelnetCredentials: return "ChangeTelnetCredentials";
        case Action::RandomizeTelnetPort: return "RandomizeTelnetPort";
        case Action::DisableTelnetPreferSsh: return "DisableTelnetPreferSsh";
        case Action::ChangeWebCredentials: return "ChangeWebCredentials";
        case Action::DisableSmtp: return "DisableSmtp";
        case Action::ReplaceHttpWithHttps: return "ReplaceHttpWithHttps";
        case Action::RestrictBusyboxToRoot: return "RestrictBusyboxToRoot";
        case Action::BlockOutboundIp: return "BlockOutboundIp";
        case Action::BlockPort: return "BlockPort";
        case Action::DisableFtp: return "DisableFtp";
        case Action::DisableTftp: return "DisableTftp";
        case Action::InstallProcessKiller: return "InstallProcessKiller";
        case Action::InstallBusyboxWrapper: return "InstallBusyboxWrapper";
    }
    return "?";
}

std::optional<Action> action_from_string(const std::string& name) {
    for (Action a : kAllActions) {
        if (name == to_string(a)) return a;
    }
    return std::nullopt;
}

const PlanEntry* HardeningPlan::entry(Action a) const {
    for (const auto& e : entries) {
        if (e.action == a) return &e;
    }
    return nullptr;
}

std::vector<Action> HardeningPlan::applicable() const {
    std::vector<Action> out;
    for (const auto& e : entries) {
        if (e.apply) out.push_back(e.action);
    }
    return out;
}

namespace {

std::mt19937_64 action_rng(const std::string& device_name, Action action, std::uint64_t seed) {
    return std::mt19937_64(seed ^ fnv1a(device_name) ^ fnv1a(to_string(action)));
}

PlanEntry applies(Action a) {
    PlanEntry e;
    e.action = a;
    e.apply = true;
    return e;
}

PlanEntry not_applicable(Action a, std::string reason, bool warning = false) {
    PlanEntry e;
    e.action = a;
    e.apply = false;
    e.reason = std::move(reason);
    e.warning = warning;
    return e;
}

}  // namespace

CredentialEntry generate_strong_credentials(const std::string& device_name, Action action,
                                            std::uint64_t seed, const CredentialList* avoid) {
    static const char charset[] =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    constexpr std::size_t charset_size = sizeof(charset) - 1;
    auto rng = action_rng(device_name, action, seed);
    auto draw16 = [&] {
        std::string s;
        s.reserve(16);
        for (int i = 0; i < 16; ++i) {
            s.push_back(charset[rng() % charset_size]);
        }
        return s;
    };
    CredentialEntry entry;
    entry.username = "admin_" + draw16().substr(0, 10);
    do {
        entry.password = draw16();
    } while (avoid && credential_in_list(*avoid, entry));
    return entry;
}

std::uint16_t randomized_telnet_port(const std::string& device_name, std::uint64_t seed,
                                     const std::set<std::uint16_t>& taken) {
    auto rng = action_rng(device_name, Action::RandomizeTelnetPort, seed);
    for (;;) {
        auto port = static_cast<std::uint16_t>(1025 + rng() % (65535 - 1025 + 1));
        if (taken.count(port) == 0) {
            return port;
        }
    }
}

HardeningPlan plan(const DeviceProfile& profile, const Options& opts) {
    HardeningPlan out;
    out.device_name = profile.name;

    const bool has_telnet = profile.has_service(ServiceKind::Telnet);
    const bool has_ssh = profile.has_service(ServiceKind::Ssh);
    const bool has_http = profile.has_service(ServiceKind::Http);
    const bool has_https = profile.has_service(ServiceKind::Https);
    const bool has_shell = profile.grants_any_shell();
    // Telnet stays on BusyBox firmware: SSH needs a system recompile there.
    const bool disable_telnet = has_telnet && !profile.busybox;

    for (Action a : kAllActions) {
        switch (a) {
            case Action::ChangeTelnetCredentials:
                if (!has_telnet) {
                    out.entries.push_back(not_applicable(a, "telnet not enabled"));
                } else if (disable_telnet) {
                    out.entries.push_back(
                        not_applicable(a, "telnet disabled; ssh made primary protocol"));
                } else {
                    out.entries.push_back(applies(a));
                }
                break;
            case Action::RandomizeTelnetPort:
                if (!has_telnet) {
                    out.entries.push_back(not_applicable(a, "telnet not enabled"));
                } else if (disable_telnet) {
                    // disabling telnet supersedes moving its port
                    out.entries.push_back(
                        not_applicable(a, "telnet disabled before port change"));
                } else {
                    out.entries.push_back(applies(a));
                }
                break;
            case Action::DisableTelnetPreferSsh:
                if (!has_telnet && !has_ssh) {
                    out.entries.push_back(not_applicable(a, "no remote shell protocol"));
                } else if (has_telnet && profile.busybox) {
                    out.entries.push_back(not_applicable(
                        a, "busybox firmware cannot support ssh without recompiling", true));
                } else {
                    out.entries.push_back(applies(a));
                }
                break;
            case Action::ChangeWebCredentials:
                if (has_http || has_https) {
                    out.entries.push_back(applies(a));
                } else {
                    out.entries.push_back(not_applicable(a, "no web service enabled"));
                }
                break;
            case Action::DisableSmtp:
                if (profile.has_service(ServiceKind::Smtp)) {
                    out.entries.push_back(applies(a));
                } else {
                    out.entries.push_back(not_applicable(a, "smtp not enabled"));
                }
                break;
            case Action::ReplaceHttpWithHttps:
                if (!has_http && !has_https) {
                    out.entries.push_back(not_applicable(a, "http not enabled"));
                } else if (profile.busybox) {
                    out.entries.push_back(
                        not_applicable(a, "firmware cannot serve https"));
                } else {
                    out.entries.push_back(applies(a));
                }
                break;
            case Action::RestrictBusyboxToRoot:
                if (has_shell) {
                    out.entries.push_back(applies(a));
                } else {
                    out.entries.push_back(not_applicable(a, "no shell access to restrict"));
                }
                break;
            case Action::BlockOutboundIp: {
                PlanEntry e = applies(a);
                e.ip_param = opts.blocked_ip;
                out.entries.push_back(e);
                break;
            }
            case Action::BlockPort: {
                PlanEntry e = applies(a);
                e.port_param = opts.blocked_port;
                out.entries.push_back(e);
                break;
            }
            case Action::DisableFtp:
                if (profile.has_service(ServiceKind::Ftp)) {
                    out.entries.push_back(applies(a));
                } else {
                    out.entries.push_back(not_applicable(a, "ftp not enabled"));
                }
                break;
            case Action::DisableTftp:
                if (profile.has_service(ServiceKind::Tftp) || profile.has_tftp_client) {
                    out.entries.push_back(applies(a));
                } else {
                    out.entries.push_back(not_applicable(a, "tftp not present"));
                }
                break;
            case Action::InstallProcessKiller:
                if (has_shell || profile.busybox) {
                    out.entries.push_back(applies(a));
                } else {
                    out.entries.push_back(
                        not_applicable(a, "device cannot run local code"));
                }
                break;
            case Action::InstallBusyboxWrapper:
                if (profile.busybox) {
                    out.entries.push_back(applies(a));
                } else {
                    out.entries.push_back(not_applicable(a, "not a busybox environment"));
                }
                break;
        }
    }
    return out;
}

namespace {

Status<ApplyError> set_service_credentials(ServiceConfig& svc, const std::string& device_name,
                                           Action action, std::uint64_t seed,
                                           const Options& opts) {
    svc.auth = CredentialList{
        generate_strong_credentials(device_name, action, seed, opts.avoid_list)};
    return {};
}

void remove_services(DeviceProfile& profile, ServiceKind kind) {
    std::erase_if(profile.services, [&](const ServiceConfig& s) { return s.kind == kind; });
}

}  // namespace

Status<ApplyError> apply(DeviceState& dev, Action action, std::uint64_t seed,
                         const Options& opts) {
    DeviceProfile& profile = dev.profile();
    const std::string& name = profile.name;

    switch (action) {
        case Action::ChangeTelnetCredentials: {
            ServiceConfig* telnet = profile.first_service(ServiceKind::Telnet);
            if (!telnet) {
                return ApplyError{ApplyErrorKind::NotApplicable, "no telnet service"};
            }
            return set_service_credentials(*telnet, name, action, seed, opts);
        }
        case Action::RandomizeTelnetPort: {
            ServiceConfig* telnet = profile.first_service(ServiceKind::Telnet);
            if (!telnet) {
                return ApplyError{ApplyErrorKind::NotApplicable, "no telnet service"};
            }
            auto taken = profile.ports();
            taken.erase(telnet->port);  // its own slot does not collide
            telnet->port = randomized_telnet_port(name, seed, taken);
            return {};
        }
        case Action::DisableTelnetPreferSsh: {
            const ServiceConfig* telnet = profile.first_service(ServiceKind::Telnet);
            const bool had_ssh = profile.has_service(ServiceKind::Ssh);
            if (!telnet && !had_ssh) {
                return ApplyError{ApplyErrorKind::NotApplicable, "no remote shell protocol"};
            }
            const bool shell = telnet ? telnet->grants_shell
                                      : profile.first_service(ServiceKind::Ssh)->grants_shell;
            remove_services(profile, ServiceKind::Telnet);
            if (!profile.has_service(ServiceKind::Ssh)) {
                ServiceConfig created;
                created.kind = ServiceKind::Ssh;
                created.port = 22;
                created.grants_shell = shell;
                created.encrypted = true;
                profile.services.push_back(created);
            }
            return set_service_credentials(*profile.first_service(ServiceKind::Ssh), name,
                                           action, seed, opts);
        }
        case Action::ChangeWebCredentials: {
            ServiceConfig* web = profile.first_service(ServiceKind::Http);
            if (!web) web = profile.first_service(ServiceKind::Https);
            if (!web) {
                return ApplyError{ApplyErrorKind::NotApplicable, "no web service"};
            }
            return set_service_credentials(*web, name, action, seed, opts);
        }
        case Action::DisableSmtp:
            remove_services(profile, ServiceKind::Smtp);
            return {};
        case Action::ReplaceHttpWithHttps: {
            ServiceConfig* http = profile.first_service(ServiceKind::Http);
            if (!http) {
                // Already swapped, or never had a web server at all.
                if (profile.has_service(ServiceKind::Https)) return {};
                return ApplyError{ApplyErrorKind::NotApplicable, "no http service"};
            }
            ServiceConfig https = *http;
            https.kind = ServiceKind::Https;
            https.port = 443;
            https.encrypted = true;
            remove_services(profile, ServiceKind::Http);
            if (!profile.has_service(ServiceKind::Https)) {
                profile.services.push_back(https);
            }
            return {};
        }
        case Action::RestrictBusyboxToRoot:
            if (!profile.grants_any_shell()) {
                return ApplyError{ApplyErrorKind::NotApplicable, "no shell access"};
            }
            profile.shell_exec_users = {"root"};
            return {};
        case Action::BlockOutboundIp:
            if (!dev.firewall().blocks_outbound(opts.blocked_ip)) {
                dev.firewall().block_outbound_address(opts.blocked_ip);
            }
            return {};
        case Action::BlockPort:
            if (!dev.firewall().blocks_inbound_port(opts.blocked_port)) {
                dev.firewall().block_inbound_port(opts.blocked_port);
            }
            return {};
        case Action::DisableFtp:
            remove_services(profile, ServiceKind::Ftp);
            return {};
        case Action::DisableTftp:
            remove_services(profile, ServiceKind::Tftp);
            profile.has_tftp_client = false;
            return {};
        case Action::InstallProcessKiller: {
            if (!profile.grants_any_shell() && !profile.busybox) {
                return ApplyError{ApplyErrorKind::NotApplicable, "device cannot run local code"};
            }
            const bool was_armed = dev.process_killer_armed();
            dev.arm_process_killer();
            if (!was_armed && dev.network()) {
                DeviceState* target = &dev;
                dev.network()->events().schedule_every(
                    opts.killer_interval_ms, "process-killer " + name,
                    [target] { (void)process_killer_scan(*target); });
            }
            return {};
        }
        case Action::InstallBusyboxWrapper:
            if (!profile.busybox) {
                return ApplyError{ApplyErrorKind::NotApplicable, "not a busybox environment"};
            }
            dev.arm_busybox_wrapper();
            return {};
    }
    return ApplyError{ApplyErrorKind::NotApplicable, "unknown action"};
}

std::vector<Action> apply_plan(DeviceState& dev, const HardeningPlan& plan, std::uint64_t seed,
                               const Options& opts) {
    std::vector<Action> done;
    for (const PlanEntry& entry : plan.entries) {
        if (!entry.apply) {
            continue;
        }
        Options entry_opts = opts;
        if (entry.ip_param) entry_opts.blocked_ip = *entry.ip_param;
        if (entry.port_param) entry_opts.blocked_port = *entry.port_param;
        if (apply(dev, entry.action, seed, entry_opts).ok()) {
            done.push_back(entry.action);
        }
    }
    return done;
}

Result<std::vector<device::ProcessEntry>, ApplyError> process_killer_scan(DeviceState& dev) {
    if (!dev.process_killer_armed()) {
        return ApplyError{ApplyErrorKind::KillerNotArmed, "process killer not armed"};
    }
    static const char* kPrefixes[] = {"/root/", "/tmp/", "/var/tmp/"};
    std::vector<device::ProcessEntry> killed;
    // First pass gathers candidates by path prefix, the narrowing filter
    // keeps only the malware's own processes.
    std::vector<device::ProcessEntry> candidates;
    for (const auto& p : dev.processes()) {
        const bool under_prefix =
            std::any_of(std::begin(kPrefixes), std::end(kPrefixes),
                        [&](const char* prefix) { return p.exec_path.rfind(prefix, 0) == 0; });
        if (under_prefix) candidates.push_back(p);
    }
    for (const auto& p : candidates) {
        if (p.origin != device::ProcessOrigin::MiraiBot) {
            continue;
        }
        if (dev.kill_pid(p.pid)) {
            killed.push_back(p);
        }
    }
    return killed;
}

Result<device::CommandOutput, device::ShellError> busybox_wrapper_exec(
    DeviceState& dev, const device::Session& session, const std::string& command) {
    if (!dev.busybox_wrapper_armed()) {
        return device::ShellError{device::ShellErrorKind::CommandFailed,
                                  "busybox wrapper not armed"};
    }
    return dev.shell_exec(session, command);
}

std::string plan_to_json_text(const HardeningPlan& plan) {
    nlohmann::ordered_json doc;
    doc["device"] = plan.device_name;
    doc["entries"] = nlohmann::ordered_json::array();
    for (const PlanEntry& e : plan.entries) {
        nlohmann::ordered_json entry;
        entry["action"] = to_string(e.action);
        entry["applicability"] = e.apply ? "Apply" : "NotApplicable";
        if (!e.apply) {
            entry["reason"] = e.reason;
        }
        if (e.warning) {
            entry["warning"] = true;
        }
        nlohmann::ordered_json params = nlohmann::ordered_json::object();
        if (e.ip_param) params["ip"] = e.ip_param->str();
        if (e.port_param) params["port"] = *e.port_param;
        entry["parameters"] = params;
        doc["entries"].push_back(entry);
    }
    return doc.dump(2) + "\n";
}

std::string plan_to_table(const HardeningPlan& plan) {
    std::ostringstream out;
    out << "hardening plan for " << plan.device_name << "\n";
    for (const PlanEntry& e : plan.entries) {
        out << "  " << std::left << std::setw(26) << to_string(e.action)
            << (e.apply ? "apply" : "n/a");
        if (e.ip_param) out << " ip=" << e.ip_param->str();
        if (e.port_param) out << " port=" << *e.port_param;
        if (!e.apply && !e.reason.empty()) out << "  (" << e.reason << ")";
        if (e.warning) out << "  [warning]";
        out << "\n";
    }
    return out.str();
}

}  // namespace miraisim::harden

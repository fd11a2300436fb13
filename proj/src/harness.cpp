#include "miraisim/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "miraisim/hash.hpp"
#include "json.hpp"

namespace miraisim::harness {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.devices = {{"coolead", std::nullopt},
                   {"raspberry_pi", std::nullopt},
                   {"sricam", std::nullopt},
                   {"simulated", std::nullopt}};
    cfg.scan.ranges = {{netsim::SimAddress::parse("10.77.0.0").value(),
                        netsim::SimAddress::parse("10.77.0.255").value()}};
    cfg.scan.exclusions = {{netsim::SimAddress::parse("10.77.0.0").value(),
                            netsim::SimAddress::parse("10.77.0.9").value()}};
    cfg.scan.target_ports = {23};
    return cfg;
}

namespace {

Status<ConfigError> check_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                               const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (allowed.count(it.key()) == 0) {
            return ConfigError{where, "unknown field '" + it.key() + "'"};
        }
    }
    return {};
}

Result<netsim::SimAddress, ConfigError> parse_address_field(const ordered_json& v,
                                                            const std::string& field) {
    if (!v.is_string()) {
        return ConfigError{field, "expected dotted-quad string"};
    }
    auto addr = netsim::SimAddress::parse(v.get<std::string>());
    if (!addr) {
        return ConfigError{field, "invalid address '" + v.get<std::string>() + "'"};
    }
    return *addr;
}

Result<std::vector<netsim::AddressRange>, ConfigError> parse_ranges(const ordered_json& arr,
                                                                    const std::string& field) {
    if (!arr.is_array()) {
        return ConfigError{field, "expected array of {start, end}"};
    }
    std::vector<netsim::AddressRange> out;
    for (const auto& item : arr) {
        if (!item.is_object()) {
            return ConfigError{field, "expected object entries"};
        }
        if (auto bad = check_keys(item, {"start", "end"}, field); !bad.ok()) {
            return bad.error();
        }
        if (!item.contains("start") || !item.contains("end")) {
            return ConfigError{field, "entries need start and end"};
        }
        auto start = parse_address_field(item["start"], field + ".start");
        if (!start.ok()) return start.error();
        auto end = parse_address_field(item["end"], field + ".end");
        if (!end.ok()) return end.error();
        if (end.value() < start.value()) {
            return ConfigError{field, "range end precedes start"};
        }
        out.push_back({start.value(), end.value()});
    }
    return out;
}

std::string resolve_path(const std::string& path, const std::string& base_dir) {
    fs::path p(path);
    if (p.is_absolute() || base_dir.empty()) {
        return path;
    }
    return (fs::path(base_dir) / p).string();
}

bool is_builtin_name(const std::string& name) {
    auto names = device::builtin_profile_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

Result<ExperimentConfig, ConfigError> config_from_json_text(const std::string& text,
                                                            const std::string& base_dir) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        return ConfigError{"", std::string("invalid JSON: ") + e.what()};
    }
    if (!doc.is_object()) {
        return ConfigError{"", "config document must be a JSON object"};
    }
    if (auto bad = check_keys(doc,
                              {"seed", "exposure_window_ms", "credential_list", "p_game",
                               "latency", "scan", "devices", "cnc_address", "loader_address"},
                              "config");
        !bad.ok()) {
        return bad.error();
    }

    ExperimentConfig cfg = default_config();
    cfg.devices.clear();

    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) {
            return ConfigError{"seed", "expected unsigned integer"};
        }
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("exposure_window_ms")) {
        if (!doc["exposure_window_ms"].is_number_integer()) {
            return ConfigError{"exposure_window_ms", "expected integer"};
        }
        cfg.exposure_window_ms = doc["exposure_window_ms"].get<std::int64_t>();
    }
    if (doc.contains("p_game")) {
        if (!doc["p_game"].is_number()) {
            return ConfigError{"p_game", "expected number"};
        }
        cfg.p_game = doc["p_game"].get<double>();
    }
    if (doc.contains("latency")) {
        const auto& lat = doc["latency"];
        if (!lat.is_object()) {
            return ConfigError{"latency", "expected object"};
        }
        if (auto bad = check_keys(
                lat, {"connect_ms", "rtt_ms", "login_attempt_ms", "payload_install_ms"},
                "latency");
            !bad.ok()) {
            return bad.error();
        }
        auto read = [&](const char* key, std::int64_t& out) -> Status<ConfigError> {
            if (!lat.contains(key)) return {};
            if (!lat[key].is_number_integer()) {
                return ConfigError{std::string("latency.") + key, "expected integer"};
            }
            out = lat[key].get<std::int64_t>();
            return {};
        };
        if (auto bad = read("connect_ms", cfg.latency.connect_ms); !bad.ok()) return bad.error();
        if (auto bad = read("rtt_ms", cfg.latency.rtt_ms); !bad.ok()) return bad.error();
        if (auto bad = read("login_attempt_ms", cfg.latency.login_attempt_ms); !bad.ok())
            return bad.error();
        if (auto bad = read("payload_install_ms", cfg.latency.payload_install_ms); !bad.ok())
            return bad.error();
    }
    if (doc.contains("scan")) {
        const auto& scan = doc["scan"];
        if (!scan.is_object()) {
            return ConfigError{"scan", "expected object"};
        }
        if (auto bad = check_keys(scan, {"ranges", "exclusions", "target_ports"}, "scan");
            !bad.ok()) {
            return bad.error();
        }
        if (scan.contains("ranges")) {
            auto ranges = parse_ranges(scan["ranges"], "scan.ranges");
            if (!ranges.ok()) return ranges.error();
            cfg.scan.ranges = ranges.value();
        }
        if (scan.contains("exclusions")) {
            auto excl = parse_ranges(scan["exclusions"], "scan.exclusions");
            if (!excl.ok()) return excl.error();
            cfg.scan.exclusions = excl.value();
        }
        if (scan.contains("target_ports")) {
            if (!scan["target_ports"].is_array()) {
                return ConfigError{"scan.target_ports", "expected array of ports"};
            }
            cfg.scan.target_ports.clear();
            for (const auto& p : scan["target_ports"]) {
                if (!p.is_number_unsigned() || p.get<std::uint64_t>() > 65535 ||
                    p.get<std::uint64_t>() == 0) {
                    return ConfigError{"scan.target_ports", "ports must be in [1, 65535]"};
                }
                cfg.scan.target_ports.push_back(static_cast<std::uint16_t>(p.get<std::uint64_t>()));
            }
        }
    }
    if (doc.contains("cnc_address")) {
        auto addr = parse_address_field(doc["cnc_address"], "cnc_address");
        if (!addr.ok()) return addr.error();
        cfg.cnc_address = addr.value();
    }
    if (doc.contains("loader_address")) {
        auto addr = parse_address_field(doc["loader_address"], "loader_address");
        if (!addr.ok()) return addr.error();
        cfg.loader_address = addr.value();
    }
    if (!doc.contains("devices")) {
        return ConfigError{"devices", "required field missing"};
    }
    if (!doc["devices"].is_array() || doc["devices"].empty()) {
        return ConfigError{"devices", "expected non-empty array"};
    }
    for (const auto& item : doc["devices"]) {
        if (!item.is_object()) {
            return ConfigError{"devices", "expected object entries"};
        }
        if (auto bad = check_keys(item, {"profile", "address"}, "devices"); !bad.ok()) {
            return bad.error();
        }
        if (!item.contains("profile") || !item["profile"].is_string()) {
            return ConfigError{"devices.profile", "required string field"};
        }
        DeviceSpec spec;
        spec.profile = item["profile"].get<std::string>();
        if (!is_builtin_name(spec.profile)) {
            spec.profile = resolve_path(spec.profile, base_dir);
        }
        if (item.contains("address")) {
            auto addr = parse_address_field(item["address"], "devices.address");
            if (!addr.ok()) return addr.error();
            spec.address = addr.value();
        }
        cfg.devices.push_back(std::move(spec));
    }
    if (!doc.contains("credential_list")) {
        return ConfigError{"credential_list", "required field missing"};
    }
    if (!doc["credential_list"].is_string()) {
        return ConfigError{"credential_list", "expected file path string"};
    }
    cfg.credential_list_path = resolve_path(doc["credential_list"].get<std::string>(), base_dir);
    auto creds = load_credential_list(cfg.credential_list_path);
    if (!creds.ok()) {
        return ConfigError{"credential_list",
                           creds.error().message +
                               (creds.error().line > 0
                                    ? " (line " + std::to_string(creds.error().line) + ")"
                                    : "")};
    }
    cfg.credentials = creds.value();

    if (auto bad = validate_config(cfg); !bad.ok()) {
        return bad.error();
    }
    return cfg;
}

Result<ExperimentConfig, ConfigError> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        return ConfigError{"", "cannot open config file: " + path};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json_text(buf.str(), fs::path(path).parent_path().string());
}

namespace {

Result<std::vector<netsim::SimAddress>, ConfigError> resolve_device_addresses(
    const ExperimentConfig& config) {
    std::vector<netsim::SimAddress> out;
    if (config.scan.ranges.empty()) {
        return ConfigError{"scan.ranges", "must be non-empty"};
    }
    const std::uint32_t base = config.scan.ranges.front().first.value() + 10;
    std::set<netsim::SimAddress> seen{config.cnc_address, config.loader_address};
    for (std::size_t i = 0; i < config.devices.size(); ++i) {
        netsim::SimAddress addr = config.devices[i].address.value_or(
            netsim::SimAddress(base + static_cast<std::uint32_t>(i)));
        if (!seen.insert(addr).second) {
            return ConfigError{"devices.address",
                               addr.str() + " collides with another node"};
        }
        out.push_back(addr);
    }
    return out;
}

}  // namespace

Status<ConfigError> validate_config(const ExperimentConfig& config) {
    if (config.devices.empty()) {
        return ConfigError{"devices", "must be non-empty"};
    }
    if (config.exposure_window_ms <= 0) {
        return ConfigError{"exposure_window_ms", "must be > 0"};
    }
    if (!config.latency.valid()) {
        return ConfigError{"latency", "all latencies must be >= 0"};
    }
    if (config.scan.ranges.empty()) {
        return ConfigError{"scan.ranges", "must be non-empty"};
    }
    if (config.scan.target_ports.empty()) {
        return ConfigError{"scan.target_ports", "must be non-empty"};
    }
    if (config.p_game < 0.0 || config.p_game > 1.0) {
        return ConfigError{"p_game", "must be within [0, 1]"};
    }
    auto addrs = resolve_device_addresses(config);
    if (!addrs.ok()) {
        return addrs.error();
    }
    return {};
}

std::string attack_config_digest(const ExperimentConfig& config) {
    std::ostringstream canon;
    canon << "ranges:";
    for (const auto& r : config.scan.ranges) {
        canon << r.first.str() << "-" << r.last.str() << ",";
    }
    canon << ";excl:";
    for (const auto& r : config.scan.exclusions) {
        canon << r.first.str() << "-" << r.last.str() << ",";
    }
    canon << ";ports:";
    for (auto p : config.scan.target_ports) canon << p << ",";
    canon << ";creds:";
    for (const auto& c : config.credentials) canon << c.username << " " << c.password << ";";
    canon << ";latency:" << config.latency.connect_ms << "," << config.latency.rtt_ms << ","
          << config.latency.login_attempt_ms << "," << config.latency.payload_install_ms;
    canon << ";window:" << config.exposure_window_ms;
    canon << ";p_game:" << config.p_game;
    return to_hex(fnv1a(canon.str()));
}

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config)) {}

Experiment::~Experiment() = default;

Status<ConfigError> Experiment::setup() {
    if (auto bad = validate_config(config_); !bad.ok()) {
        return bad.error();
    }
    auto addrs = resolve_device_addresses(config_);
    if (!addrs.ok()) {
        return addrs.error();
    }
    device_addrs_ = addrs.value();

    net_ = std::make_unique<netsim::Network>(config_.latency);
    (void)net_->register_node(config_.cnc_address, cnc_);
    (void)net_->register_node(config_.loader_address, loader_);

    for (std::size_t i = 0; i < config_.devices.size(); ++i) {
        const DeviceSpec& spec = config_.devices[i];
        device::DeviceProfile profile;
        if (is_builtin_name(spec.profile)) {
            profile = device::builtin_profile(spec.profile).value();
        } else {
            auto loaded = device::load_profile_file(spec.profile);
            if (!loaded.ok()) {
                return ConfigError{"devices.profile", loaded.error().message};
            }
            profile = loaded.value();
        }
        original_profiles_.push_back(profile);
        auto state = std::make_unique<device::DeviceState>(std::move(profile));
        device_map_[device_addrs_[i]] = state.get();
        device_states_.push_back(std::move(state));
    }

    mirai::Attacker::Config acfg;
    acfg.scanner_addr = config_.loader_address;
    acfg.cnc_addr = config_.cnc_address;
    acfg.credentials = config_.credentials;
    acfg.attempt_cap = 0;
    acfg.p_game = config_.p_game;
    acfg.seed = config_.seed;
    attacker_ = std::make_unique<mirai::Attacker>(*net_, cnc_, device_map_, acfg);
    return {};
}

Experiment::Exposure Experiment::expose_device(std::size_t index, mirai::Attacker& attacker) {
    device::DeviceState& dev = *device_states_[index];
    (void)dev.attach(*net_, device_addrs_[index]);

    auto& clock = net_->clock();
    const std::int64_t start = clock.now();
    const std::int64_t deadline = start + config_.exposure_window_ms;
    const auto& lat = net_->latency();
    // Post-login overhead: the payload fetch connect, the install, and the
    // C&C report connect. Attempts that cannot finish the whole chain
    // inside the window are not fired.
    const std::int64_t post_login = 2 * lat.connect_ms + lat.payload_install_ms;

    Exposure out;
    const auto candidates = attacker.syn_scan(config_.scan);
    for (const auto& cand : candidates) {
        if (cand.addr != device_addrs_[index]) {
            continue;  // devices are exposed and attacked one at a time
        }
        if (dev.infected() || clock.now() >= deadline) {
            break;
        }
        auto record = attacker.attack(cand, config_.loader_address, deadline - post_login);
        out.attempts = record.attempts_used;
        if (record.install_method) {
            out.method = record.install_method;
        }
    }
    net_->events().run_due();
    out.compromised = dev.infected();
    out.time_ms = clock.now() - start;
    return out;
}

void Experiment::run_stage2() {
    if (stage2_done_) return;
    stage2_digest_ = attack_config_digest(config_);
    stage2_outcomes_.clear();
    stage2_bot_counts_.clear();
    for (std::size_t i = 0; i < device_states_.size(); ++i) {
        Exposure e = expose_device(i, *attacker_);
        StageTwoOutcome outcome;
        outcome.compromised = e.compromised;
        if (e.compromised) {
            outcome.time_to_compromise_ms = e.time_ms;
            outcome.attempts_used = e.attempts;
            if (e.method) {
                outcome.install_method = mirai::to_string(*e.method);
            }
        }
        stage2_outcomes_.push_back(outcome);
        stage2_bot_counts_.push_back(cnc_.bot_count());
    }
    bot_count_stage2_ = cnc_.bot_count();
    stage2_done_ = true;
}

void Experiment::run_stage3() {
    harden::Options opts;
    opts.avoid_list = &config_.credentials;

    plans_.clear();
    stage3_actions_.clear();
    for (std::size_t i = 0; i < device_states_.size(); ++i) {
        // Plans derive from the post-exposure analysis of the factory
        // profile, so re-planning is stable no matter how often it runs.
        harden::HardeningPlan plan = harden::plan(original_profiles_[i], opts);
        auto applied = harden::apply_plan(*device_states_[i], plan, config_.seed, opts);
        std::vector<std::string> names;
        names.reserve(applied.size());
        for (auto a : applied) names.emplace_back(harden::to_string(a));
        plans_.push_back(std::move(plan));
        stage3_actions_.push_back(std::move(names));
        device_states_[i]->clear_infection();
        (void)net_->unregister_node(device_addrs_[i]);
    }
    cnc_.reset();
    stage3_done_ = true;
}

void Experiment::run_stage4() {
    if (stage4_done_ || !stage3_done_) return;
    stage4_digest_ = attack_config_digest(config_);

    mirai::Attacker::Config acfg = attacker_->config();
    mirai::Attacker rerun(*net_, cnc_, device_map_, acfg);
    stage4_compromised_.clear();
    for (std::size_t i = 0; i < device_states_.size(); ++i) {
        Exposure e = expose_device(i, rerun);
        stage4_compromised_.push_back(e.compromised);
    }
    bot_count_stage4_ = cnc_.bot_count();
    stage4_done_ = true;
}

ExperimentRun Experiment::finish() const {
    ExperimentRun run;
    ExperimentReport& report = run.report;
    report.seed = config_.seed;
    report.config_digest = attack_config_digest(config_);
    report.stage2_config_digest = stage2_digest_;
    report.stage4_config_digest = stage4_digest_;
    report.bot_count_stage2 = bot_count_stage2_;
    report.bot_count_stage4 = bot_count_stage4_;
    for (std::size_t i = 0; i < device_states_.size(); ++i) {
        DeviceReport dr;
        dr.name = original_profiles_[i].name;
        if (i < stage2_outcomes_.size()) dr.stage2 = stage2_outcomes_[i];
        if (i < stage3_actions_.size()) dr.stage3_actions = stage3_actions_[i];
        if (i < stage4_compromised_.size()) dr.stage4_compromised = stage4_compromised_[i];
        report.devices.push_back(std::move(dr));
    }
    report.hardening_gap = std::any_of(report.devices.begin(), report.devices.end(),
                                       [](const DeviceReport& d) { return d.stage4_compromised; });
    run.probe_log = net_ ? net_->probe_log_text() : "";
    run.event_trace = net_ ? net_->events().trace() : std::vector<std::string>{};
    return run;
}

Result<ExperimentRun, ConfigError> run_experiment(const ExperimentConfig& config) {
    Experiment experiment(config);
    if (auto bad = experiment.setup(); !bad.ok()) {
        return bad.error();
    }
    experiment.run_stage2();
    experiment.run_stage3();
    experiment.run_stage4();
    return experiment.finish();
}

std::string report_to_json_text(const ExperimentReport& report) {
    ordered_json doc;
    doc["schema"] = report.schema;
    doc["seed"] = report.seed;
    doc["config_digest"] = report.config_digest;
    doc["stage2_config_digest"] = report.stage2_config_digest;
    doc["stage4_config_digest"] = report.stage4_config_digest;
    doc["bot_count_stage2"] = report.bot_count_stage2;
    doc["bot_count_stage4"] = report.bot_count_stage4;
    doc["hardening_gap"] = report.hardening_gap;
    doc["devices"] = ordered_json::array();
    for (const DeviceReport& d : report.devices) {
        ordered_json dev;
        dev["name"] = d.name;
        ordered_json s2;
        s2["compromised"] = d.stage2.compromised;
        if (d.stage2.time_to_compromise_ms) {
            s2["time_to_compromise_ms"] = *d.stage2.time_to_compromise_ms;
        }
        if (d.stage2.attempts_used) {
            s2["attempts_used"] = *d.stage2.attempts_used;
        }
        if (d.stage2.install_method) {
            s2["install_method"] = *d.stage2.install_method;
        }
        dev["stage2"] = s2;
        dev["stage3_actions"] = d.stage3_actions;
        dev["stage4"] = ordered_json{{"compromised", d.stage4_compromised}};
        doc["devices"].push_back(dev);
    }
    return doc.dump(2) + "\n";
}

Result<ExperimentReport, std::string> report_from_json_text(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        return std::string("invalid JSON: ") + e.what();
    }
    if (!doc.is_object()) {
        return std::string("report must be a JSON object");
    }
    ExperimentReport report;
    try {
        report.schema = doc.at("schema").get<int>();
        report.seed = doc.at("seed").get<std::uint64_t>();
        report.config_digest = doc.at("config_digest").get<std::string>();
        report.stage2_config_digest = doc.at("stage2_config_digest").get<std::string>();
        report.stage4_config_digest = doc.at("stage4_config_digest").get<std::string>();
        report.bot_count_stage2 = doc.at("bot_count_stage2").get<int>();
        report.bot_count_stage4 = doc.at("bot_count_stage4").get<int>();
        report.hardening_gap = doc.at("hardening_gap").get<bool>();
        for (const auto& dev : doc.at("devices")) {
            DeviceReport d;
            d.name = dev.at("name").get<std::string>();
            const auto& s2 = dev.at("stage2");
            d.stage2.compromised = s2.at("compromised").get<bool>();
            if (s2.contains("time_to_compromise_ms")) {
                d.stage2.time_to_compromise_ms = s2["time_to_compromise_ms"].get<std::int64_t>();
            }
            if (s2.contains("attempts_used")) {
                d.stage2.attempts_used = s2["attempts_used"].get<int>();
            }
            if (s2.contains("install_method")) {
                d.stage2.install_method = s2["install_method"].get<std::string>();
            }
            for (const auto& a : dev.at("stage3_actions")) {
                d.stage3_actions.push_back(a.get<std::string>());
            }
            d.stage4_compromised = dev.at("stage4").at("compromised").get<bool>();
            report.devices.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        return std::string("malformed report: ") + e.what();
    }
    return report;
}

Result<std::string, UnknownFormat> report_render(const ExperimentReport& report,
                                                 const std::string& format) {
    if (format == "json") {
        return report_to_json_text(report);
    }
    if (format != "table") {
        return UnknownFormat{format};
    }
    std::ostringstream out;
    out << std::left << std::setw(14) << "device" << std::setw(17) << "stage2" << std::right
        << std::setw(9) << "time_ms" << std::setw(10) << "attempts" << "  " << std::left
        << std::setw(7) << "method" << std::right << std::setw(8) << "actions" << "  "
        << "stage4" << "\n";
    for (const DeviceReport& d : report.devices) {
        out << std::left << std::setw(14) << d.name << std::setw(17)
            << (d.stage2.compromised ? "compromised" : "not compromised") << std::right
            << std::setw(9)
            << (d.stage2.time_to_compromise_ms ? std::to_string(*d.stage2.time_to_compromise_ms)
                                               : "-")
            << std::setw(10)
            << (d.stage2.attempts_used ? std::to_string(*d.stage2.attempts_used) : "-") << "  "
            << std::left << std::setw(7)
            << (d.stage2.install_method ? *d.stage2.install_method : "-") << std::right
            << std::setw(8) << d.stage3_actions.size() << "  "
            << (d.stage4_compromised ? "compromised" : "not compromised") << "\n";
    }
    out << "bots: stage2=" << report.bot_count_stage2 << " stage4=" << report.bot_count_stage4
        << "\n";
    if (report.hardening_gap) {
        out << "warning: hardening gap detected in stage 4\n";
    }
    return out.str();
}

int cnc_shell(const ExperimentConfig& config, std::istream& in, std::ostream& out) {
    Experiment experiment(config);
    if (auto bad = experiment.setup(); !bad.ok()) {
        out << "config error: " << bad.error().str() << "\n";
        return 2;
    }
    out << "connected to cnc panel; commands: status | vectors | help | run-stage2 | harden | "
           "run-stage4 | report [json|table] | exit\n";
    std::string line;
    while (out << "cnc> " << std::flush, std::getline(in, line)) {
        std::istringstream words(line);
        std::string cmd;
        words >> cmd;
        if (cmd == "exit" || cmd == "quit") {
            break;
        }
        if (cmd == "run-stage2") {
            if (experiment.stage2_done()) {
                out << "stage 2 already run\n";
            } else {
                experiment.run_stage2();
                out << "stage 2 complete\n";
            }
            continue;
        }
        if (cmd == "harden") {
            experiment.run_stage3();
            for (const auto& plan : experiment.plans()) {
                out << harden::plan_to_table(plan);
            }
            out << "hardening applied\n";
            continue;
        }
        if (cmd == "run-stage4") {
            if (!experiment.stage3_done()) {
                out << "run 'harden' first\n";
            } else if (experiment.stage4_done()) {
                out << "stage 4 already run\n";
            } else {
                experiment.run_stage4();
                out << "stage 4 complete\n";
            }
            continue;
        }
        if (cmd == "report") {
            std::string format;
            words >> format;
            if (format.empty()) format = "table";
            if (!experiment.stage4_done()) {
                out << "complete the stages first (run-stage2, harden, run-stage4)\n";
                continue;
            }
            auto rendered = report_render(experiment.finish().report, format);
            if (rendered.ok()) {
                out << rendered.value();
            } else {
                out << "unknown format '" << rendered.error().format << "'\n";
            }
            continue;
        }
        out << experiment.cnc().panel(line);
    }
    return 0;
}

}  // namespace miraisim::harness

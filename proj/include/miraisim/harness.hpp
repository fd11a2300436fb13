// Orchestration of the four-stage methodology: stage 1 builds the network
// with the C&C/loader pair and the configured devices, stage 2 exposes the
// devices one by one to the attacker within a time window, stage 3 plans and
// applies every applicable countermeasure, stage 4 reruns stage 2 against
// the hardened devices with the identical attack configuration.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "miraisim/audit.hpp"
#include "miraisim/credentials.hpp"
#include "miraisim/device.hpp"
#include "miraisim/harden.hpp"
#include "miraisim/mirai.hpp"
#include "miraisim/netsim.hpp"

namespace miraisim::harness {

struct DeviceSpec {
    std::string profile;  // builtin name or profile file path
    std::optional<netsim::SimAddress> address;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::int64_t exposure_window_ms = 600'000;
    std::vector<DeviceSpec> devices;
    std::string credential_list_path;
    CredentialList credentials;  // loaded from the path, or provided directly
    mirai::ScanConfig scan;
    netsim::LatencyModel latency;
    double p_game = 0.0;
    netsim::SimAddress cnc_address = netsim::SimAddress::parse("10.77.0.2").value();
    netsim::SimAddress loader_address = netsim::SimAddress::parse("10.77.0.3").value();
};

struct ConfigError {
    std::string field;
    std::string message;

    std::string str() const { return field.empty() ? message : field + ": " + message; }
};

/// Lab defaults: one /24 scan range with the infrastructure addresses
/// excluded, Telnet-only target ports, the four built-in devices.
ExperimentConfig default_config();

/// Parses a config document. Relative credential list and profile paths are
/// resolved against `base_dir`. Unknown fields are rejected.
Result<ExperimentConfig, ConfigError> config_from_json_text(const std::string& text,
                                                            const std::string& base_dir);
Result<ExperimentConfig, ConfigError> load_config_file(const std::string& path);

Status<ConfigError> validate_config(const ExperimentConfig& config);

/// Digest over everything the attacker sees: scan ranges, exclusions,
/// target ports, dictionary contents, latency model, window and p_game.
std::string attack_config_digest(const ExperimentConfig& config);

struct StageTwoOutcome {
    bool compromised = false;
    std::optional<std::int64_t> time_to_compromise_ms;
    std::optional<int> attempts_used;
    std::optional<std::string> install_method;

    bool operator==(const StageTwoOutcome&) const = default;
};

struct DeviceReport {
    std::string name;
    StageTwoOutcome stage2;
    std::vector<std::string> stage3_actions;
    bool stage4_compromised = false;

    bool operator==(const DeviceReport&) const = default;
};

struct ExperimentReport {
    int schema = 1;
    std::uint64_t seed = 0;
    std::string config_digest;
    std::string stage2_config_digest;
    std::string stage4_config_digest;
    int bot_count_stage2 = 0;
    int bot_count_stage4 = 0;
    bool hardening_gap = false;  // any stage-4 compromise, never silent
    std::vector<DeviceReport> devices;

    bool operator==(const ExperimentReport&) const = default;
};

std::string report_to_json_text(const ExperimentReport& report);
Result<ExperimentReport, std::string> report_from_json_text(const std::string& text);

struct UnknownFormat {
    std::string format;
};

/// format is "json" or "table".
Result<std::string, UnknownFormat> report_render(const ExperimentReport& report,
                                                 const std::string& format);

struct ExperimentRun {
    ExperimentReport report;
    std::string probe_log;
    std::vector<std::string> event_trace;
};

/// Stepwise experiment state; run_experiment() drives it end to end and the
/// interactive shell drives it command by command.
class Experiment {
public:
    explicit Experiment(ExperimentConfig config);
    ~Experiment();

    Status<ConfigError> setup();  // stage 1
    void run_stage2();
    void run_stage3();
    void run_stage4();
    bool stage2_done() const { return stage2_done_; }
    bool stage3_done() const { return stage3_done_; }
    bool stage4_done() const { return stage4_done_; }

    ExperimentRun finish() const;

    mirai::CncServer& cnc() { return cnc_; }
    netsim::Network& net() { return *net_; }
    const ExperimentConfig& config() const { return config_; }
    const std::vector<harden::HardeningPlan>& plans() const { return plans_; }
    device::DeviceMap& devices() { return device_map_; }
    /// C&C count observed after each stage-2 exposure, in device order.
    const std::vector<int>& stage2_bot_counts() const { return stage2_bot_counts_; }

private:
    struct Exposure {
        bool compromised = false;
        std::int64_t time_ms = 0;
        int attempts = 0;
        std::optional<mirai::InstallMethod> method;
    };

    Exposure expose_device(std::size_t index, mirai::Attacker& attacker);

    ExperimentConfig config_;
    std::unique_ptr<netsim::Network> net_;
    mirai::CncServer cnc_;
    mirai::LoaderNode loader_;
    std::vector<std::unique_ptr<device::DeviceState>> device_states_;
    std::vector<device::DeviceProfile> original_profiles_;
    std::vector<netsim::SimAddress> device_addrs_;
    device::DeviceMap device_map_;
    std::unique_ptr<mirai::Attacker> attacker_;
    std::vector<harden::HardeningPlan> plans_;

    bool stage2_done_ = false;
    bool stage3_done_ = false;
    bool stage4_done_ = false;
    std::vector<int> stage2_bot_counts_;
    std::vector<StageTwoOutcome> stage2_outcomes_;
    std::vector<std::vector<std::string>> stage3_actions_;
    std::vector<bool> stage4_compromised_;
    int bot_count_stage2_ = 0;
    int bot_count_stage4_ = 0;
    std::string stage2_digest_;
    std::string stage4_digest_;
};

Result<ExperimentRun, ConfigError> run_experiment(const ExperimentConfig& config);

/// Interactive C&C shell over the harness terminal. Supports the panel
/// commands plus run-stage2 / harden / run-stage4 / report / exit.
int cnc_shell(const ExperimentConfig& config, std::istream& in, std::ostream& out);

}  // namespace miraisim::harness

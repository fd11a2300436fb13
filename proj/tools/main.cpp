// miraisim command line: experiment runner, device audit, hardening planner
// and the interactive C&C shell.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "miraisim/audit.hpp"
#include "miraisim/device.hpp"
#include "miraisim/harden.hpp"
#include "miraisim/harness.hpp"
#include "miraisim/mirai.hpp"

namespace {

using namespace miraisim;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitHardeningGap = 3;

Result<device::DeviceProfile, std::string> resolve_profile(const std::string& source) {
    auto builtin = device::builtin_profile(source);
    if (builtin.ok()) {
        return builtin.value();
    }
    auto loaded = device::load_profile_file(source);
    if (!loaded.ok()) {
        return std::string("'" + source + "' is not a built-in profile (" +
                           builtin.error().name + ") and " + loaded.error().message);
    }
    return loaded.value();
}

int run_experiment_cmd(const std::string& config_path, std::optional<std::uint64_t> seed,
                       const std::string& format, const std::string& out_path) {
    auto config = harness::load_config_file(config_path);
    if (!config.ok()) {
        std::cerr << "config error: " << config.error().str() << "\n";
        return kExitConfigError;
    }
    harness::ExperimentConfig cfg = config.value();
    if (seed) {
        cfg.seed = *seed;
    }
    auto run = harness::run_experiment(cfg);
    if (!run.ok()) {
        std::cerr << "config error: " << run.error().str() << "\n";
        return kExitConfigError;
    }
    auto rendered = harness::report_render(run.value().report, format);
    if (!rendered.ok()) {
        std::cerr << "unknown format '" << rendered.error().format << "'\n";
        return kExitConfigError;
    }
    if (out_path.empty()) {
        std::cout << rendered.value();
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "cannot write " << out_path << "\n";
            return kExitConfigError;
        }
        out << rendered.value();
    }
    return run.value().report.hardening_gap ? kExitHardeningGap : kExitOk;
}

int audit_cmd(const std::string& profile_source, const std::string& wordlist_path,
              const std::string& rtsp_path_file, int port_lo, int port_hi,
              const std::string& format) {
    auto profile = resolve_profile(profile_source);
    if (!profile.ok()) {
        std::cerr << "profile error: " << profile.error() << "\n";
        return kExitConfigError;
    }

    CredentialList wordlist;
    if (auto loaded = load_credential_list(wordlist_path); loaded.ok()) {
        wordlist = loaded.value();
    } else {
        std::cerr << "note: skipping credential checks, " << loaded.error().message << "\n";
    }
    std::vector<std::string> rtsp_paths;
    if (auto loaded = audit::load_rtsp_paths(rtsp_path_file); loaded.ok()) {
        rtsp_paths = loaded.value();
    }

    netsim::Network net;
    device::DeviceState dev(profile.value());
    const auto target = netsim::SimAddress::parse("10.77.0.10").value();
    const auto scanner = netsim::SimAddress::parse("10.77.0.1").value();
    if (auto bad = dev.attach(net, target); !bad.ok()) {
        std::cerr << "cannot register device\n";
        return kExitConfigError;
    }
    device::DeviceMap devices{{target, &dev}};
    audit::Auditor auditor(net, devices, scanner);
    auto findings =
        auditor.full_audit(target, static_cast<std::uint16_t>(port_lo),
                           static_cast<std::uint16_t>(port_hi), wordlist, rtsp_paths);
    if (format == "json") {
        std::cout << audit::findings_to_json_text(findings);
    } else {
        std::cout << "audit of " << profile.value().name << " (" << target.str() << ")\n"
                  << audit::findings_to_table(findings);
    }
    return kExitOk;
}

int harden_plan_cmd(const std::string& profile_source, const std::string& format) {
    auto profile = resolve_profile(profile_source);
    if (!profile.ok()) {
        std::cerr << "profile error: " << profile.error() << "\n";
        return kExitConfigError;
    }
    harden::HardeningPlan plan = harden::plan(profile.value());
    if (format == "json") {
        std::cout << harden::plan_to_json_text(plan);
    } else {
        std::cout << harden::plan_to_table(plan);
    }
    return kExitOk;
}

int cnc_shell_cmd(const std::string& config_path) {
    auto config = harness::load_config_file(config_path);
    if (!config.ok()) {
        std::cerr << "config error: " << config.error().str() << "\n";
        return kExitConfigError;
    }
    return harness::cnc_shell(config.value(), std::cin, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic Mirai-style infection and hardening simulator"};
    app.require_subcommand(1);

    // experiment run
    auto* experiment = app.add_subcommand("experiment", "four-stage experiment");
    experiment->require_subcommand(1);
    auto* exp_run = experiment->add_subcommand("run", "run attack, harden, re-attack");
    std::string config_path;
    std::string format = "table";
    std::string out_path;
    std::uint64_t seed_value = 0;
    bool seed_set = false;
    exp_run->add_option("--config", config_path, "experiment config JSON")->required();
    exp_run->add_option("--seed", seed_value, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    exp_run->add_option("--format", format, "json or table")->default_val("table");
    exp_run->add_option("--out", out_path, "write the report to a file");

    // audit
    auto* audit_cmd_app = app.add_subcommand("audit", "defender-side device audit");
    std::string audit_profile;
    std::string wordlist_path = "data/credentials.txt";
    std::string rtsp_file = "data/rtsp_paths.txt";
    int port_lo = 1;
    int port_hi = 10240;
    std::string audit_format = "table";
    audit_cmd_app->add_option("--profile", audit_profile, "built-in name or profile JSON path")
        ->required();
    audit_cmd_app->add_option("--wordlist", wordlist_path, "credential dictionary");
    audit_cmd_app->add_option("--rtsp-paths", rtsp_file, "candidate RTSP path list");
    audit_cmd_app->add_option("--port-lo", port_lo, "first scanned port")
        ->check(CLI::Range(1, 65535));
    audit_cmd_app->add_option("--port-hi", port_hi, "last scanned port")
        ->check(CLI::Range(1, 65535));
    audit_cmd_app->add_option("--format", audit_format, "json or table");

    // harden plan
    auto* harden_app = app.add_subcommand("harden", "hardening engine");
    harden_app->require_subcommand(1);
    auto* plan_app = harden_app->add_subcommand("plan", "print the per-device action plan");
    std::string plan_profile;
    std::string plan_format = "table";
    plan_app->add_option("--profile", plan_profile, "built-in name or profile JSON path")
        ->required();
    plan_app->add_option("--format", plan_format, "json or table");

    // cnc-shell
    auto* shell_app = app.add_subcommand("cnc-shell", "interactive C&C panel and stage runner");
    std::string shell_config;
    shell_app->add_option("--config", shell_config, "experiment config JSON")->required();

    CLI11_PARSE(app, argc, argv);

    if (exp_run->parsed()) {
        return run_experiment_cmd(config_path,
                                  seed_set ? std::optional<std::uint64_t>(seed_value)
                                           : std::nullopt,
                                  format, out_path);
    }
    if (audit_cmd_app->parsed()) {
        if (port_hi < port_lo) {
            std::cerr << "port range is inverted\n";
            return kExitConfigError;
        }
        return audit_cmd(audit_profile, wordlist_path, rtsp_file, port_lo, port_hi,
                         audit_format);
    }
    if (plan_app->parsed()) {
        return harden_plan_cmd(plan_profile, plan_format);
    }
    if (shell_app->parsed()) {
        return cnc_shell_cmd(shell_config);
    }
    return kExitOk;
}

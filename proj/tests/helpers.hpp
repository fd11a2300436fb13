// Shared fixtures: the four-device lab network with its C&C/loader pair,
// plus data-file access for the reference dictionaries.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "miraisim/credentials.hpp"
#include "miraisim/device.hpp"
#include "miraisim/harness.hpp"
#include "miraisim/mirai.hpp"
#include "miraisim/netsim.hpp"

namespace testutil {

using namespace miraisim;

inline netsim::SimAddress addr(const std::string& dotted) {
    return netsim::SimAddress::parse(dotted).value();
}

inline std::string data_path(const std::string& name) {
    return std::string(MIRAISIM_DATA_DIR) + "/" + name;
}

inline CredentialList reference_credentials() {
    return load_credential_list(data_path("credentials.txt")).value();
}

inline constexpr bool kWithBuiltins = true;

/// C&C at .2, loader at .3, devices from .10 up; devices attach immediately.
/// Constructing with kWithBuiltins registers the four lab devices.
struct Lab {
    netsim::Network net;
    mirai::CncServer cnc;
    mirai::LoaderNode loader;
    std::vector<std::unique_ptr<device::DeviceState>> devices;
    device::DeviceMap map;

    netsim::SimAddress cnc_addr = addr("10.77.0.2");
    netsim::SimAddress loader_addr = addr("10.77.0.3");

    explicit Lab(bool with_builtins = false, netsim::LatencyModel latency = {}) : net(latency) {
        net.register_node(cnc_addr, cnc);
        net.register_node(loader_addr, loader);
        if (with_builtins) {
            add_device(device::builtin_profile(device::BuiltinProfile::Coolead), "10.77.0.10");
            add_device(device::builtin_profile(device::BuiltinProfile::RaspberryPi),
                       "10.77.0.11");
            add_device(device::builtin_profile(device::BuiltinProfile::Sricam), "10.77.0.12");
            add_device(device::builtin_profile(device::BuiltinProfile::Simulated), "10.77.0.13");
        }
    }

    device::DeviceState& add_device(device::DeviceProfile profile, const std::string& at) {
        auto state = std::make_unique<device::DeviceState>(std::move(profile));
        auto a = addr(at);
        state->attach(net, a);
        map[a] = state.get();
        devices.push_back(std::move(state));
        return *devices.back();
    }

    mirai::Attacker make_attacker(CredentialList creds, double p_game = 0.0,
                                  std::uint64_t seed = 1) {
        mirai::Attacker::Config cfg;
        cfg.scanner_addr = loader_addr;
        cfg.cnc_addr = cnc_addr;
        cfg.credentials = std::move(creds);
        cfg.p_game = p_game;
        cfg.seed = seed;
        return mirai::Attacker(net, cnc, map, cfg);
    }
};

inline mirai::ScanConfig lab_scan_config() {
    mirai::ScanConfig cfg;
    cfg.ranges = {{addr("10.77.0.0"), addr("10.77.0.255")}};
    cfg.exclusions = {{addr("10.77.0.0"), addr("10.77.0.9")}};
    cfg.target_ports = {23};
    return cfg;
}

/// Minimal shell device: Telnet with one accepted credential.
inline device::DeviceProfile shell_device_profile(const std::string& name,
                                                  const CredentialEntry& cred, bool has_wget,
                                                  bool has_tftp, std::uint16_t telnet_port = 23) {
    device::DeviceProfile p;
    p.name = name;
    device::ServiceConfig telnet;
    telnet.kind = device::ServiceKind::Telnet;
    telnet.port = telnet_port;
    telnet.auth = CredentialList{cred};
    telnet.grants_shell = true;
    p.services.push_back(telnet);
    p.busybox = true;
    p.has_wget = has_wget;
    p.has_tftp_client = has_tftp;
    p.shell_exec_users = {cred.username};
    return p;
}

inline harness::ExperimentConfig default_experiment_config() {
    harness::ExperimentConfig cfg = harness::default_config();
    cfg.credential_list_path = data_path("credentials.txt");
    cfg.credentials = reference_credentials();
    return cfg;
}

}  // namespace testutil

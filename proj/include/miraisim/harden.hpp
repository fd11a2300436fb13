// Countermeasure engine: per-profile planning of the defensive actions,
// application against live device state, and the two scripted defenses
// (periodic /proc-style process killer and the BusyBox command wrapper).
// Every action is idempotent under the same seed.

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "miraisim/credentials.hpp"
#include "miraisim/device.hpp"
#include "miraisim/netsim.hpp"

namespace miraisim::harden {

enum class Action {
    ChangeTelnetCredentials,
    RandomizeTelnetPort,
    DisableTelnetPreferSsh,
    ChangeWebCredentials,
    DisableSmtp,
    ReplaceHttpWithHttps,
    RestrictBusyboxToRoot,
    BlockOutboundIp,
    BlockPort,
    DisableFtp,
    DisableTftp,
    InstallProcessKiller,
    InstallBusyboxWrapper,
};

inline constexpr Action kAllActions[] = {
    Action::ChangeTelnetCredentials, Action::RandomizeTelnetPort,
    Action::DisableTelnetPreferSsh,  Action::ChangeWebCredentials,
    Action::DisableSmtp,             Action::ReplaceHttpWithHttps,
    Action::RestrictBusyboxToRoot,   Action::BlockOutboundIp,
    Action::BlockPort,               Action::DisableFtp,
    Action::DisableTftp,             Action::InstallProcessKiller,
    Action::InstallBusyboxWrapper,
};

const char* to_string(Action a);
std::optional<Action> action_from_string(const std::string& name);

struct Options {
    /// Game-host address the original code occasionally contacts.
    netsim::SimAddress blocked_ip = netsim::SimAddress::parse("5.206.225.96").value();
    /// The bot's single-instance control port.
    std::uint16_t blocked_port = 48101;
    /// Attack dictionary generated credentials must never intersect.
    const CredentialList* avoid_list = nullptr;
    /// Scheduling interval of the armed process killer.
    std::int64_t killer_interval_ms = 30'000;
};

struct PlanEntry {
    Action action;
    bool apply = false;
    std::string reason;  // for NotApplicable entries
    bool warning = false;
    std::optional<netsim::SimAddress> ip_param;  // BlockOutboundIp
    std::optional<std::uint16_t> port_param;     // BlockPort
};

/// One entry per Action member, always.
struct HardeningPlan {
    std::string device_name;
    std::vector<PlanEntry> entries;

    const PlanEntry* entry(Action a) const;
    std::vector<Action> applicable() const;
};

/// Derives the per-device plan: disable Telnet only where SSH is viable
/// (not on BusyBox firmware), HTTPS only where TLS can be added, port and
/// credential changes wherever Telnet survives, firewall rules everywhere.
HardeningPlan plan(const device::DeviceProfile& profile, const Options& opts = {});

enum class ApplyErrorKind { NotApplicable, KillerNotArmed, WrapperNotArmed };

struct ApplyError {
    ApplyErrorKind kind;
    std::string message;
};

/// Applies one action to live device state. Goal-directed: re-applying an
/// action whose end state already holds is a no-op; an action whose target
/// never existed fails with NotApplicable.
Status<ApplyError> apply(device::DeviceState& dev, Action action, std::uint64_t seed,
                         const Options& opts = {});

/// Applies every Apply entry of the plan in order. Returns the actions done.
std::vector<Action> apply_plan(device::DeviceState& dev, const HardeningPlan& plan,
                               std::uint64_t seed, const Options& opts = {});

/// One pass of the armed killer: ends exactly the malware processes whose
/// exec path lives under /root/, /tmp/ or /var/tmp/. Benign processes under
/// those prefixes survive the narrowing filter.
Result<std::vector<device::ProcessEntry>, ApplyError> process_killer_scan(
    device::DeviceState& dev);

/// Runs a command through the armed wrapper (the device routes intercepted
/// commands to shadow state on its own; this entry point just insists the
/// wrapper is armed first).
Result<device::CommandOutput, device::ShellError> busybox_wrapper_exec(
    device::DeviceState& dev, const device::Session& session, const std::string& command);

/// 16-character seeded pair, re-rolled until it misses the avoid list.
CredentialEntry generate_strong_credentials(const std::string& device_name, Action action,
                                            std::uint64_t seed, const CredentialList* avoid);

/// Deterministic port draw in [1025, 65535] excluding `taken`.
std::uint16_t randomized_telnet_port(const std::string& device_name, std::uint64_t seed,
                                     const std::set<std::uint16_t>& taken);

std::string plan_to_json_text(const HardeningPlan& plan);
std::string plan_to_table(const HardeningPlan& plan);

}  // namespace miraisim::harden

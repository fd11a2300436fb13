// The attacker stack: exclusion-aware SYN scanner, dictionary brute forcer,
// payload loader with wget -> TFTP fallback, bot runtime with self-defense,
// and the C&C server with its line-oriented panel. Mirrors the two-server
// design: the C&C and the loader are distinct nodes with distinct addresses.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "miraisim/credentials.hpp"
#include "miraisim/device.hpp"
#include "miraisim/netsim.hpp"

namespace miraisim::mirai {

/// Telnet port of the game host the original code occasionally contacts.
inline const char* kGameHostIp = "5.206.225.96";
inline constexpr std::uint16_t kGameHostPort = 23;
/// Control port a bot binds so only one instance runs per device.
inline constexpr std::uint16_t kInstanceLockPort = 48101;
inline constexpr std::uint16_t kCncReportPort = 23;
inline constexpr std::uint16_t kLoaderHttpPort = 80;
inline constexpr std::uint16_t kLoaderTftpPort = 69;
inline const char* kBotExecPath = "/tmp/.mirai";

struct ScanConfig {
    std::vector<netsim::AddressRange> ranges;
    /// Honored absolutely: no probe is ever emitted to an excluded address.
    std::vector<netsim::AddressRange> exclusions;
    std::vector<std::uint16_t> target_ports = {23};

    bool excluded(netsim::SimAddress a) const { return netsim::in_any_range(exclusions, a); }
};

enum class InstallMethod { Wget, Tftp };

const char* to_string(InstallMethod m);

struct BotRecord {
    int bot_id = 0;  // assigned by the C&C, dense from 1
    netsim::SimAddress addr;
    std::int64_t infected_at_ms = 0;
    CredentialEntry login_used;
    InstallMethod install_method = InstallMethod::Wget;
};

enum class CncError { StaleRegistration };

/// C&C server state: bot registry plus the named attack vectors the panel
/// can list (registry only; execution is not part of this tool).
class CncServer : public netsim::Node {
public:
    CncServer();

    void set_infection_probe(std::function<bool(netsim::SimAddress)> probe) {
        infection_probe_ = std::move(probe);
    }

    /// Idempotent per address. The record's bot_id is assigned here.
    Result<int, CncError> register_bot(BotRecord record);

    int bot_count() const { return static_cast<int>(bots_.size()); }
    const std::vector<BotRecord>& bots() const { return bots_; }
    bool has_bot(netsim::SimAddress addr) const;
    const std::vector<std::string>& attack_vectors() const { return attack_vectors_; }

    /// Line-oriented panel: status, vectors, help. Anything else echoes
    /// the usage text.
    std::string panel(const std::string& line) const;

    void reset();

    // netsim::Node: the panel/report port.
    bool port_open(std::uint16_t port) const override { return port == kCncReportPort; }

private:
    std::vector<BotRecord> bots_;
    std::vector<std::string> attack_vectors_;
    std::function<bool(netsim::SimAddress)> infection_probe_;
};

/// Payload server half of the pair; answers HTTP and TFTP fetches.
class LoaderNode : public netsim::Node {
public:
    bool port_open(std::uint16_t port) const override {
        return port == kLoaderHttpPort || port == kLoaderTftpPort;
    }
};

struct ScanCandidate {
    netsim::SimAddress addr;
    std::uint16_t port = 0;
};

struct BruteForceSuccess {
    device::Session session;
    CredentialEntry entry;
    int attempts_used = 0;
};

/// Exhausted when `success` is empty; attempts_used still reports how many
/// entries were consumed.
struct BruteForceResult {
    std::optional<BruteForceSuccess> success;
    int attempts_used = 0;
};

enum class LoadError { ShellUnavailable, LoadFailed };

struct InfectionResult {
    InstallMethod method = InstallMethod::Wget;
    int bot_pid = 0;
};

enum class GameContact { NotAttempted, Connected, Refused, Blocked };

struct BotStatus {
    bool running = false;  // false = instance terminated itself
    std::vector<device::ProcessEntry> killed;
    bool registered = false;
    GameContact game_contact = GameContact::NotAttempted;
};

/// One infection attempt as recorded by the attacker.
struct AttackRecord {
    netsim::SimAddress addr;
    std::uint16_t port = 0;
    bool login_success = false;
    int attempts_used = 0;
    std::optional<InstallMethod> install_method;
    bool infected = false;
};

/// Everything the attacking side runs. Operations are synchronous against
/// the event loop and advance the shared simulation clock.
class Attacker {
public:
    struct Config {
        netsim::SimAddress scanner_addr;  // loader / scan receiver node
        netsim::SimAddress cnc_addr;
        CredentialList credentials;
        int attempt_cap = 0;  // 0 = credential list size
        double p_game = 0.0;
        std::uint64_t seed = 1;
    };

    Attacker(netsim::Network& net, CncServer& cnc, const device::DeviceMap& devices,
             Config config);

    /// Probes every (address, port) in ranges x target_ports except excluded
    /// addresses, in ascending address order with ports in listed order.
    std::vector<ScanCandidate> syn_scan(const ScanConfig& config);

    /// Tries entries strictly in list order, stopping at the first session.
    /// A deadline (absolute sim ms) prevents attempts that would finish
    /// beyond it.
    BruteForceResult brute_force(netsim::SimAddress addr, std::uint16_t port,
                                 const CredentialList& list, int attempt_cap,
                                 std::optional<std::int64_t> deadline_ms = std::nullopt);

    /// wget first, TFTP on failure; spawns the bot process and starts it.
    /// Reports to the C&C only while the device is still infected.
    Result<InfectionResult, LoadError> load_payload(const device::Session& session,
                                                    netsim::SimAddress loader_addr);

    /// Bot boot sequence: instance lock, memory scrape, Anime/Kami kill
    /// routine, C&C registration, optional game-host contact.
    BotStatus bot_start(device::DeviceState& dev);

    /// Full pipeline against one scan candidate. Returns the attack record.
    AttackRecord attack(const ScanCandidate& candidate, netsim::SimAddress loader_addr,
                        std::optional<std::int64_t> deadline_ms = std::nullopt);

    const std::vector<AttackRecord>& attack_log() const { return attack_log_; }
    const Config& config() const { return config_; }

private:
    device::DeviceState* device_at(netsim::SimAddress addr);
    void scrape_competitors(device::DeviceState& dev, std::vector<device::ProcessEntry>& killed);
    void kill_anime_kami(device::DeviceState& dev, std::vector<device::ProcessEntry>& killed);

    netsim::Network& net_;
    CncServer& cnc_;
    const device::DeviceMap& devices_;
    Config config_;
    std::mt19937_64 rng_;
    std::vector<AttackRecord> attack_log_;
};

}  // namespace miraisim::mirai

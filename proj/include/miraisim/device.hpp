// Virtual IoT device model: service surface, credential checks, a minimal
// BusyBox-flavoured shell, a process table with port locks, and the four
// built-in lab profiles. A device is a netsim::Node; all of its operations
// advance the simulation clock it is attached to.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "miraisim/credentials.hpp"
#include "miraisim/netsim.hpp"
#include "miraisim/result.hpp"

namespace miraisim::device {

enum class ServiceKind { Telnet, Ssh, Http, Https, Rtsp, Upnp, Smtp, Ftp, Tftp, Opaque };

const char* to_string(ServiceKind k);
std::optional<ServiceKind> service_kind_from_string(const std::string& name);

/// True for kinds that run a username/password exchange when credentials
/// are configured. Opaque, Upnp, Rtsp and Tftp never authenticate.
bool auth_capable(ServiceKind k);

struct ServiceConfig {
    ServiceKind kind = ServiceKind::Opaque;
    std::uint16_t port = 0;
    std::optional<CredentialList> auth;  // accepted logins
    bool grants_shell = false;
    bool encrypted = false;  // true for Ssh/Https
};

struct RtspPath {
    std::string path;
    bool requires_auth = false;
};

struct DeviceProfile {
    std::string name;
    std::vector<ServiceConfig> services;
    bool busybox = false;
    bool has_wget = false;
    bool has_tftp_client = false;
    std::set<std::string> shell_exec_users;
    std::vector<RtspPath> rtsp_paths;

    const ServiceConfig* service_at(std::uint16_t port) const;
    ServiceConfig* service_at(std::uint16_t port);
    const ServiceConfig* first_service(ServiceKind kind) const;
    ServiceConfig* first_service(ServiceKind kind);
    bool has_service(ServiceKind kind) const { return first_service(kind) != nullptr; }
    bool grants_any_shell() const;
    std::set<std::uint16_t> ports() const;
};

struct ProfileError {
    std::string message;
};

/// Checks the profile invariants: unique ports, Https encrypted / Http
/// plaintext, rtsp_paths only with an Rtsp service.
Status<ProfileError> validate_profile(const DeviceProfile& profile);

enum class BuiltinProfile { Coolead, RaspberryPi, Sricam, Simulated };

struct UnknownProfile {
    std::string name;
};

/// The four lab device profiles with their factory service surface and
/// default credentials.
DeviceProfile builtin_profile(BuiltinProfile which);
Result<DeviceProfile, UnknownProfile> builtin_profile(const std::string& name);
std::vector<std::string> builtin_profile_names();

enum class ProcessOrigin { MiraiBot, Qbot, UpxPacked, Zollard, AnimeKami, Benign };

const char* to_string(ProcessOrigin o);

struct ProcessEntry {
    int pid = 0;
    std::string exec_path;  // always absolute
    ProcessOrigin origin = ProcessOrigin::Benign;
};

struct AuthLogEntry {
    std::int64_t at_ms = 0;
    std::uint16_t port = 0;
    std::string username;
    bool success = false;
};

/// An authenticated service session. `shell` records the capability granted
/// at login time; command execution re-validates against live device state.
struct Session {
    netsim::SimAddress device;
    std::uint16_t port = 0;
    std::string username;
    std::string password;
    bool shell = false;
};

enum class LoginStatus { Success, Denied, NoSuchService, NoAuthExchange };

struct LoginOutcome {
    LoginStatus status = LoginStatus::Denied;
    std::optional<Session> session;
};

enum class ShellErrorKind { ShellDenied, CommandFailed };

struct ShellError {
    ShellErrorKind kind;
    std::string message;
};

struct CommandOutput {
    std::string text;
    std::optional<int> spawned_pid;
};

struct StreamHandle {
    std::string path;
};

enum class RtspStatus { Stream, NotFound, AuthRequired, NoRtspService };

struct RtspOutcome {
    RtspStatus status = RtspStatus::NotFound;
    std::optional<StreamHandle> stream;
};

class DeviceState : public netsim::Node {
public:
    explicit DeviceState(DeviceProfile profile);

    /// Registers the device on the network and binds its clock.
    Status<netsim::NetError> attach(netsim::Network& net, netsim::SimAddress addr);

    const DeviceProfile& profile() const { return profile_; }
    DeviceProfile& profile() { return profile_; }
    netsim::SimAddress address() const { return addr_; }
    netsim::Network* network() { return net_; }

    // netsim::Node
    bool port_open(std::uint16_t port) const override;
    const netsim::Firewall& firewall() const override { return firewall_; }
    netsim::Firewall& firewall() { return firewall_; }

    /// Single username/password challenge against the service at `port`.
    /// Every attempt lands in the auth log; each consumes login_attempt_ms.
    LoginOutcome attempt_login(std::uint16_t port, const CredentialEntry& cred);

    /// Minimal shell: wget <url>, tftp <host> [file], run <path>, ps,
    /// kill <pid>, bind <port>. Anything else gets a BusyBox-style
    /// "applet not found" reply. Requires a live shell-capable session.
    Result<CommandOutput, ShellError> shell_exec(const Session& session,
                                                 const std::string& command);

    /// Programmatic process start used by payload delivery; subject to the
    /// same wrapper interception as `run`.
    Result<int, ShellError> spawn_process(const Session& session, const std::string& exec_path,
                                          ProcessOrigin origin);

    RtspOutcome rtsp_request(const std::string& path);

    // Process/lock surface (real state; malware code paths resolve their
    // own view through malware_* below).
    const std::vector<ProcessEntry>& processes() const { return processes_; }
    std::vector<ProcessEntry>& processes_mut() { return processes_; }
    const std::map<std::uint16_t, int>& port_locks() const { return locks_; }
    int spawn_direct(const std::string& exec_path, ProcessOrigin origin);
    bool kill_pid(int pid);
    bool bind_port(std::uint16_t port, int owner_pid);
    bool infected() const;
    std::optional<std::int64_t> infection_time() const { return infection_time_; }

    /// Removes malware processes, their locks and the infection timestamp.
    void clear_infection();

    const std::vector<AuthLogEntry>& auth_log() const { return auth_log_; }

    // Defense hooks (armed by the hardening engine).
    void arm_process_killer() { process_killer_armed_ = true; }
    bool process_killer_armed() const { return process_killer_armed_; }
    void arm_busybox_wrapper();
    bool busybox_wrapper_armed() const { return busybox_wrapper_armed_; }

    /// Shadow copy holding everything the wrapper absorbed. Empty until the
    /// wrapper intercepts its first command.
    struct ShadowState {
        std::vector<ProcessEntry> processes;
        std::map<std::uint16_t, int> locks;
    };
    const ShadowState* shadow() const { return shadow_.get(); }

    // View selection for malware behaviour: when the wrapper is armed the
    // malware's world is the shadow state.
    std::vector<ProcessEntry>& malware_processes();
    bool malware_bind(std::uint16_t port, int owner_pid);
    bool malware_kill(int pid);
    int malware_max_bot_pid() const;

private:
    struct ExecContext;  // resolves real vs shadow targets per command

    bool session_may_exec(const Session& session) const;
    void advance(std::int64_t ms);
    ShadowState& ensure_shadow();
    bool wrapper_intercepts(const std::string& command) const;
    Result<CommandOutput, ShellError> exec_parsed(const Session& session,
                                                  const std::string& command, bool in_shadow);

    DeviceProfile profile_;
    netsim::SimAddress addr_;
    netsim::Network* net_ = nullptr;
    std::vector<ProcessEntry> processes_;
    netsim::Firewall firewall_;
    std::map<std::uint16_t, int> locks_;  // port -> owning pid
    std::optional<std::int64_t> infection_time_;
    std::vector<AuthLogEntry> auth_log_;
    int next_pid_ = 100;
    bool process_killer_armed_ = false;
    bool busybox_wrapper_armed_ = false;
    std::unique_ptr<ShadowState> shadow_;
};

/// Address -> device lookup used by the attacker and audit modules.
using DeviceMap = std::map<netsim::SimAddress, DeviceState*>;

// JSON profile document, field names exactly as in DeviceProfile; unknown
// fields are rejected.
Result<DeviceProfile, ProfileError> profile_from_json_text(const std::string& text);
std::string profile_to_json_text(const DeviceProfile& profile);
Result<DeviceProfile, ProfileError> load_profile_file(const std::string& path);

}  // namespace miraisim::device

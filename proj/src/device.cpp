#include "miraisim/device.hpp"

#include <algorithm>
#include <sstream>

namespace miraisim::device {

const char* to_string(ServiceKind k) {
    switch (k) {
        case ServiceKind::Telnet: return "Telnet";
        case ServiceKind::Ssh: return "Ssh";
        case ServiceKind::Http: return "Http";
        case ServiceKind::Https: return "Https";
        case ServiceKind::Rtsp: return "Rtsp";
        case ServiceKind::Upnp: return "Upnp";
        case ServiceKind::Smtp: return "Smtp";
        case ServiceKind::Ftp: return "Ftp";
        case ServiceKind::Tftp: return "Tftp";
        case ServiceKind::Opaque: return "Opaque";
    }
    return "?";
}

std::optional<ServiceKind> service_kind_from_string(const std::string& name) {
    static const std::map<std::string, ServiceKind> kinds = {
        {"Telnet", ServiceKind::Telnet}, {"Ssh", ServiceKind::Ssh},
        {"Http", ServiceKind::Http},     {"Https", ServiceKind::Https},
        {"Rtsp", ServiceKind::Rtsp},     {"Upnp", ServiceKind::Upnp},
        {"Smtp", ServiceKind::Smtp},     {"Ftp", ServiceKind::Ftp},
        {"Tftp", ServiceKind::Tftp},     {"Opaque", ServiceKind::Opaque},
    };
    auto it = kinds.find(name);
    if (it == kinds.end()) return std::nullopt;
    return it->second;
}

bool auth_capable(ServiceKind k) {
    switch (k) {
        case ServiceKind::Telnet:
        case ServiceKind::Ssh:
        case ServiceKind::Http:
        case ServiceKind::Https:
        case ServiceKind::Smtp:
        case ServiceKind::Ftp:
            return true;
        default:
            return false;
    }
}

const char* to_string(ProcessOrigin o) {
    switch (o) {
        case ProcessOrigin::MiraiBot: return "MiraiBot";
        case ProcessOrigin::Qbot: return "Qbot";
        case ProcessOrigin::UpxPacked: return "UpxPacked";
        case ProcessOrigin::Zollard: return "Zollard";
        case ProcessOrigin::AnimeKami: return "AnimeKami";
        case ProcessOrigin::Benign: return "Benign";
    }
    return "?";
}

const ServiceConfig* DeviceProfile::service_at(std::uint16_t port) const {
    for (const auto& s : services) {
        if (s.port == port) return &s;
    }
    return nullptr;
}

ServiceConfig* DeviceProfile::service_at(std::uint16_t port) {
    for (auto& s : services) {
        if (s.port == port) return &s;
    }
    return nullptr;
}

const ServiceConfig* DeviceProfile::first_service(ServiceKind kind) const {
    for (const auto& s : services) {
        if (s.kind == kind) return &s;
    }
    return nullptr;
}

ServiceConfig* DeviceProfile::first_service(ServiceKind kind) {
    for (auto& s : services) {
        if (s.kind == kind) return &s;
    }
    return nullptr;
}

bool DeviceProfile::grants_any_shell() const {
    return std::any_of(services.begin(), services.end(),
                       [](const ServiceConfig& s) { return s.grants_shell; });
}

std::set<std::uint16_t> DeviceProfile::ports() const {
    std::set<std::uint16_t> out;
    for (const auto& s : services) out.insert(s.port);
    return out;
}

Status<ProfileError> validate_profile(const DeviceProfile& profile) {
    if (profile.name.empty()) {
        return ProfileError{"name: must be non-empty"};
    }
    std::set<std::uint16_t> seen;
    for (const auto& s : profile.services) {
        if (s.port == 0) {
            return ProfileError{"services: port 0 is not valid"};
        }
        if (!seen.insert(s.port).second) {
            return ProfileError{"services: duplicate port " + std::to_string(s.port)};
        }
        if ((s.kind == ServiceKind::Https || s.kind == ServiceKind::Ssh) && !s.encrypted) {
            return ProfileError{std::string(to_string(s.kind)) + " service must be encrypted"};
        }
        if ((s.kind == ServiceKind::Http || s.kind == ServiceKind::Telnet) && s.encrypted) {
            return ProfileError{std::string(to_string(s.kind)) + " service cannot be encrypted"};
        }
    }
    if (!profile.rtsp_paths.empty() && !profile.has_service(ServiceKind::Rtsp)) {
        return ProfileError{"rtsp_paths: set but no Rtsp service exists"};
    }
    return {};
}

namespace {

ServiceConfig make_service(ServiceKind kind, std::uint16_t port, std::optional<CredentialList> auth,
                           bool grants_shell, bool encrypted) {
    ServiceConfig s;
    s.kind = kind;
    s.port = port;
    s.auth = std::move(auth);
    s.grants_shell = grants_shell;
    s.encrypted = encrypted;
    return s;
}

}  // namespace

DeviceProfile builtin_profile(BuiltinProfile which) {
    DeviceProfile p;
    switch (which) {
        case BuiltinProfile::Coolead: {
            // IP camera: Telnet root shell over BusyBox, web UI, and an
            // opaque vendor service on 8600 that never speaks.
            p.name = "coolead";
            const CredentialList factory = {{"root", "xc3511"}};
            p.services.push_back(make_service(ServiceKind::Telnet, 23, factory, true, false));
            p.services.push_back(make_service(ServiceKind::Http, 80, factory, false, false));
            p.services.push_back(make_service(ServiceKind::Opaque, 8600, std::nullopt, false, false));
            p.busybox = true;
            p.has_wget = true;
            p.has_tftp_client = true;
            p.shell_exec_users = {"root"};
            break;
        }
        case BuiltinProfile::RaspberryPi: {
            p.name = "raspberry_pi";
            const CredentialList factory = {{"pi", "raspberry"}};
            p.services.push_back(make_service(ServiceKind::Ssh, 22, factory, true, true));
            p.services.push_back(make_service(ServiceKind::Telnet, 23, factory, true, false));
            p.services.push_back(make_service(ServiceKind::Http, 80, factory, false, false));
            p.busybox = false;
            p.has_wget = true;
            p.has_tftp_client = true;
            p.shell_exec_users = {"pi", "root"};
            break;
        }
        case BuiltinProfile::Sricam: {
            // Closed camera: streaming and UPnP only, no shell anywhere.
            p.name = "sricam";
            p.services.push_back(make_service(ServiceKind::Rtsp, 554, std::nullopt, false, false));
            p.services.push_back(make_service(ServiceKind::Upnp, 5000, std::nullopt, false, false));
            p.busybox = false;
            p.has_wget = false;
            p.has_tftp_client = false;
            p.rtsp_paths = {{"/onvif1", false}};
            break;
        }
        case BuiltinProfile::Simulated: {
            p.name = "simulated";
            const CredentialList factory = {{"root", "xc3511"}};
            p.services.push_back(make_service(ServiceKind::Telnet, 23, factory, true, false));
            p.services.push_back(make_service(ServiceKind::Http, 80, factory, false, false));
            p.busybox = true;
            p.has_wget = true;
            p.has_tftp_client = true;
            p.shell_exec_users = {"root"};
            break;
        }
    }
    return p;
}

Result<DeviceProfile, UnknownProfile> builtin_profile(const std::string& name) {
    if (name == "coolead") return builtin_profile(BuiltinProfile::Coolead);
    if (name == "raspberry_pi") return builtin_profile(BuiltinProfile::RaspberryPi);
    if (name == "sricam") return builtin_profile(BuiltinProfile::Sricam);
    if (name == "simulated") return builtin_profile(BuiltinProfile::Simulated);
    return UnknownProfile{name};
}

std::vector<std::string> builtin_profile_names() {
    return {"coolead", "raspberry_pi", "sricam", "simulated"};
}

DeviceState::DeviceState(DeviceProfile profile) : profile_(std::move(profile)) {}

Status<netsim::NetError> DeviceState::attach(netsim::Network& net, netsim::SimAddress addr) {
    auto reg = net.register_node(addr, *this);
    if (!reg.ok()) {
        return reg.error();
    }
    net_ = &net;
    addr_ = addr;
    return {};
}

bool DeviceState::port_open(std::uint16_t port) const {
    return profile_.service_at(port) != nullptr;
}

void DeviceState::advance(std::int64_t ms) {
    if (net_) net_->clock().advance(ms);
}

LoginOutcome DeviceState::attempt_login(std::uint16_t port, const CredentialEntry& cred) {
    const ServiceConfig* svc = profile_.service_at(port);
    if (!svc) {
        return {LoginStatus::NoSuchService, std::nullopt};
    }
    if (!auth_capable(svc->kind) || !svc->auth.has_value()) {
        return {LoginStatus::NoAuthExchange, std::nullopt};
    }
    advance(net_ ? net_->latency().login_attempt_ms : 0);
    const bool accepted = credential_in_list(*svc->auth, cred);
    auth_log_.push_back({net_ ? net_->clock().now() : 0, port, cred.username, accepted});
    if (!accepted) {
        return {LoginStatus::Denied, std::nullopt};
    }
    Session session;
    session.device = addr_;
    session.port = port;
    session.username = cred.username;
    session.password = cred.password;
    session.shell = svc->grants_shell && profile_.shell_exec_users.count(cred.username) != 0;
    return {LoginStatus::Success, session};
}

bool DeviceState::session_may_exec(const Session& session) const {
    const ServiceConfig* svc = profile_.service_at(session.port);
    if (!svc || !svc->grants_shell) return false;
    return profile_.shell_exec_users.count(session.username) != 0;
}

DeviceState::ShadowState& DeviceState::ensure_shadow() {
    if (!shadow_) shadow_ = std::make_unique<ShadowState>();
    return *shadow_;
}

void DeviceState::arm_busybox_wrapper() {
    busybox_wrapper_armed_ = true;
}

namespace {

std::vector<std::string> split_words(const std::string& command) {
    std::vector<std::string> words;
    std::istringstream in(command);
    std::string w;
    while (in >> w) words.push_back(w);
    return words;
}

// Accepts "host", "host:port", "http://host[:port]/path".
struct UrlParts {
    std::string host;
    std::uint16_t port = 80;
};

std::optional<UrlParts> parse_url(const std::string& url, std::uint16_t default_port) {
    std::string rest = url;
    auto scheme = rest.find("://");
    if (scheme != std::string::npos) {
        rest = rest.substr(scheme + 3);
    }
    auto slash = rest.find('/');
    if (slash != std::string::npos) {
        rest = rest.substr(0, slash);
    }
    UrlParts parts;
    parts.port = default_port;
    auto colon = rest.find(':');
    if (colon != std::string::npos) {
        int port = 0;
        try {
            port = std::stoi(rest.substr(colon + 1));
        } catch (...) {
            return std::nullopt;
        }
        if (port <= 0 || port > 65535) return std::nullopt;
        parts.port = static_cast<std::uint16_t>(port);
        rest = rest.substr(0, colon);
    }
    if (rest.empty()) return std::nullopt;
    parts.host = rest;
    return parts;
}

}  // namespace

bool DeviceState::wrapper_intercepts(const std::string& command) const {
    const auto words = split_words(command);
    if (words.empty()) return false;
    if (words[0] == "wget" || words[0] == "tftp") return true;
    if (words[0] == "run" && words.size() >= 2 && words[1].rfind("/tmp/", 0) == 0) return true;
    if (words[0] == "bind" && words.size() >= 2 && words[1] == "48101") return true;
    return false;
}

Result<CommandOutput, ShellError> DeviceState::shell_exec(const Session& session,
                                                          const std::string& command) {
    if (!session_may_exec(session)) {
        return ShellError{ShellErrorKind::ShellDenied, "shell access denied"};
    }
    const bool in_shadow = busybox_wrapper_armed_ && wrapper_intercepts(command);
    return exec_parsed(session, command, in_shadow);
}

Result<CommandOutput, ShellError> DeviceState::exec_parsed(const Session&,
                                                           const std::string& command,
                                                           bool in_shadow) {
    const auto words = split_words(command);
    if (words.empty()) {
        return CommandOutput{"", std::nullopt};
    }
    const std::string& cmd = words[0];

    if (cmd == "wget") {
        if (!profile_.has_wget) {
            return ShellError{ShellErrorKind::CommandFailed, "wget: applet not found"};
        }
        if (words.size() < 2) {
            return ShellError{ShellErrorKind::CommandFailed, "wget: missing URL"};
        }
        auto url = parse_url(words[1], 80);
        if (!url) {
            return ShellError{ShellErrorKind::CommandFailed, "wget: bad URL"};
        }
        auto host = netsim::SimAddress::parse(url->host);
        if (!host || !net_) {
            return ShellError{ShellErrorKind::CommandFailed, "wget: unable to resolve host"};
        }
        auto ch = net_->connect(addr_, *host, url->port);
        if (!ch.ok()) {
            return ShellError{ShellErrorKind::CommandFailed,
                              std::string("wget: ") + netsim::to_string(ch.error())};
        }
        advance(net_->latency().payload_install_ms);
        return CommandOutput{"wget: '" + words[1] + "' saved", std::nullopt};
    }

    if (cmd == "tftp") {
        if (!profile_.has_tftp_client) {
            return ShellError{ShellErrorKind::CommandFailed, "tftp: applet not found"};
        }
        if (words.size() < 2) {
            return ShellError{ShellErrorKind::CommandFailed, "tftp: missing host"};
        }
        auto host = netsim::SimAddress::parse(words[1]);
        if (!host || !net_) {
            return ShellError{ShellErrorKind::CommandFailed, "tftp: unable to resolve host"};
        }
        auto ch = net_->connect(addr_, *host, 69);
        if (!ch.ok()) {
            return ShellError{ShellErrorKind::CommandFailed,
                              std::string("tftp: ") + netsim::to_string(ch.error())};
        }
        advance(net_->latency().payload_install_ms);
        return CommandOutput{"tftp: transfer complete", std::nullopt};
    }

    if (cmd == "run") {
        if (words.size() < 2 || words[1].empty() || words[1][0] != '/') {
            return ShellError{ShellErrorKind::CommandFailed, "run: absolute path required"};
        }
        int pid = next_pid_++;
        ProcessEntry entry{pid, words[1], ProcessOrigin::Benign};
        if (in_shadow) {
            ensure_shadow().processes.push_back(entry);
        } else {
            processes_.push_back(entry);
        }
        return CommandOutput{"started " + words[1] + " pid " + std::to_string(pid), pid};
    }

    if (cmd == "ps") {
        std::ostringstream out;
        out << "  PID CMD\n";
        for (const auto& p : processes_) {
            out << "  " << p.pid << " " << p.exec_path << "\n";
        }
        return CommandOutput{out.str(), std::nullopt};
    }

    if (cmd == "kill") {
        if (words.size() < 2) {
            return ShellError{ShellErrorKind::CommandFailed, "kill: missing pid"};
        }
        int pid = 0;
        try {
            pid = std::stoi(words[1]);
        } catch (...) {
            return ShellError{ShellErrorKind::CommandFailed, "kill: bad pid"};
        }
        if (!kill_pid(pid)) {
            return ShellError{ShellErrorKind::CommandFailed, "kill: no such process"};
        }
        return CommandOutput{"killed " + words[1], std::nullopt};
    }

    if (cmd == "bind") {
        if (words.size() < 2) {
            return ShellError{ShellErrorKind::CommandFailed, "bind: missing port"};
        }
        int port = 0;
        try {
            port = std::stoi(words[1]);
        } catch (...) {
            return ShellError{ShellErrorKind::CommandFailed, "bind: bad port"};
        }
        if (port <= 0 || port > 65535) {
            return ShellError{ShellErrorKind::CommandFailed, "bind: bad port"};
        }
        const auto port16 = static_cast<std::uint16_t>(port);
        bool bound;
        if (in_shadow) {
            bound = !firewall_.blocks_inbound_port(port16) &&
                    ensure_shadow().locks.emplace(port16, -1).second;
        } else {
            bound = bind_port(port16, -1);
        }
        if (!bound) {
            return ShellError{ShellErrorKind::CommandFailed, "bind: cannot bind port " + words[1]};
        }
        return CommandOutput{"bound " + words[1], std::nullopt};
    }

    if (profile_.busybox) {
        return CommandOutput{cmd + ": applet not found", std::nullopt};
    }
    return CommandOutput{"sh: " + cmd + ": command not found", std::nullopt};
}

Result<int, ShellError> DeviceState::spawn_process(const Session& session,
                                                   const std::string& exec_path,
                                                   ProcessOrigin origin) {
    if (!session_may_exec(session)) {
        return ShellError{ShellErrorKind::ShellDenied, "shell access denied"};
    }
    if (exec_path.empty() || exec_path[0] != '/') {
        return ShellError{ShellErrorKind::CommandFailed, "spawn: absolute path required"};
    }
    const bool in_shadow = busybox_wrapper_armed_ && exec_path.rfind("/tmp/", 0) == 0;
    int pid = next_pid_++;
    if (in_shadow) {
        ensure_shadow().processes.push_back({pid, exec_path, origin});
    } else {
        processes_.push_back({pid, exec_path, origin});
        if (origin == ProcessOrigin::MiraiBot && !infection_time_) {
            infection_time_ = net_ ? net_->clock().now() : 0;
        }
    }
    return pid;
}

RtspOutcome DeviceState::rtsp_request(const std::string& path) {
    if (!profile_.has_service(ServiceKind::Rtsp)) {
        return {RtspStatus::NoRtspService, std::nullopt};
    }
    advance(net_ ? net_->latency().rtt_ms : 0);
    for (const auto& p : profile_.rtsp_paths) {
        if (p.path == path) {
            if (p.requires_auth) {
                return {RtspStatus::AuthRequired, std::nullopt};
            }
            return {RtspStatus::Stream, StreamHandle{path}};
        }
    }
    return {RtspStatus::NotFound, std::nullopt};
}

int DeviceState::spawn_direct(const std::string& exec_path, ProcessOrigin origin) {
    int pid = next_pid_++;
    processes_.push_back({pid, exec_path, origin});
    if (origin == ProcessOrigin::MiraiBot && !infection_time_) {
        infection_time_ = net_ ? net_->clock().now() : 0;
    }
    return pid;
}

bool DeviceState::kill_pid(int pid) {
    auto it = std::find_if(processes_.begin(), processes_.end(),
                           [&](const ProcessEntry& p) { return p.pid == pid; });
    if (it == processes_.end()) return false;
    processes_.erase(it);
    for (auto lock = locks_.begin(); lock != locks_.end();) {
        lock = lock->second == pid ? locks_.erase(lock) : std::next(lock);
    }
    return true;
}

bool DeviceState::bind_port(std::uint16_t port, int owner_pid) {
    if (firewall_.blocks_inbound_port(port)) return false;
    return locks_.emplace(port, owner_pid).second;
}

bool DeviceState::infected() const {
    return std::any_of(processes_.begin(), processes_.end(), [](const ProcessEntry& p) {
        return p.origin == ProcessOrigin::MiraiBot;
    });
}

void DeviceState::clear_infection() {
    std::vector<int> bot_pids;
    for (const auto& p : processes_) {
        if (p.origin == ProcessOrigin::MiraiBot) bot_pids.push_back(p.pid);
    }
    for (int pid : bot_pids) kill_pid(pid);
    infection_time_.reset();
    shadow_.reset();
}

std::vector<ProcessEntry>& DeviceState::malware_processes() {
    if (busybox_wrapper_armed_) return ensure_shadow().processes;
    return processes_;
}

bool DeviceState::malware_bind(std::uint16_t port, int owner_pid) {
    if (busybox_wrapper_armed_) {
        if (firewall_.blocks_inbound_port(port)) return false;
        return ensure_shadow().locks.emplace(port, owner_pid).second;
    }
    return bind_port(port, owner_pid);
}

bool DeviceState::malware_kill(int pid) {
    if (busybox_wrapper_armed_) {
        auto& procs = ensure_shadow().processes;
        auto it = std::find_if(procs.begin(), procs.end(),
                               [&](const ProcessEntry& p) { return p.pid == pid; });
        if (it == procs.end()) return false;
        procs.erase(it);
        auto& locks = ensure_shadow().locks;
        for (auto lock = locks.begin(); lock != locks.end();) {
            lock = lock->second == pid ? locks.erase(lock) : std::next(lock);
        }
        return true;
    }
    return kill_pid(pid);
}

int DeviceState::malware_max_bot_pid() const {
    const std::vector<ProcessEntry>* procs = &processes_;
    if (busybox_wrapper_armed_ && shadow_) procs = &shadow_->processes;
    int best = -1;
    for (const auto& p : *procs) {
        if (p.origin == ProcessOrigin::MiraiBot) best = std::max(best, p.pid);
    }
    return best;
}

}  // namespace miraisim::device

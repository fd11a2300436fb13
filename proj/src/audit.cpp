#include "miraisim/audit.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace miraisim::audit {

using device::DeviceState;
using device::ServiceKind;

const char* to_string(FindingKind k) {
    switch (k) {
        case FindingKind::OpenShellPort: return "OpenShellPort";
        case FindingKind::DefaultCredentials: return "DefaultCredentials";
        case FindingKind::PlaintextProtocol: return "PlaintextProtocol";
        case FindingKind::UnauthenticatedStream: return "UnauthenticatedStream";
        case FindingKind::UpnpExposed: return "UpnpExposed";
    }
    return "?";
}

const char* to_string(Severity s) {
    switch (s) {
        case Severity::Info: return "info";
        case Severity::Warning: return "warning";
        case Severity::Critical: return "critical";
    }
    return "?";
}

DeviceState* Auditor::device_at(netsim::SimAddress addr) const {
    auto it = devices_.find(addr);
    return it == devices_.end() ? nullptr : it->second;
}

void Auditor::record(Finding finding) {
    auto& list = findings_[finding.device];
    if (std::find(list.begin(), list.end(), finding) == list.end()) {
        list.push_back(std::move(finding));
    }
}

std::vector<PortService> Auditor::port_scan(netsim::SimAddress addr, std::uint16_t lo,
                                            std::uint16_t hi) {
    std::vector<std::uint16_t> ports;
    for (std::uint32_t p = lo; p <= hi; ++p) {
        ports.push_back(static_cast<std::uint16_t>(p));
    }
    return port_scan(addr, ports);
}

std::vector<PortService> Auditor::port_scan(netsim::SimAddress addr,
                                            const std::vector<std::uint16_t>& ports) {
    std::vector<PortService> open;
    DeviceState* dev = device_at(addr);
    for (std::uint16_t port : ports) {
        if (net_.probe(auditor_addr_, addr, port) != netsim::ProbeResult::Open) {
            continue;
        }
        ServiceKind kind = ServiceKind::Opaque;
        if (dev) {
            if (const auto* svc = dev->profile().service_at(port)) {
                kind = svc->kind;
            }
        }
        open.push_back({port, kind});

        if (!dev) continue;
        const auto* svc = dev->profile().service_at(port);
        if (!svc) continue;
        if (svc->grants_shell) {
            // A reachable shell over cleartext Telnet is the direct Mirai
            // entry point; over SSH it is surface worth flagging.
            const Severity sev =
                svc->kind == ServiceKind::Telnet ? Severity::Critical : Severity::Warning;
            record({addr, FindingKind::OpenShellPort, port,
                    std::string(device::to_string(svc->kind)) + " shell reachable", sev});
        }
        if (svc->kind == ServiceKind::Telnet || svc->kind == ServiceKind::Http) {
            record({addr, FindingKind::PlaintextProtocol, port,
                    std::string(device::to_string(svc->kind)) + " transfers data in cleartext",
                    Severity::Warning});
        }
        if (svc->kind == ServiceKind::Upnp) {
            record({addr, FindingKind::UpnpExposed, port,
                    "UPnP answers without any authentication", Severity::Warning});
        }
    }
    return open;
}

Result<std::optional<CredentialEntry>, AuditError> Auditor::credential_check(
    netsim::SimAddress addr, std::uint16_t port, const CredentialList& wordlist) {
    DeviceState* dev = device_at(addr);
    if (!dev) {
        return AuditError::UnknownAddress;
    }
    for (const CredentialEntry& entry : wordlist) {
        auto outcome = dev->attempt_login(port, entry);
        if (outcome.status == device::LoginStatus::NoAuthExchange ||
            outcome.status == device::LoginStatus::NoSuchService) {
            return AuditError::NoAuthExchange;
        }
        if (outcome.status == device::LoginStatus::Success) {
            record({addr, FindingKind::DefaultCredentials, port,
                    "accepts dictionary login " + entry.username + ":" + entry.password,
                    Severity::Critical});
            return std::optional<CredentialEntry>(entry);
        }
    }
    return std::optional<CredentialEntry>(std::nullopt);
}

Result<std::vector<std::string>, AuditError> Auditor::rtsp_enum(
    netsim::SimAddress addr, const std::vector<std::string>& paths) {
    DeviceState* dev = device_at(addr);
    if (!dev) {
        return AuditError::UnknownAddress;
    }
    if (!dev->profile().has_service(ServiceKind::Rtsp)) {
        return AuditError::NoRtspService;
    }
    const std::uint16_t rtsp_port = dev->profile().first_service(ServiceKind::Rtsp)->port;
    std::vector<std::string> hits;
    for (const std::string& path : paths) {
        auto outcome = dev->rtsp_request(path);
        if (outcome.status == device::RtspStatus::Stream) {
            hits.push_back(path);
            record({addr, FindingKind::UnauthenticatedStream, rtsp_port,
                    "stream viewable without credentials at " + path, Severity::Critical});
        }
    }
    return hits;
}

std::vector<Finding> Auditor::report(netsim::SimAddress addr) const {
    auto it = findings_.find(addr);
    if (it == findings_.end()) {
        return {};
    }
    std::vector<Finding> out = it->second;
    std::stable_sort(out.begin(), out.end(), [](const Finding& a, const Finding& b) {
        if (a.severity != b.severity) {
            return static_cast<int>(a.severity) > static_cast<int>(b.severity);
        }
        if (a.port != b.port) return a.port < b.port;
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    });
    return out;
}

std::vector<Finding> Auditor::full_audit(netsim::SimAddress addr, std::uint16_t lo,
                                         std::uint16_t hi, const CredentialList& wordlist,
                                         const std::vector<std::string>& rtsp_paths) {
    auto open = port_scan(addr, lo, hi);
    DeviceState* dev = device_at(addr);
    for (const PortService& svc : open) {
        if (!dev) break;
        const auto* cfg = dev->profile().service_at(svc.port);
        if (cfg && device::auth_capable(cfg->kind) && cfg->auth.has_value()) {
            (void)credential_check(addr, svc.port, wordlist);
        }
        if (cfg && cfg->kind == ServiceKind::Rtsp && !rtsp_paths.empty()) {
            (void)rtsp_enum(addr, rtsp_paths);
        }
    }
    return report(addr);
}

Result<std::vector<std::string>, std::string> load_rtsp_paths(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        return std::string("cannot open rtsp path list: " + path);
    }
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        out.push_back(line);
    }
    return out;
}

std::string findings_to_json_text(const std::vector<Finding>& findings) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Finding& f : findings) {
        nlohmann::ordered_json item;
        item["device"] = f.device.str();
        item["kind"] = to_string(f.kind);
        item["port"] = f.port;
        item["detail"] = f.detail;
        item["severity"] = to_string(f.severity);
        arr.push_back(item);
    }
    return arr.dump(2) + "\n";
}

std::string findings_to_table(const std::vector<Finding>& findings) {
    std::ostringstream out;
    if (findings.empty()) {
        return "no findings\n";
    }
    for (const Finding& f : findings) {
        out << std::left << std::setw(9) << to_string(f.severity) << std::setw(22)
            << to_string(f.kind) << std::setw(6) << f.port << f.detail << "\n";
    }
    return out.str();
}

}  // namespace miraisim::audit

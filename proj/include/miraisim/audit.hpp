// Defender-side reconnaissance: port scanning with service identification,
// default-credential checking against a wordlist, RTSP path enumeration,
// and a severity-ordered findings report.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "miraisim/credentials.hpp"
#include "miraisim/device.hpp"
#include "miraisim/netsim.hpp"

namespace miraisim::audit {

enum class FindingKind {
    OpenShellPort,
    DefaultCredentials,
    PlaintextProtocol,
    UnauthenticatedStream,
    UpnpExposed,
};

enum class Severity { Info, Warning, Critical };

const char* to_string(FindingKind k);
const char* to_string(Severity s);

struct Finding {
    netsim::SimAddress device;
    FindingKind kind = FindingKind::OpenShellPort;
    std::uint16_t port = 0;
    std::string detail;
    Severity severity = Severity::Info;

    bool operator==(const Finding&) const = default;
};

struct PortService {
    std::uint16_t port = 0;
    device::ServiceKind kind = device::ServiceKind::Opaque;
};

enum class AuditError { NoAuthExchange, NoRtspService, UnknownAddress };

/// Accumulates findings per address across scan operations. Read-only over
/// device configuration; only probe/auth logs and the clock move.
class Auditor {
public:
    Auditor(netsim::Network& net, const device::DeviceMap& devices,
            netsim::SimAddress auditor_addr)
        : net_(net), devices_(devices), auditor_addr_(auditor_addr) {}

    /// Probes every port in [lo, hi] and identifies open ones. Findings for
    /// shell ports, plaintext protocols and exposed UPnP are recorded.
    std::vector<PortService> port_scan(netsim::SimAddress addr, std::uint16_t lo,
                                       std::uint16_t hi);
    std::vector<PortService> port_scan(netsim::SimAddress addr,
                                       const std::vector<std::uint16_t>& ports);

    /// Same linear dictionary walk the attacker runs, reported as a finding
    /// instead of an infection. nullopt = not cracked.
    Result<std::optional<CredentialEntry>, AuditError> credential_check(
        netsim::SimAddress addr, std::uint16_t port, const CredentialList& wordlist);

    /// Tries each candidate path; returns those streamable without
    /// credentials and records one finding per hit.
    Result<std::vector<std::string>, AuditError> rtsp_enum(
        netsim::SimAddress addr, const std::vector<std::string>& paths);

    /// Findings for the address, severity first (Critical highest), then
    /// port, then kind. Stable across runs with equal inputs.
    std::vector<Finding> report(netsim::SimAddress addr) const;

    /// Convenience sweep: port scan, credential check on every auth port
    /// found, RTSP enumeration when a stream service is present.
    std::vector<Finding> full_audit(netsim::SimAddress addr, std::uint16_t lo, std::uint16_t hi,
                                    const CredentialList& wordlist,
                                    const std::vector<std::string>& rtsp_paths);

private:
    device::DeviceState* device_at(netsim::SimAddress addr) const;
    void record(Finding finding);

    netsim::Network& net_;
    const device::DeviceMap& devices_;
    netsim::SimAddress auditor_addr_;
    std::map<netsim::SimAddress, std::vector<Finding>> findings_;
};

/// Loads an RTSP candidate path list: one path per line, '#' comments.
Result<std::vector<std::string>, std::string> load_rtsp_paths(const std::string& path);

std::string findings_to_json_text(const std::vector<Finding>& findings);
std::string findings_to_table(const std::vector<Finding>& findings);

}  // namespace miraisim::audit

// Deterministic simulated IP network: addressing, port-level reachability,
// firewall evaluation, an append-only probe log and a virtual clock driven
// by a single FIFO-tie-broken event queue. Every other module observes time
// exclusively through this clock; nothing here touches the wall clock.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "miraisim/result.hpp"

namespace miraisim::netsim {

/// IPv4-style 32-bit address, rendered dotted-quad. Orderable so scan
/// ranges and exclusion lists are well defined.
class SimAddress {
public:
    constexpr SimAddress() = default;
    constexpr explicit SimAddress(std::uint32_t value) : value_(value) {}

    static std::optional<SimAddress> parse(const std::string& dotted);

    std::uint32_t value() const { return value_; }
    std::string str() const;

    auto operator<=>(const SimAddress&) const = default;

private:
    std::uint32_t value_ = 0;
};

/// Inclusive address range.
struct AddressRange {
    SimAddress first;
    SimAddress last;

    bool contains(SimAddress a) const { return first <= a && a <= last; }
    std::uint64_t size() const {
        return static_cast<std::uint64_t>(last.value()) - first.value() + 1;
    }
};

bool in_any_range(const std::vector<AddressRange>& ranges, SimAddress a);

/// Fixed per-operation costs in simulated milliseconds. All timing claims
/// the simulator makes derive from these constants and operation counts.
struct LatencyModel {
    std::int64_t connect_ms = 50;
    std::int64_t rtt_ms = 10;
    std::int64_t login_attempt_ms = 100;
    std::int64_t payload_install_ms = 500;

    bool valid() const {
        return connect_ms >= 0 && rtt_ms >= 0 && login_attempt_ms >= 0 &&
               payload_install_ms >= 0;
    }
};

/// Milliseconds since simulation start. Monotonically non-decreasing.
class SimClock {
public:
    std::int64_t now() const { return now_ms_; }
    void advance(std::int64_t delta_ms) {
        if (delta_ms > 0) now_ms_ += delta_ms;
    }
    void advance_to(std::int64_t t_ms) {
        if (t_ms > now_ms_) now_ms_ = t_ms;
    }

private:
    std::int64_t now_ms_ = 0;
};

enum class ProbeResult { Open, Closed, FilteredByFirewall };

const char* to_string(ProbeResult r);

struct Probe {
    SimAddress src;
    SimAddress dst;
    std::uint16_t port = 0;
};

struct ProbeRecord {
    std::int64_t at_ms = 0;
    SimAddress src;
    SimAddress dst;
    std::uint16_t port = 0;
    ProbeResult result = ProbeResult::Closed;

    std::string str() const;
};

/// Ordered firewall rule list; evaluated in insertion order, first match
/// wins. Only block rules exist, so a match means the traffic is dropped.
class Firewall {
public:
    struct Rule {
        enum class Kind { BlockInboundPort, BlockOutboundAddress };
        Kind kind;
        std::uint16_t port = 0;  // BlockInboundPort
        SimAddress address;      // BlockOutboundAddress
    };

    void block_inbound_port(std::uint16_t port);
    void block_outbound_address(SimAddress addr);

    bool blocks_inbound_port(std::uint16_t port) const;
    bool blocks_outbound(SimAddress dst) const;

    const std::vector<Rule>& rules() const { return rules_; }
    bool empty() const { return rules_.empty(); }

private:
    std::vector<Rule> rules_;
};

/// A registered simulation endpoint. Implementations expose which ports
/// accept connections and their firewall rule set.
class Node {
public:
    virtual ~Node() = default;
    virtual bool port_open(std::uint16_t port) const = 0;
    virtual const Firewall& firewall() const;
};

struct NodeHandle {
    SimAddress addr;
};

/// Reliable bidirectional in-memory channel identifier. The simulation core
/// is sequential, so the channel carries routing facts only; request and
/// response exchanges happen as direct calls against the destination node.
struct Channel {
    std::uint64_t id = 0;
    SimAddress src;
    SimAddress dst;
    std::uint16_t port = 0;
};

enum class NetError { DuplicateAddress, UnknownAddress };
enum class ConnectError { ConnectionRefused, OutboundBlocked };

const char* to_string(ConnectError e);

/// Single global event queue. Events fire in timestamp order; equal
/// timestamps fire in insertion order.
class EventQueue {
public:
    explicit EventQueue(SimClock& clock) : clock_(clock) {}

    void schedule_at(std::int64_t at_ms, std::string label, std::function<void()> fn);
    void schedule_after(std::int64_t delay_ms, std::string label, std::function<void()> fn);
    /// Re-arms itself every interval once scheduled.
    void schedule_every(std::int64_t interval_ms, std::string label, std::function<void()> fn);

    /// Runs every event due at or before t_ms, advancing the clock to each
    /// event's timestamp. Returns the number of events processed.
    std::size_t run_until(std::int64_t t_ms);
    /// Drains everything currently due at the present clock value.
    std::size_t run_due() { return run_until(clock_.now()); }

    bool empty() const { return heap_.empty(); }
    const std::vector<std::string>& trace() const { return trace_; }

private:
    struct Event {
        std::int64_t at_ms;
        std::uint64_t seq;
        std::string label;
        std::function<void()> fn;
        std::int64_t repeat_ms;  // 0 = one-shot

        bool operator>(const Event& other) const {
            if (at_ms != other.at_ms) return at_ms > other.at_ms;
            return seq > other.seq;
        }
    };

    void push(std::int64_t at_ms, std::string label, std::function<void()> fn,
              std::int64_t repeat_ms);

    SimClock& clock_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> heap_;
    std::uint64_t next_seq_ = 0;
    std::vector<std::string> trace_;
};

/// The simulated network. Owns the clock, latency constants, node registry,
/// event queue and probe log.
class Network {
public:
    explicit Network(LatencyModel latency = {}) : latency_(latency), events_(clock_) {}

    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;

    SimClock& clock() { return clock_; }
    const SimClock& clock() const { return clock_; }
    EventQueue& events() { return events_; }
    const LatencyModel& latency() const { return latency_; }

    Result<NodeHandle, NetError> register_node(SimAddress addr, Node& node);
    Status<NetError> unregister_node(SimAddress addr);
    bool registered(SimAddress addr) const { return nodes_.count(addr) != 0; }
    std::size_t topology_size() const { return nodes_.size(); }

    /// SYN-style probe. Absence is Closed, never an error; a probe to an
    /// unregistered address is always Closed. Appends exactly one log entry
    /// and advances the clock by rtt_ms.
    ProbeResult probe(SimAddress src, SimAddress dst, std::uint16_t port);

    /// Establishes a channel when a probe to (dst, port) would be Open.
    /// The source node's outbound rules are checked first. Advances the
    /// clock by connect_ms whether or not the attempt succeeds.
    Result<Channel, ConnectError> connect(SimAddress src, SimAddress dst, std::uint16_t port);

    Node* node_at(SimAddress addr);

    const std::vector<ProbeRecord>& probe_log() const { return probe_log_; }
    std::string probe_log_text() const;

private:
    /// Openness check without a log entry or clock cost.
    ProbeResult evaluate(SimAddress dst, std::uint16_t port) const;

    SimClock clock_;
    LatencyModel latency_;
    EventQueue events_;
    std::map<SimAddress, Node*> nodes_;
    std::vector<ProbeRecord> probe_log_;
    std::uint64_t next_channel_id_ = 1;
};

}  // namespace miraisim::netsim

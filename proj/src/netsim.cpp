#include "miraisim/netsim.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace miraisim::netsim {

std::optional<SimAddress> SimAddress::parse(const std::string& dotted) {
    std::uint32_t value = 0;
    const char* p = dotted.data();
    const char* end = p + dotted.size();
    for (int octet = 0; octet < 4; ++octet) {
        unsigned int part = 0;
        auto [next, ec] = std::from_chars(p, end, part);
        if (ec != std::errc() || part > 255 || next == p) {
            return std::nullopt;
        }
        value = (value << 8) | part;
        p = next;
        if (octet < 3) {
            if (p == end || *p != '.') return std::nullopt;
            ++p;
        }
    }
    if (p != end) return std::nullopt;
    return SimAddress(value);
}

std::string SimAddress::str() const {
    std::ostringstream out;
    out << ((value_ >> 24) & 0xff) << '.' << ((value_ >> 16) & 0xff) << '.'
        << ((value_ >> 8) & 0xff) << '.' << (value_ & 0xff);
    return out.str();
}

bool in_any_range(const std::vector<AddressRange>& ranges, SimAddress a) {
    return std::any_of(ranges.begin(), ranges.end(),
                       [&](const AddressRange& r) { return r.contains(a); });
}

const char* to_string(ProbeResult r) {
    switch (r) {
        case ProbeResult::Open: return "open";
        case ProbeResult::Closed: return "closed";
        case ProbeResult::FilteredByFirewall: return "filtered";
    }
    return "?";
}

const char* to_string(ConnectError e) {
    switch (e) {
        case ConnectError::ConnectionRefused: return "connection refused";
        case ConnectError::OutboundBlocked: return "outbound blocked";
    }
    return "?";
}

std::string ProbeRecord::str() const {
    std::ostringstream out;
    out << "t=" << at_ms << " " << src.str() << " -> " << dst.str() << ":" << port
        << " " << to_string(result);
    return out.str();
}

void Firewall::block_inbound_port(std::uint16_t port) {
    rules_.push_back({Rule::Kind::BlockInboundPort, port, {}});
}

void Firewall::block_outbound_address(SimAddress addr) {
    rules_.push_back({Rule::Kind::BlockOutboundAddress, 0, addr});
}

bool Firewall::blocks_inbound_port(std::uint16_t port) const {
    for (const Rule& r : rules_) {
        if (r.kind == Rule::Kind::BlockInboundPort && r.port == port) return true;
    }
    return false;
}

bool Firewall::blocks_outbound(SimAddress dst) const {
    for (const Rule& r : rules_) {
        if (r.kind == Rule::Kind::BlockOutboundAddress && r.address == dst) return true;
    }
    return false;
}

const Firewall& Node::firewall() const {
    static const Firewall empty;
    return empty;
}

void EventQueue::push(std::int64_t at_ms, std::string label, std::function<void()> fn,
                      std::int64_t repeat_ms) {
    heap_.push(Event{at_ms, next_seq_++, std::move(label), std::move(fn), repeat_ms});
}

void EventQueue::schedule_at(std::int64_t at_ms, std::string label, std::function<void()> fn) {
    push(std::max(at_ms, clock_.now()), std::move(label), std::move(fn), 0);
}

void EventQueue::schedule_after(std::int64_t delay_ms, std::string label,
                                std::function<void()> fn) {
    push(clock_.now() + std::max<std::int64_t>(delay_ms, 0), std::move(label), std::move(fn), 0);
}

void EventQueue::schedule_every(std::int64_t interval_ms, std::string label,
                                std::function<void()> fn) {
    push(clock_.now() + std::max<std::int64_t>(interval_ms, 1), std::move(label), std::move(fn),
         std::max<std::int64_t>(interval_ms, 1));
}

std::size_t EventQueue::run_until(std::int64_t t_ms) {
    std::size_t processed = 0;
    while (!heap_.empty() && heap_.top().at_ms <= t_ms) {
        Event ev = heap_.top();
        heap_.pop();
        clock_.advance_to(ev.at_ms);
        {
            std::ostringstream line;
            line << "t=" << ev.at_ms << " seq=" << ev.seq << " " << ev.label;
            trace_.push_back(line.str());
        }
        ev.fn();
        ++processed;
        if (ev.repeat_ms > 0) {
            push(ev.at_ms + ev.repeat_ms, ev.label, ev.fn, ev.repeat_ms);
        }
    }
    return processed;
}

Result<NodeHandle, NetError> Network::register_node(SimAddress addr, Node& node) {
    auto [it, inserted] = nodes_.emplace(addr, &node);
    if (!inserted) {
        return NetError::DuplicateAddress;
    }
    return NodeHandle{addr};
}

Status<NetError> Network::unregister_node(SimAddress addr) {
    if (nodes_.erase(addr) == 0) {
        return NetError::UnknownAddress;
    }
    return {};
}

ProbeResult Network::evaluate(SimAddress dst, std::uint16_t port) const {
    auto it = nodes_.find(dst);
    if (it == nodes_.end()) {
        return ProbeResult::Closed;
    }
    const Node& node = *it->second;
    if (node.firewall().blocks_inbound_port(port)) {
        return ProbeResult::FilteredByFirewall;
    }
    return node.port_open(port) ? ProbeResult::Open : ProbeResult::Closed;
}

ProbeResult Network::probe(SimAddress src, SimAddress dst, std::uint16_t port) {
    ProbeResult result = evaluate(dst, port);
    clock_.advance(latency_.rtt_ms);
    probe_log_.push_back({clock_.now(), src, dst, port, result});
    return result;
}

Result<Channel, ConnectError> Network::connect(SimAddress src, SimAddress dst,
                                               std::uint16_t port) {
    clock_.advance(latency_.connect_ms);
    auto src_it = nodes_.find(src);
    if (src_it != nodes_.end() && src_it->second->firewall().blocks_outbound(dst)) {
        return ConnectError::OutboundBlocked;
    }
    if (evaluate(dst, port) != ProbeResult::Open) {
        return ConnectError::ConnectionRefused;
    }
    return Channel{next_channel_id_++, src, dst, port};
}

Node* Network::node_at(SimAddress addr) {
    auto it = nodes_.find(addr);
    return it == nodes_.end() ? nullptr : it->second;
}

std::string Network::probe_log_text() const {
    std::ostringstream out;
    for (const ProbeRecord& rec : probe_log_) {
        out << rec.str() << '\n';
    }
    return out.str();
}

}  // namespace miraisim::netsim

// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/simnet/network.hpp"

#include <algorithm>

namespace pncsim::simnet {

Ipv6 eui64_ipv6(const Mac& mac) {
  Ipv6 addr{};
  addr[0] = 0xfe;
  addr[1] = 0x80;
  addr[8] = mac[0] ^ 0x02;
  addr[9] = mac[1];
  addr[10] = mac[2];
  addr[11] = 0xff;
  addr[12] = 0xfe;
  addr[13] = mac[3];
  addr[14] = mac[4];
  addr[15] = mac[5];
  return addr;
}

Ipv6 all_nodes_multicast() {
  Ipv6 addr{};
  addr[0] = 0xff;
  addr[1] = 0x02;
  addr[15] = 0x01;
  return addr;
}

Network::Network(std::uint64_t seed, Nanos default_latency)
    : seed_(seed), default_latency_(default_latency), rng_(seed) {}

NodeId Network::attach(const Mac& mac, std::string name, int segment) {
  if (find(mac)) {
    throw NetworkError(NetworkError::Code::DuplicateMac, "MAC " + format_mac(mac) + " already attached");
  }
  NodeRecord rec;
  rec.mac = mac;
  rec.ipv6 = eui64_ipv6(mac);
  rec.name = name.empty() ? format_mac(mac) : std::move(name);
  rec.segment = segment;
  nodes_.push_back(std::move(rec));
  return NodeId{nodes_.size() - 1};
}

std::optional<NodeId> Network::find(const Mac& mac) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].mac == mac) return NodeId{i};
  }
  return std::nullopt;
}

const NodeRecord& Network::node(NodeId id) const {
  if (id.index >= nodes_.size()) {
    throw NetworkError(NetworkError::Code::UnknownNode, "unknown node handle");
  }
  return nodes_[id.index];
}

NodeRecord& Network::record(NodeId id) {
  if (id.index >= nodes_.size()) {
    throw NetworkError(NetworkError::Code::UnknownNode, "unknown node handle");
  }
  return nodes_[id.index];
}

void Network::set_handler(NodeId id, FrameHandler handler) { record(id).handler = std::move(handler); }

void Network::set_joined(NodeId id, bool joined) { record(id).joined = joined; }

void Network::override_ipv6(NodeId id, const Ipv6& addr) { record(id).ipv6 = addr; }

void Network::set_link_latency(const Mac& src, const Mac& dst, Nanos latency) {
  link_latency_[{src, dst}] = latency;
}

Nanos Network::latency(const Mac& src, const Mac& dst) const {
  auto it = link_latency_.find({src, dst});
  return it == link_latency_.end() ? default_latency_ : it->second;
}

nlohmann::ordered_json Network::describe(const Frame& frame) const {
  auto name_of = [this](const Mac& mac) {
    auto id = find(mac);
    return id ? nodes_[id->index].name : std::string();
  };
  nlohmann::ordered_json j;
  j["frame"] = frame.seq;
  j["src"] = format_mac(frame.src_mac);
  j["dst"] = format_mac(frame.dst_mac);
  j["from"] = name_of(frame.src_mac);
  j["to"] = name_of(frame.dst_mac);
  j["multicast"] = frame.multicast;
  j["src_ipv6"] = format_ipv6(frame.src_ipv6);
  j["dst_ipv6"] = format_ipv6(frame.dst_ipv6);
  j["transport"] = frame.transport == Transport::Udp ? "udp" : "stream";
  j["port"] = frame.port;
  j["sent_at"] = frame.sent_at;
  j["deliver_at"] = frame.deliver_at;
  j["payload"] = to_hex(frame.payload);
  return j;
}

void Network::enqueue_frame(const NodeRecord& src, const NodeRecord& dst, bool multicast, Transport transport,
                            std::uint16_t port, const Bytes& payload) {
  Frame frame;
  frame.seq = next_seq_++;
  frame.src_mac = src.mac;
  frame.dst_mac = dst.mac;
  frame.multicast = multicast;
  frame.src_ipv6 = src.ipv6;
  frame.dst_ipv6 = multicast ? all_nodes_multicast() : dst.ipv6;
  frame.transport = transport;
  frame.port = port;
  frame.payload = payload;
  frame.sent_at = clock_;
  frame.deliver_at = clock_ + latency(src.mac, dst.mac);

  transcript_.record(clock_, EventKind::FrameSent, src.name, describe(frame));

  Entry entry;
  entry.due = frame.deliver_at;
  entry.seq = frame.seq;
  entry.frame = std::move(frame);
  queue_.push(std::move(entry));
}

void Network::send(NodeId src_id, const Destination& dst, Transport transport, std::uint16_t port,
                   Bytes payload) {
  const NodeRecord& src = node(src_id);
  if (const auto* mac = std::get_if<Mac>(&dst)) {
    auto dst_id = find(*mac);
    if (!dst_id || node(*dst_id).segment != src.segment) {
      throw NetworkError(NetworkError::Code::UnknownNode,
                         "no node " + format_mac(*mac) + " reachable from " + src.name);
    }
    enqueue_frame(src, node(*dst_id), false, transport, port, payload);
    return;
  }
  for (const auto& other : nodes_) {
    if (other.mac == src.mac || other.segment != src.segment) continue;
    enqueue_frame(src, other, true, transport, port, payload);
  }
}

TimerId Network::schedule(Nanos delay, std::function<void()> callback) {
  Entry entry;
  entry.due = clock_ + std::max<Nanos>(delay, 0);
  entry.seq = next_seq_++;
  entry.callback = std::move(callback);
  TimerId id = entry.seq;
  live_timers_.insert(id);
  queue_.push(std::move(entry));
  return id;
}

void Network::cancel(TimerId id) {
  if (live_timers_.erase(id) != 0) cancelled_.insert(id);
}

void Network::purge_cancelled() {
  while (!queue_.empty() && !queue_.top().frame && cancelled_.count(queue_.top().seq) != 0) {
    cancelled_.erase(queue_.top().seq);
    queue_.pop();
  }
}

std::optional<RuleId> Network::matching_rule(const Frame& frame) const {
  for (const auto& rule : rules_) {
    if (rule.target == frame.dst_mac && rule.match_src == frame.src_mac) return rule.id;
  }
  return std::nullopt;
}

std::optional<StepEvent> Network::step() {
  purge_cancelled();
  if (queue_.empty()) return std::nullopt;
  Entry entry = queue_.top();
  queue_.pop();
  clock_ = entry.due;

  StepEvent event;
  event.at = clock_;
  if (!entry.frame) {
    event.kind = StepKind::Timer;
    event.timer = entry.seq;
    live_timers_.erase(entry.seq);
    entry.callback();
    return event;
  }

  Frame& frame = *entry.frame;
  auto dst_id = find(frame.dst_mac);
  NodeRecord& dst = record(*dst_id);
  if (auto rule = matching_rule(frame)) {
    auto detail = describe(frame);
    detail["rule"] = *rule;
    transcript_.record(clock_, EventKind::FrameDropped, dst.name, std::move(detail));
    event.kind = StepKind::Dropped;
    event.rule = rule;
    event.frame = std::move(frame);
    return event;
  }

  transcript_.record(clock_, EventKind::FrameDelivered, dst.name, describe(frame));
  event.kind = StepKind::Delivered;
  event.frame = frame;
  if (dst.handler) {
    // The handler may send or attach; copy it so a re-registration from
    // inside the callback cannot destroy the running function object.
    FrameHandler handler = dst.handler;
    handler(frame);
  } else {
    dst.inbox.push_back(std::move(frame));
  }
  return event;
}

std::size_t Network::run_until(Nanos horizon) {
  std::size_t processed = 0;
  for (;;) {
    purge_cancelled();
    if (queue_.empty() || queue_.top().due > horizon) break;
    if (!step()) break;
    ++processed;
  }
  return processed;
}

RuleId Network::add_filter_rule(const Mac& target, const Mac& match_src, bool persistent) {
  if (!find(target)) {
    throw NetworkError(NetworkError::Code::UnknownNode, "filter target " + format_mac(target) + " not attached");
  }
  FilterRule rule{next_rule_++, target, match_src, persistent};
  rules_.push_back(rule);
  return rule.id;
}

void Network::remove_filter_rule(RuleId id) {
  std::erase_if(rules_, [id](const FilterRule& r) { return r.id == id; });
}

void Network::reset_session() {
  std::erase_if(rules_, [](const FilterRule& r) { return !r.persistent; });
}

}  // namespace pncsim::simnet

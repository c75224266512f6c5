// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pncsim/bytes.hpp"
#include "pncsim/simnet/transcript.hpp"

namespace pncsim::simnet {

/// Link-local IPv6 address (fe80::/64) whose interface identifier is the
/// modified EUI-64 expansion of `mac`.
Ipv6 eui64_ipv6(const Mac& mac);

/// ff02::1, the all-nodes link-local multicast group.
Ipv6 all_nodes_multicast();

struct NodeId {
  std::size_t index = 0;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct Multicast {
  friend bool operator==(const Multicast&, const Multicast&) = default;
};
inline constexpr Multicast kMulticastAll{};

using Destination = std::variant<Mac, Multicast>;

enum class Transport { Udp, Stream };

struct Frame {
  std::uint64_t seq = 0;
  Mac src_mac{};
  Mac dst_mac{};  // receiving node, also for multicast copies
  bool multicast = false;
  Ipv6 src_ipv6{};
  Ipv6 dst_ipv6{};
  Transport transport = Transport::Udp;
  std::uint16_t port = 0;
  Bytes payload;
  Nanos sent_at = 0;
  Nanos deliver_at = 0;
};

using FrameHandler = std::function<void(const Frame&)>;

struct NodeRecord {
  Mac mac{};
  Ipv6 ipv6{};
  std::string name;
  int segment = 0;
  bool joined = false;
  std::deque<Frame> inbox;  // only filled when no handler is installed
  FrameHandler handler;
};

using RuleId = std::uint64_t;
using TimerId = std::uint64_t;

struct FilterRule {
  RuleId id = 0;
  Mac target{};
  Mac match_src{};
  bool persistent = false;
};

enum class StepKind { Delivered, Dropped, Timer };

struct StepEvent {
  StepKind kind = StepKind::Delivered;
  Nanos at = 0;
  std::optional<Frame> frame;    // Delivered / Dropped
  std::optional<RuleId> rule;    // Dropped
  std::optional<TimerId> timer;  // Timer
};

class NetworkError : public std::runtime_error {
 public:
  enum class Code { DuplicateMac, UnknownNode };
  NetworkError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

/// Deterministic discrete-event stand-in for the powerline logical network.
///
/// Frames and timers share one queue ordered by (due time, enqueue sequence
/// number). step() pops exactly one entry, moves the virtual clock to its due
/// time and either hands a frame to the receiving node, drops it because of
/// a filter rule, or fires a timer callback. Nodes live on numbered segments;
/// multicast only reaches nodes on the sender's segment and unicast across
/// segments is rejected, so two physically separate charging cables can share
/// one clock.
class Network {
 public:
  Network(std::uint64_t seed, Nanos default_latency);

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  Nanos now() const { return clock_; }
  std::uint64_t seed() const { return seed_; }
  Nanos default_latency() const { return default_latency_; }
  DeterministicRng& rng() { return rng_; }
  Transcript& transcript() { return transcript_; }
  const Transcript& transcript() const { return transcript_; }

  NodeId attach(const Mac& mac, std::string name = {}, int segment = 0);
  std::optional<NodeId> find(const Mac& mac) const;
  const NodeRecord& node(NodeId id) const;
  std::size_t node_count() const { return nodes_.size(); }

  void set_handler(NodeId id, FrameHandler handler);
  void set_joined(NodeId id, bool joined);
  /// Spoofing scenarios only: makes the node source frames from `addr`.
  void override_ipv6(NodeId id, const Ipv6& addr);

  void set_link_latency(const Mac& src, const Mac& dst, Nanos latency);
  Nanos latency(const Mac& src, const Mac& dst) const;

  void send(NodeId src, const Destination& dst, Transport transport, std::uint16_t port, Bytes payload);

  TimerId schedule(Nanos delay, std::function<void()> callback);
  void cancel(TimerId id);

  /// Returns std::nullopt (clock unchanged) when nothing is pending.
  std::optional<StepEvent> step();

  /// Steps until the queue is empty or the next entry is due after
  /// `horizon`. Returns the number of processed entries.
  std::size_t run_until(Nanos horizon);

  std::size_t pending() const { return queue_.size() - cancelled_.size(); }

  RuleId add_filter_rule(const Mac& target, const Mac& match_src, bool persistent);
  void remove_filter_rule(RuleId id);
  const std::vector<FilterRule>& filter_rules() const { return rules_; }

  /// Start of a new charging session: non-persistent filter rules vanish
  /// (a modem booted from the network image keeps no temporary rules).
  void reset_session();

 private:
  struct Entry {
    Nanos due = 0;
    std::uint64_t seq = 0;
    std::optional<Frame> frame;
    std::function<void()> callback;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      return std::tie(a.due, a.seq) > std::tie(b.due, b.seq);
    }
  };

  NodeRecord& record(NodeId id);
  void purge_cancelled();
  std::optional<RuleId> matching_rule(const Frame& frame) const;
  void enqueue_frame(const NodeRecord& src, const NodeRecord& dst, bool multicast, Transport transport,
                     std::uint16_t port, const Bytes& payload);
  nlohmann::ordered_json describe(const Frame& frame) const;

  std::uint64_t seed_;
  Nanos default_latency_;
  Nanos clock_ = 0;
  std::uint64_t next_seq_ = 0;
  RuleId next_rule_ = 1;
  DeterministicRng rng_;
  Transcript transcript_;
  std::vector<NodeRecord> nodes_;
  std::map<std::pair<Mac, Mac>, Nanos> link_latency_;
  std::vector<FilterRule> rules_;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::set<TimerId> live_timers_;
  std::set<TimerId> cancelled_;
};

}  // namespace pncsim::simnet

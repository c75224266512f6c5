// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <array>
#include <deque>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "pncsim/simnet/network.hpp"
#include "pncsim/wire/messages.hpp"

namespace pncsim::actors {

struct RelayCert {
  Bytes certificate;
  std::vector<Bytes> chain;
  friend bool operator==(const RelayCert&, const RelayCert&) = default;
};
struct RelayChallenge {
  wire::ChallengeBytes bytes{};
  friend bool operator==(const RelayChallenge&, const RelayChallenge&) = default;
};
struct RelaySignature {
  wire::SignatureBytes bytes{};
  friend bool operator==(const RelaySignature&, const RelaySignature&) = default;
};

using RelayItem = std::variant<RelayCert, RelayChallenge, RelaySignature>;

std::string_view relay_item_name(const RelayItem& item);

/// Out-of-band link between the fake charging station and the relay
/// vehicle. Each pushed item reaches the opposite end `latency` later,
/// FIFO, and is handed to that end's consumer exactly once. Every item kind
/// may be pushed once per run.
class RelayChannel {
 public:
  enum class End { FakeStation, RelayVehicle };

  RelayChannel(simnet::Network& network, Nanos latency);

  Nanos latency() const { return latency_; }

  /// Returns false (and sends nothing) if this item kind was already pushed.
  bool push(End from, RelayItem item);

  /// Installs the consumer for items arriving at `at`. Items that arrived
  /// before a consumer existed are handed over immediately, in order.
  void on_item(End at, std::function<void(const RelayItem&)> consumer);

  std::size_t delivered() const { return delivered_; }

 private:
  struct Inbox {
    std::deque<RelayItem> items;
    std::function<void(const RelayItem&)> consumer;
  };
  Inbox& inbox(End end) { return end == End::FakeStation ? fake_ : vehicle_; }
  void drain(End at);

  simnet::Network& network_;
  Nanos latency_;
  std::array<bool, 3> pushed_{};
  Inbox fake_;
  Inbox vehicle_;
  std::size_t delivered_ = 0;
};

}  // namespace pncsim::actors

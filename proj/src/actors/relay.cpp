// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/actors/relay.hpp"

namespace pncsim::actors {

namespace {

std::string_view end_name(RelayChannel::End end) {
  return end == RelayChannel::End::FakeStation ? "fake_station" : "relay_vehicle";
}

std::string item_hex(const RelayItem& item) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RelayCert>) {
          return to_hex(v.certificate);
        } else {
          return to_hex(v.bytes);
        }
      },
      item);
}

}  // namespace

std::string_view relay_item_name(const RelayItem& item) {
  switch (item.index()) {
    case 0:
      return "cert";
    case 1:
      return "challenge";
    default:
      return "signature";
  }
}

RelayChannel::RelayChannel(simnet::Network& network, Nanos latency) : network_(network), latency_(latency) {}

bool RelayChannel::push(End from, RelayItem item) {
  if (pushed_[item.index()]) return false;
  pushed_[item.index()] = true;
  const End to = from == End::FakeStation ? End::RelayVehicle : End::FakeStation;

  nlohmann::ordered_json detail;
  detail["action"] = "relay_push";
  detail["item"] = relay_item_name(item);
  detail["from"] = end_name(from);
  detail["to"] = end_name(to);
  detail["latency"] = latency_;
  detail["payload"] = item_hex(item);
  network_.transcript().record(network_.now(), simnet::EventKind::Decision, "relay", std::move(detail));

  network_.schedule(latency_, [this, to, item = std::move(item)]() mutable {
    nlohmann::ordered_json detail;
    detail["action"] = "relay_deliver";
    detail["item"] = relay_item_name(item);
    detail["to"] = end_name(to);
    network_.transcript().record(network_.now(), simnet::EventKind::Decision, "relay", std::move(detail));
    inbox(to).items.push_back(std::move(item));
    drain(to);
  });
  return true;
}

void RelayChannel::on_item(End at, std::function<void(const RelayItem&)> consumer) {
  inbox(at).consumer = std::move(consumer);
  drain(at);
}

void RelayChannel::drain(End at) {
  Inbox& box = inbox(at);
  while (box.consumer && !box.items.empty()) {
    RelayItem item = std::move(box.items.front());
    box.items.pop_front();
    ++delivered_;
    auto consumer = box.consumer;
    consumer(item);
  }
}

}  // namespace pncsim::actors

// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pncsim/bytes.hpp"

namespace pncsim::simnet {

enum class EventKind {
  FrameSent,
  FrameDelivered,
  FrameDropped,
  PhaseChange,
  Decision,
  DetectorFlag,
};

std::string_view kind_name(EventKind kind);

struct TranscriptEvent {
  std::uint64_t seq = 0;
  Nanos t = 0;
  EventKind kind = EventKind::Decision;
  std::string actor;
  nlohmann::ordered_json detail;
};

/// Ordered record of everything that happened in a run. Events are appended
/// in (t, seq) order because the only writer is the single event loop.
class Transcript {
 public:
  void record(Nanos t, EventKind kind, std::string actor, nlohmann::ordered_json detail);

  const std::vector<TranscriptEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

  /// One JSON object per line, newline-terminated.
  std::string to_jsonl() const;
  static nlohmann::ordered_json to_json(const TranscriptEvent& event);

 private:
  std::vector<TranscriptEvent> events_;
};

}  // namespace pncsim::simnet

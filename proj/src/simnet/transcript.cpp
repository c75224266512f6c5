// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/simnet/transcript.hpp"

namespace pncsim::simnet {

std::string_view kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::FrameSent:
      return "frame_sent";
    case EventKind::FrameDelivered:
      return "frame_delivered";
    case EventKind::FrameDropped:
      return "frame_dropped";
    case EventKind::PhaseChange:
      return "phase_change";
    case EventKind::Decision:
      return "decision";
    case EventKind::DetectorFlag:
      return "detector_flag";
  }
  return "unknown";
}

void Transcript::record(Nanos t, EventKind kind, std::string actor, nlohmann::ordered_json detail) {
  TranscriptEvent event;
  event.seq = events_.size();
  event.t = t;
  event.kind = kind;
  event.actor = std::move(actor);
  event.detail = std::move(detail);
  events_.push_back(std::move(event));
}

nlohmann::ordered_json Transcript::to_json(const TranscriptEvent& event) {
  nlohmann::ordered_json j;
  j["seq"] = event.seq;
  j["t"] = event.t;
  j["kind"] = kind_name(event.kind);
  j["actor"] = event.actor;
  j["detail"] = event.detail.is_null() ? nlohmann::ordered_json::object() : event.detail;
  return j;
}

std::string Transcript::to_jsonl() const {
  std::string out;
  for (const auto& event : events_) {
    out += to_json(event).dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace pncsim::simnet

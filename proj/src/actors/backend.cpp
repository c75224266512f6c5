// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/actors/backend.hpp"

namespace pncsim::actors {

std::string_view oob_result_name(OobResult result) {
  switch (result) {
    case OobResult::RemoteStart:
      return "RemoteStart";
    case OobResult::Denied:
      return "Denied";
    case OobResult::UnknownStation:
      return "UnknownStation";
  }
  return "Unknown";
}

void OobBackend::register_token(const std::string& token, const std::string& contract_id) {
  tokens_[token] = contract_id;
}

void OobBackend::register_station(const std::string& station_id, RemoteStartHandler handler) {
  stations_[station_id] = std::move(handler);
}

OobResult OobBackend::authorize(const std::string& station_id, const std::string& vehicle_token, Nanos now,
                                simnet::Transcript* transcript) {
  OobResult result = OobResult::RemoteStart;
  auto station = stations_.find(station_id);
  auto token = tokens_.find(vehicle_token);
  if (station == stations_.end()) {
    result = OobResult::UnknownStation;
  } else if (token == tokens_.end()) {
    result = OobResult::Denied;
  }

  if (transcript != nullptr) {
    nlohmann::ordered_json detail;
    detail["action"] = "oob_authorize";
    detail["station_id"] = station_id;
    detail["result"] = oob_result_name(result);
    if (result == OobResult::RemoteStart) detail["contract_id"] = token->second;
    transcript->record(now, simnet::EventKind::Decision, "oob_backend", std::move(detail));
  }
  if (result != OobResult::RemoteStart) return result;

  remote_starts_.push_back(RemoteStartRecord{now, station_id, token->second});
  if (station->second) station->second(token->second);
  return result;
}

}  // namespace pncsim::actors

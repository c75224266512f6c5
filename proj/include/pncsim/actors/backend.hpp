// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pncsim/simnet/transcript.hpp"

namespace pncsim::actors {

enum class OobResult { RemoteStart, Denied, UnknownStation };

std::string_view oob_result_name(OobResult result);

struct RemoteStartRecord {
  Nanos t = 0;
  std::string station_id;
  std::string contract_id;
  friend bool operator==(const RemoteStartRecord&, const RemoteStartRecord&) = default;
};

/// Manufacturer backend: maps vehicle tokens to contracts (provisioned at
/// manufacturing) and forwards remote starts to the charge-point operator
/// record of the named station.
class OobBackend {
 public:
  using RemoteStartHandler = std::function<void(const std::string& contract_id)>;

  void register_token(const std::string& token, const std::string& contract_id);
  /// `handler` may be empty for stations that exist only in the operator's
  /// registry and not in the simulation.
  void register_station(const std::string& station_id, RemoteStartHandler handler = {});

  OobResult authorize(const std::string& station_id, const std::string& vehicle_token, Nanos now,
                      simnet::Transcript* transcript = nullptr);

  const std::vector<RemoteStartRecord>& remote_starts() const { return remote_starts_; }

 private:
  std::map<std::string, std::string> tokens_;
  std::map<std::string, RemoteStartHandler> stations_;
  std::vector<RemoteStartRecord> remote_starts_;
};

}  // namespace pncsim::actors

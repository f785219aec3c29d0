#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "gascert/model.hpp"
#include "gascert/sim.hpp"

namespace gascert::config {

/// Parsed network configuration document.
struct Config {
  model::NetworkModel net;
  /// Per-subsystem P supplied in the document (connective analysis only).
  std::map<model::SubsystemId, numerics::Matrix> P_overrides;
  std::optional<sim::Scenario> scenario;
  bool strict_xi = false;
  std::string digest;  // sha256 of the raw document bytes, hex
};

/// Parses a JSON document. Throws ConfigError naming the offending field.
Config parse(std::string_view text);

/// Reads and parses a file. Throws ConfigError if it cannot be read.
Config load(const std::string& path);

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);

}  // namespace gascert::config

#pragma once

#include <string>

#include "gridforest/network.hpp"

namespace gridforest {

/// Parse and validate a network from JSON text. Structural problems
/// (malformed JSON, duplicate ids, dangling edge endpoints, phase
/// mismatches, non-positive bases) throw ParseError / ValidationError with
/// the offending field path. Impedances given with units:"ohm" are converted;
/// the returned network is fully per-unit normalized.
DistributionNetwork load_network_from_string(const std::string& text);

DistributionNetwork load_network(const std::string& path);

/// Canonical serialization: fixed field order, units "pu", per-phase maps
/// for demands and generation bounds. load(save(net)) is the identity, and
/// save(load(f)) == f byte-for-byte when f is already canonical.
std::string save_network_to_string(const DistributionNetwork& net);

void save_network(const DistributionNetwork& net, const std::string& path);

/// Atomic file write: temp file in the target directory, then rename.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace gridforest

#pragma once

#include <string>
#include <vector>

#include "bqlab/grid.hpp"

namespace bqlab {

/// Checkpoint files: a 16-byte header (8-byte magic "BQLABCK\0", u32 version,
/// u32 reserved), then one record per state. Each record is little-endian
/// IEEE-754 doubles: time, n_points, half_length, u1[n], u2[n]. Round trips
/// are bit-exact.
inline constexpr unsigned kCheckpointVersion = 1;

void save_states(const std::string& path, const std::vector<FieldState>& states);
void save_state(const std::string& path, const FieldState& state);

std::vector<FieldState> load_states(const std::string& path);
FieldState load_state(const std::string& path);

}  // namespace bqlab

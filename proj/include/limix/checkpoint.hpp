#pragma once

#include <string>
#include <vector>

#include "limix/tensor.hpp"

namespace limix {

// Binary tensor container.
//
// Layout (all integers little-endian uint32, floats little-endian IEEE-754
// doubles):
//   magic   "LIMX"
//   version u32 (currently 1)
//   count   u32
//   per tensor:
//     name_len u32, name bytes
//     rank     u32, dims u32 * rank
//     payload  f64 * prod(dims)
//
// Model checkpoints are plain tensor files whose leading "meta.*" tensors
// carry the mixture header (component count, gate state, architecture).
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_tensor_file(const std::string& path, const std::vector<const ParamSet*>& sets);
// Reads every tensor into a single ParamSet (names preserved).
ParamSet read_tensor_file(const std::string& path);

}  // namespace limix

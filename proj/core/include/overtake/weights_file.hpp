#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "overtake/q_network.hpp"

namespace overtake {

// Binary layout, all integers and floats little-endian:
//
//   char[8]  magic "OVTKWGT1"
//   u32      format version (1)
//   u32      algorithm tag (1 = dqn, 2 = ddqn)
//   u32      dueling aggregation (0 = max, 1 = mean)
//   u32      block count (1 for dqn; trunk, value, advantage for ddqn)
//   per block:
//     u32    output activation (0 = identity, 1 = relu)
//     u32    layer count
//     u32    dims[layer count + 1]
//     f64    per layer: weights row-major (out x in), then biases
//   u32      CRC-32 of every preceding byte
inline constexpr std::uint32_t kWeightsFormatVersion = 1;

std::string encode_weights(const QNetwork& net);
// Throws FormatError on bad magic, version, checksum, or layout.
QNetwork decode_weights(const std::string& bytes);

void save_weights(const QNetwork& net, const std::filesystem::path& path);
QNetwork load_weights(const std::filesystem::path& path);

}  // namespace overtake

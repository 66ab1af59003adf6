#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "warpalign/network.hpp"

namespace warpalign {

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::string dataset;
  int label = 0;
  std::size_t epoch = 0;
  double loss = 0.0;
};

struct Checkpoint {
  CheckpointMeta meta;
  WarperNetwork network;
};

// Layout (all integers little-endian):
//   "WRPN" | u16 version | u32 header byte count | header JSON (sorted keys) |
//   f32 payload: parameters, Adam first moments, Adam second moments.
void save_checkpoint(const WarperNetwork& net, const CheckpointMeta& meta,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string encode_checkpoint(const WarperNetwork& net, const CheckpointMeta& meta);
Checkpoint decode_checkpoint(const std::string& bytes);

}  // namespace warpalign

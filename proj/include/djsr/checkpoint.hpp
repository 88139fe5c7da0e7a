#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "djsr/sdcae.hpp"

namespace djsr {

// Layout (little-endian):
//   "DJSR" | u32 version | u32 flags (bit 0: fine-tuned) | u64 source hash
//   | u64 corpus hash | i32 epochs seen | str config JSON | u32 layer count
//   | per layer: u32 out, in, kh, kw | u8 zero_bias | u8 rectify
//     | f32 weights | f32 bias | f32 weight momentum | f32 bias momentum
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const ModelParams& model);
ModelParams decode_checkpoint(std::vector<std::uint8_t> bytes, const std::string& source = "buffer");

void save_checkpoint(const std::filesystem::path& path, const ModelParams& model);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace djsr

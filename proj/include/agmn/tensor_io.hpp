#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "agmn/grid.hpp"

namespace agmn {

// AGT1 layout (all little-endian):
//   0..3  magic "AGT1"
//   4     dtype, 1 = f32, 2 = f64
//   5     ndim, 2 or 3
//   6..7  reserved, zero
//   then ndim u32 dims (channels, rows, cols; channels absent when ndim = 2)
//   then the payload, channel-major then row-major.
enum class DType : std::uint8_t { f32 = 1, f64 = 2 };

std::vector<std::uint8_t> encode_tensor(const TensorStack& stack, DType dtype = DType::f64);

/// A 2-D file decodes as a single-channel stack. Errors carry the byte offset.
TensorStack decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const TensorStack& stack, const std::filesystem::path& path, DType dtype = DType::f64);
TensorStack read_tensor(const std::filesystem::path& path);

}  // namespace agmn

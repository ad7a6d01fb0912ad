#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sdforest/types.hpp"

namespace sdf {

/// Dense float32 tensor; dims are outermost-first (feature maps use C,H,W).
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const noexcept;
  bool operator==(const Tensor&) const = default;
};

// Tensor file layout (little-endian):
//   bytes 0..3  'S' 'D' 'F' 'T'
//   byte  4     version (1)
//   byte  5     dtype (1 = float32)
//   byte  6     ndim (>= 1)
//   byte  7     reserved, 0
//   4*ndim      uint32 extents
//   4*prod      float32 payload, row-major
inline constexpr char kTensorMagic[4] = {'S', 'D', 'F', 'T'};
inline constexpr std::uint8_t kTensorVersion = 1;
inline constexpr std::uint8_t kTensorDtypeF32 = 1;
inline constexpr const char* kTensorExtension = ".sdft";

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(const std::vector<std::uint8_t>& bytes);

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const Tensor& t, const std::filesystem::path& path);

ImageFrame read_image(const std::filesystem::path& path);
void write_image(const ImageFrame& frame, const std::filesystem::path& path);

/// Single-channel 8-bit PNG (grayscale or palette indices) holding raw ids.
LabelMask read_mask(const std::filesystem::path& path);
void write_mask(const LabelMask& mask, const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG from raw bytes (row-major, width*height).
void write_gray_png(int width, int height, const std::vector<std::uint8_t>& pixels,
                    const std::filesystem::path& path);

Tensor to_tensor(const FeatureMap& map);
FeatureMap to_feature_map(const Tensor& t);

}  // namespace sdf

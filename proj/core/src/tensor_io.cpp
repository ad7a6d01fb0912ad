#include "sdforest/tensor_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sdforest/error.hpp"

namespace sdf {

namespace fs = std::filesystem;

std::size_t Tensor::element_count() const noexcept {
  if (dims.empty()) return 0;
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(Errc::file_not_found, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io_error, "short write to " + path.string());
}

// ---- PNG decoding -------------------------------------------------------

struct MemoryReader {
  const std::vector<std::uint8_t>* bytes;
  std::size_t offset;
};

void png_read_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (reader->offset + count > reader->bytes->size()) {
    png_error(png, "unexpected end of file");
  }
  std::memcpy(out, reader->bytes->data() + reader->offset, count);
  reader->offset += count;
}

void png_silent_warning(png_structp, png_const_charp) {}

enum class PngTarget { image, mask };

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 or 3 after transforms
  std::vector<std::uint8_t> pixels;
};

struct PngFailure {
  Errc code = Errc::malformed_png;
  char message[256] = {};
};

// All libpng calls live here; only trivially destructible locals cross setjmp.
bool decode_png_raw(const std::vector<std::uint8_t>& bytes, PngTarget target, DecodedPng& out,
                    PngFailure& failure) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_silent_warning);
  if (!png) {
    std::snprintf(failure.message, sizeof failure.message, "libpng initialisation failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    std::snprintf(failure.message, sizeof failure.message, "libpng initialisation failed");
    return false;
  }
  MemoryReader reader{&bytes, 0};
  std::vector<png_bytep>* rows = new std::vector<png_bytep>();

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    delete rows;
    if (failure.message[0] == '\0') {
      std::snprintf(failure.message, sizeof failure.message, "corrupt or truncated PNG data");
    }
    return false;
  }

  png_set_read_fn(png, &reader, png_read_memory);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  int channels = 0;
  if (target == PngTarget::mask) {
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
      if (bit_depth < 8) png_set_packing(png);
      channels = 1;
    } else if (color_type == PNG_COLOR_TYPE_GRAY) {
      if (bit_depth != 8) {
        failure.code = Errc::unsupported_format;
        std::snprintf(failure.message, sizeof failure.message,
                      "unsupported bit depth %d for mask (expected 8)", bit_depth);
        png_error(png, "unsupported");
      }
      channels = 1;
    } else {
      failure.code = Errc::unsupported_format;
      std::snprintf(failure.message, sizeof failure.message,
                    "mask must be a single-channel PNG holding object ids; convert the colour "
                    "mask to 8-bit grayscale (pixel value = object id)");
      png_error(png, "unsupported");
    }
  } else {
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
      png_set_palette_to_rgb(png);
      if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    } else {
      if (bit_depth != 8) {
        failure.code = Errc::unsupported_format;
        std::snprintf(failure.message, sizeof failure.message,
                      "unsupported bit depth %d (expected 8)", bit_depth);
        png_error(png, "unsupported");
      }
      if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
      }
      if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    }
    channels = 3;
  }
  png_read_update_info(png, info);
  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(width) * channels) {
    failure.code = Errc::unsupported_format;
    std::snprintf(failure.message, sizeof failure.message, "unexpected PNG row layout");
    png_error(png, "unsupported");
  }

  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.channels = channels;
  out.pixels.assign(static_cast<std::size_t>(width) * height * channels, 0);
  rows->resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    (*rows)[y] = out.pixels.data() + static_cast<std::size_t>(y) * width * channels;
  }
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  delete rows;
  return true;
}

DecodedPng decode_png(const fs::path& path, PngTarget target) {
  const auto bytes = read_file(path);
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(Errc::malformed_png, path.string() + ": missing PNG signature");
  }
  DecodedPng out;
  PngFailure failure;
  if (!decode_png_raw(bytes, target, out, failure)) {
    throw Error(failure.code, path.string() + ": " + failure.message);
  }
  if (out.width <= 0 || out.height <= 0) {
    throw Error(Errc::malformed_png, path.string() + ": zero extent");
  }
  return out;
}

// ---- PNG encoding -------------------------------------------------------

void png_write_memory(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

bool encode_png_raw(int width, int height, int channels, const std::uint8_t* pixels,
                    std::vector<std::uint8_t>& out) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_silent_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  std::vector<png_bytep>* rows = new std::vector<png_bytep>(static_cast<std::size_t>(height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    delete rows;
    return false;
  }
  png_set_write_fn(png, &out, png_write_memory, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    (*rows)[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(pixels + static_cast<std::size_t>(y) * width * channels);
  }
  png_write_image(png, rows->data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  delete rows;
  return true;
}

void encode_png(int width, int height, int channels, const std::vector<std::uint8_t>& pixels,
                const fs::path& path) {
  if (width <= 0 || height <= 0) throw Error(Errc::invalid_argument, "PNG extents must be positive");
  if (pixels.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(Errc::shape_mismatch, "pixel buffer does not match PNG extents");
  }
  std::vector<std::uint8_t> bytes;
  if (!encode_png_raw(width, height, channels, pixels.data(), bytes)) {
    throw Error(Errc::io_error, "PNG encoding failed for " + path.string());
  }
  write_file(path, bytes);
}

}  // namespace

// ---- tensors -------------------------------------------------------------

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.dims.empty()) throw Error(Errc::invalid_argument, "tensor needs ndim >= 1");
  if (t.dims.size() > 255) throw Error(Errc::invalid_argument, "tensor ndim exceeds 255");
  for (auto d : t.dims) {
    if (d == 0) throw Error(Errc::invalid_argument, "tensor extents must be >= 1");
  }
  if (t.data.size() != t.element_count()) {
    throw Error(Errc::payload_mismatch, "payload has " + std::to_string(t.data.size()) +
                                            " values, dims require " + std::to_string(t.element_count()));
  }
  for (float v : t.data) {
    if (!std::isfinite(v)) throw Error(Errc::non_finite, "tensor payload contains a non-finite value");
  }
  std::vector<std::uint8_t> out;
  out.reserve(8 + 4 * t.dims.size() + 4 * t.data.size());
  out.insert(out.end(), std::begin(kTensorMagic), std::end(kTensorMagic));
  out.push_back(kTensorVersion);
  out.push_back(kTensorDtypeF32);
  out.push_back(static_cast<std::uint8_t>(t.dims.size()));
  out.push_back(0);
  for (auto d : t.dims) put_u32(out, d);
  for (float v : t.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Tensor decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kTensorMagic, 4) != 0) {
    throw Error(Errc::bad_magic, "not an SDFT tensor file");
  }
  if (bytes[4] != kTensorVersion) {
    throw Error(Errc::unsupported_version, "tensor version " + std::to_string(bytes[4]));
  }
  if (bytes[5] != kTensorDtypeF32) {
    throw Error(Errc::unsupported_format, "tensor dtype " + std::to_string(bytes[5]));
  }
  const std::size_t ndim = bytes[6];
  if (ndim == 0) throw Error(Errc::invalid_argument, "tensor needs ndim >= 1");
  if (bytes[7] != 0) throw Error(Errc::unsupported_format, "reserved header byte is not zero");
  const std::size_t header = 8 + 4 * ndim;
  if (bytes.size() < header) throw Error(Errc::payload_mismatch, "truncated tensor header");

  Tensor t;
  t.dims.resize(ndim);
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    t.dims[i] = get_u32(bytes.data() + 8 + 4 * i);
    if (t.dims[i] == 0) throw Error(Errc::invalid_argument, "tensor extents must be >= 1");
    count *= t.dims[i];
  }
  if (bytes.size() - header != 4 * count) {
    throw Error(Errc::payload_mismatch, "expected " + std::to_string(4 * count) + " payload bytes, found " +
                                            std::to_string(bytes.size() - header));
  }
  t.data.resize(count);
  const std::uint8_t* p = bytes.data() + header;
  for (std::size_t i = 0; i < count; ++i) {
    t.data[i] = std::bit_cast<float>(get_u32(p + 4 * i));
  }
  return t;
}

Tensor read_tensor(const fs::path& path) {
  try {
    return decode_tensor(read_file(path));
  } catch (const Error& e) {
    if (e.code() == Errc::file_not_found) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_tensor(const Tensor& t, const fs::path& path) { write_file(path, encode_tensor(t)); }

Tensor to_tensor(const FeatureMap& map) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(map.channels), static_cast<std::uint32_t>(map.height),
            static_cast<std::uint32_t>(map.width)};
  t.data = map.values;
  return t;
}

FeatureMap to_feature_map(const Tensor& t) {
  if (t.dims.size() != 3) {
    throw Error(Errc::shape_mismatch, "feature tensor must have 3 dims (C,H,W), got " + std::to_string(t.dims.size()));
  }
  FeatureMap map;
  map.channels = static_cast<int>(t.dims[0]);
  map.height = static_cast<int>(t.dims[1]);
  map.width = static_cast<int>(t.dims[2]);
  map.values = t.data;
  return map;
}

// ---- images and masks ------------------------------------------------------

ImageFrame read_image(const fs::path& path) {
  auto png = decode_png(path, PngTarget::image);
  ImageFrame frame;
  frame.width = png.width;
  frame.height = png.height;
  frame.data = std::move(png.pixels);
  return frame;
}

void write_image(const ImageFrame& frame, const fs::path& path) {
  encode_png(frame.width, frame.height, 3, frame.data, path);
}

LabelMask read_mask(const fs::path& path) {
  auto png = decode_png(path, PngTarget::mask);
  LabelMask mask;
  mask.width = png.width;
  mask.height = png.height;
  mask.labels = std::move(png.pixels);
  return mask;
}

void write_mask(const LabelMask& mask, const fs::path& path) {
  encode_png(mask.width, mask.height, 1, mask.labels, path);
}

void write_gray_png(int width, int height, const std::vector<std::uint8_t>& pixels, const fs::path& path) {
  encode_png(width, height, 1, pixels, path);
}

}  // namespace sdf

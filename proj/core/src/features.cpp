#include "sdforest/features.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sdforest/error.hpp"
#include "sdforest/parallel.hpp"
#include "sdforest/tensor_io.hpp"

namespace sdf {

namespace {

void validate(const ImageFrame& frame) {
  if (frame.width <= 0 || frame.height <= 0 || frame.data.size() != 3 * frame.pixel_count()) {
    throw Error(Errc::invalid_argument, "invalid image frame");
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

struct Tap {
  int lo;
  int hi;
  double weight;  // of hi
};

Tap half_pixel_tap(int dst, int src_extent, int dst_extent) {
  double s = (dst + 0.5) * (static_cast<double>(src_extent) / dst_extent) - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(src_extent - 1));
  const int lo = static_cast<int>(std::floor(s));
  const int hi = std::min(lo + 1, src_extent - 1);
  return Tap{lo, hi, s - lo};
}

double lerp_bounded(double a, double b, double t) {
  const double v = a + t * (b - a);
  return std::clamp(v, std::min(a, b), std::max(a, b));
}

}  // namespace

ConfidenceMap grayscale(const ImageFrame& frame) {
  validate(frame);
  ConfidenceMap gray(frame.width, frame.height);
  for (std::size_t i = 0; i < frame.pixel_count(); ++i) {
    const double r = frame.data[3 * i], g = frame.data[3 * i + 1], b = frame.data[3 * i + 2];
    gray.data[i] = (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
  }
  return gray;
}

ConfidenceMap gaussian_blur(const ConfidenceMap& input, double sigma) {
  if (!(sigma > 0.0)) throw Error(Errc::invalid_argument, "blur sigma must be positive");
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = input.width, h = input.height;

  ConfidenceMap tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[k + radius] * input(std::clamp(x + k, 0, w - 1), y);
      }
      tmp(x, y) = acc;
    }
  }
  ConfidenceMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[k + radius] * tmp(x, std::clamp(y + k, 0, h - 1));
      }
      out(x, y) = acc;
    }
  }
  return out;
}

FeatureMap handcrafted_features(const ImageFrame& frame) {
  validate(frame);
  const int w = frame.width, h = frame.height;
  FeatureMap out(kHandcraftedChannels, h, w);

  for (int c = 0; c < 3; ++c) {
    auto plane = out.channel(kChannelRed + c);
    for (std::size_t i = 0; i < frame.pixel_count(); ++i) {
      plane[i] = static_cast<float>(frame.data[3 * i + c] / 255.0);
    }
  }

  const ConfidenceMap gray = grayscale(frame);
  auto gray_plane = out.channel(kChannelGray);
  auto gx = out.channel(kChannelGradX);
  auto gy = out.channel(kChannelGradY);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = gray.index(x, y);
      gray_plane[i] = static_cast<float>(gray.data[i]);
      gx[i] = static_cast<float>(std::abs(gray(std::min(x + 1, w - 1), y) - gray(std::max(x - 1, 0), y)));
      gy[i] = static_cast<float>(std::abs(gray(x, std::min(y + 1, h - 1)) - gray(x, std::max(y - 1, 0))));
    }
  }

  const double sigmas[3] = {1.0, 2.0, 4.0};
  for (int s = 0; s < 3; ++s) {
    const ConfidenceMap blurred = gaussian_blur(gray, sigmas[s]);
    auto plane = out.channel(kChannelBlur1 + s);
    for (std::size_t i = 0; i < blurred.size(); ++i) plane[i] = static_cast<float>(blurred.data[i]);
  }

  auto cx = out.channel(kChannelCoordX);
  auto cy = out.channel(kChannelCoordY);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      cx[i] = w > 1 ? static_cast<float>(static_cast<double>(x) / (w - 1)) : 0.0f;
      cy[i] = h > 1 ? static_cast<float>(static_cast<double>(y) / (h - 1)) : 0.0f;
    }
  }
  return out;
}

FeatureMap bilinear_upsample(const FeatureMap& map, int target_h, int target_w) {
  if (target_h < 1 || target_w < 1) {
    throw Error(Errc::invalid_argument, "upsample target extents must be >= 1");
  }
  if (map.height < 1 || map.width < 1) throw Error(Errc::invalid_argument, "empty feature map");
  if (target_h == map.height && target_w == map.width) return map;

  std::vector<Tap> xs(target_w), ys(target_h);
  for (int x = 0; x < target_w; ++x) xs[x] = half_pixel_tap(x, map.width, target_w);
  for (int y = 0; y < target_h; ++y) ys[y] = half_pixel_tap(y, map.height, target_h);

  FeatureMap out(map.channels, target_h, target_w);
  parallel_for(static_cast<std::size_t>(map.channels), 0, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const auto src = map.channel(static_cast<int>(c));
      auto dst = out.channel(static_cast<int>(c));
      for (int y = 0; y < target_h; ++y) {
        const Tap ty = ys[y];
        const float* row_lo = src.data() + static_cast<std::size_t>(ty.lo) * map.width;
        const float* row_hi = src.data() + static_cast<std::size_t>(ty.hi) * map.width;
        for (int x = 0; x < target_w; ++x) {
          const Tap tx = xs[x];
          const double top = lerp_bounded(row_lo[tx.lo], row_lo[tx.hi], tx.weight);
          const double bottom = lerp_bounded(row_hi[tx.lo], row_hi[tx.hi], tx.weight);
          dst[static_cast<std::size_t>(y) * target_w + x] = static_cast<float>(lerp_bounded(top, bottom, ty.weight));
        }
      }
    }
  });
  return out;
}

FeatureMap concat_features(std::span<const FeatureMap> maps) {
  if (maps.empty()) throw Error(Errc::invalid_argument, "nothing to concatenate");
  const int h = maps.front().height, w = maps.front().width;
  int channels = 0;
  for (const auto& m : maps) {
    if (m.height != h || m.width != w) {
      throw Error(Errc::shape_mismatch, "feature maps disagree on spatial extents");
    }
    channels += m.channels;
  }
  FeatureMap out;
  out.channels = channels;
  out.height = h;
  out.width = w;
  out.values.reserve(static_cast<std::size_t>(channels) * h * w);
  for (const auto& m : maps) out.values.insert(out.values.end(), m.values.begin(), m.values.end());
  return out;
}

FeatureMap load_external_features(const std::filesystem::path& path, int frame_h, int frame_w) {
  const Tensor t = read_tensor(path);
  if (t.dims.size() != 3) {
    throw Error(Errc::shape_mismatch, path.string() + ": expected dims [C,h,w], got ndim " +
                                          std::to_string(t.dims.size()));
  }
  for (float v : t.data) {
    if (!std::isfinite(v)) throw Error(Errc::non_finite, path.string() + ": feature payload is not finite");
  }
  return bilinear_upsample(to_feature_map(t), frame_h, frame_w);
}

}  // namespace sdf

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sdf {

/// Row-major 2-D grid.
template <typename T>
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int w, int h, T fill = T{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::size_t size() const noexcept { return data.size(); }
  bool empty() const noexcept { return data.empty(); }

  T& operator()(int x, int y) { return data[index(x, y)]; }
  const T& operator()(int x, int y) const { return data[index(x, y)]; }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }

  bool operator==(const Grid&) const = default;
};

/// Per-pixel values in [0,1]; also used for grayscale guidance images.
using ConfidenceMap = Grid<double>;

/// 8-bit RGB frame, interleaved, row-major.
struct ImageFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  ImageFrame() = default;
  ImageFrame(int w, int h)
      : width(w), height(h), data(3 * static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

  std::uint8_t& at(int x, int y, int c) {
    return data[3 * (static_cast<std::size_t>(y) * width + x) + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data[3 * (static_cast<std::size_t>(y) * width + x) + c];
  }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  bool operator==(const ImageFrame&) const = default;
};

/// Object ids per pixel; 0 is background.
struct LabelMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;

  LabelMask() = default;
  LabelMask(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), labels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::uint8_t& operator()(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t operator()(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }

  /// Largest label value present.
  int num_objects() const noexcept;

  /// 1 where label == object_id, else 0.
  LabelMask binary(int object_id) const;

  bool operator==(const LabelMask&) const = default;
};

/// C x H x W planar feature grid.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        values(static_cast<std::size_t>(c) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

  std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  std::span<float> channel(int c) {
    return {values.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }
  std::span<const float> channel(int c) const {
    return {values.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }
  float& at(int c, int y, int x) { return values[static_cast<std::size_t>(c) * plane_size() + static_cast<std::size_t>(y) * width + x]; }
  float at(int c, int y, int x) const { return values[static_cast<std::size_t>(c) * plane_size() + static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const FeatureMap&) const = default;
};

/// Axis-aligned pixel rectangle [x0, x0+w) x [y0, y0+h).
struct SearchWindow {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;

  int x1() const noexcept { return x0 + w; }
  int y1() const noexcept { return y0 + h; }
  bool empty() const noexcept { return w <= 0 || h <= 0; }
  bool contains(int x, int y) const noexcept { return x >= x0 && x < x0 + w && y >= y0 && y < y0 + h; }
  double center_x() const noexcept { return x0 + 0.5 * w; }
  double center_y() const noexcept { return y0 + 0.5 * h; }

  bool operator==(const SearchWindow&) const = default;
};

/// Intersection with the [0,width) x [0,height) frame; may be empty.
SearchWindow clip_window(const SearchWindow& window, int width, int height) noexcept;

/// Window of the given extents centred at (cx, cy), clipped to the frame.
SearchWindow centered_window(double cx, double cy, int w, int h, int width, int height) noexcept;

/// Scales extents by `scale` about the window centre, clipped to the frame.
SearchWindow scale_window(const SearchWindow& window, double scale, int width, int height) noexcept;

/// Bounding box of nonzero pixels (or of pixels equal to object_id when > 0).
/// Returns an empty window when no pixel qualifies.
SearchWindow bounding_box(const LabelMask& mask, int object_id = 0) noexcept;

}  // namespace sdf

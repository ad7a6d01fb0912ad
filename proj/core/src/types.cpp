#include "sdforest/types.hpp"

#include <algorithm>
#include <cmath>

namespace sdf {

int LabelMask::num_objects() const noexcept {
  std::uint8_t top = 0;
  for (auto v : labels) top = std::max(top, v);
  return top;
}

LabelMask LabelMask::binary(int object_id) const {
  LabelMask out(width, height);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.labels[i] = labels[i] == object_id ? 1 : 0;
  }
  return out;
}

SearchWindow clip_window(const SearchWindow& window, int width, int height) noexcept {
  const int x0 = std::max(window.x0, 0);
  const int y0 = std::max(window.y0, 0);
  const int x1 = std::min(window.x1(), width);
  const int y1 = std::min(window.y1(), height);
  if (x1 <= x0 || y1 <= y0) return SearchWindow{x0, y0, 0, 0};
  return SearchWindow{x0, y0, x1 - x0, y1 - y0};
}

SearchWindow centered_window(double cx, double cy, int w, int h, int width, int height) noexcept {
  const int x0 = static_cast<int>(std::floor(cx - 0.5 * w + 0.5));
  const int y0 = static_cast<int>(std::floor(cy - 0.5 * h + 0.5));
  return clip_window(SearchWindow{x0, y0, w, h}, width, height);
}

SearchWindow scale_window(const SearchWindow& window, double scale, int width, int height) noexcept {
  const int w = std::max(1, static_cast<int>(std::floor(window.w * scale + 0.5)));
  const int h = std::max(1, static_cast<int>(std::floor(window.h * scale + 0.5)));
  return centered_window(window.center_x(), window.center_y(), w, h, width, height);
}

SearchWindow bounding_box(const LabelMask& mask, int object_id) noexcept {
  int x0 = mask.width, y0 = mask.height, x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const int v = mask(x, y);
      const bool hit = object_id > 0 ? v == object_id : v != 0;
      if (!hit) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return SearchWindow{};
  return SearchWindow{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

}  // namespace sdf

#include "sdforest/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdforest/error.hpp"

namespace sdf {

namespace slic_detail {

double grid_interval(int width, int height, int k) {
  return std::sqrt(static_cast<double>(width) * height / static_cast<double>(k));
}

double gradient_at(const ImageFrame& frame, int x, int y) {
  const int xl = std::max(x - 1, 0), xr = std::min(x + 1, frame.width - 1);
  const int yu = std::max(y - 1, 0), yd = std::min(y + 1, frame.height - 1);
  double g = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double dx = static_cast<double>(frame.at(xr, y, c)) - frame.at(xl, y, c);
    const double dy = static_cast<double>(frame.at(x, yd, c)) - frame.at(x, yu, c);
    g += dx * dx + dy * dy;
  }
  return g;
}

std::vector<SuperpixelCenter> seed_centers(const ImageFrame& frame, int k) {
  const int w = frame.width, h = frame.height;
  const double s = grid_interval(w, h, k);
  const int rows = std::clamp(static_cast<int>(std::lround(h / s)), 1, std::min(h, k));
  const int cols = std::clamp(k / rows, 1, w);

  std::vector<SuperpixelCenter> centers;
  centers.reserve(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      int cx = static_cast<int>((j + 0.5) * w / cols);
      int cy = static_cast<int>((i + 0.5) * h / rows);
      double best = gradient_at(frame, cx, cy);
      int bx = cx, by = cy;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = cx + dx, y = cy + dy;
          if (x < 0 || y < 0 || x >= w || y >= h) continue;
          const double g = gradient_at(frame, x, y);
          if (g < best) {
            best = g;
            bx = x;
            by = y;
          }
        }
      }
      centers.push_back({static_cast<double>(bx), static_cast<double>(by), static_cast<double>(frame.at(bx, by, 0)),
                         static_cast<double>(frame.at(bx, by, 1)), static_cast<double>(frame.at(bx, by, 2))});
    }
  }
  return centers;
}

double distance(const SuperpixelCenter& c, const ImageFrame& frame, int x, int y, double compactness,
                double interval) {
  const double dr = frame.at(x, y, 0) - c.r;
  const double dg = frame.at(x, y, 1) - c.g;
  const double db = frame.at(x, y, 2) - c.b;
  const double dx = x - c.x;
  const double dy = y - c.y;
  const double spatial = compactness / interval;
  return std::sqrt(dr * dr + dg * dg + db * db + spatial * spatial * (dx * dx + dy * dy));
}

std::vector<int> assign(const ImageFrame& frame, const std::vector<SuperpixelCenter>& centers, double compactness,
                        double interval) {
  const int w = frame.width, h = frame.height;
  std::vector<int> labels(frame.pixel_count(), -1);
  std::vector<double> best(frame.pixel_count(), std::numeric_limits<double>::infinity());

  for (std::size_t id = 0; id < centers.size(); ++id) {
    const auto& c = centers[id];
    const int x0 = std::max(0, static_cast<int>(std::ceil(c.x - interval)));
    const int x1 = std::min(w - 1, static_cast<int>(std::floor(c.x + interval)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(c.y - interval)));
    const int y1 = std::min(h - 1, static_cast<int>(std::floor(c.y + interval)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        const double d = distance(c, frame, x, y, compactness, interval);
        if (d < best[i]) {
          best[i] = d;
          labels[i] = static_cast<int>(id);
        }
      }
    }
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (labels[i] >= 0) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t id = 0; id < centers.size(); ++id) {
        const double dx = x - centers[id].x, dy = y - centers[id].y;
        const double d = dx * dx + dy * dy;
        if (d < nearest) {
          nearest = d;
          labels[i] = static_cast<int>(id);
        }
      }
    }
  }
  return labels;
}

}  // namespace slic_detail

SuperpixelLabels slic(const ImageFrame& frame, const SlicParams& params) {
  if (frame.width <= 0 || frame.height <= 0 || frame.data.size() != 3 * frame.pixel_count()) {
    throw Error(Errc::invalid_argument, "invalid image frame");
  }
  if (params.k < 1) throw Error(Errc::invalid_argument, "slic k must be >= 1");
  if (static_cast<std::size_t>(params.k) > frame.pixel_count()) {
    throw Error(Errc::invalid_argument, "slic k exceeds the pixel count");
  }
  if (params.iters < 1) throw Error(Errc::invalid_argument, "slic needs at least one iteration");
  if (params.compactness < 0.0) throw Error(Errc::invalid_argument, "slic compactness must be >= 0");

  const double interval = slic_detail::grid_interval(frame.width, frame.height, params.k);
  auto centers = slic_detail::seed_centers(frame, params.k);
  std::vector<int> labels;
  std::vector<std::size_t> members;

  for (int it = 0; it < params.iters; ++it) {
    labels = slic_detail::assign(frame, centers, params.compactness, interval);
    std::vector<SuperpixelCenter> sums(centers.size());
    members.assign(centers.size(), 0);
    for (int y = 0; y < frame.height; ++y) {
      for (int x = 0; x < frame.width; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * frame.width + x;
        auto& s = sums[static_cast<std::size_t>(labels[i])];
        s.x += x;
        s.y += y;
        s.r += frame.data[3 * i];
        s.g += frame.data[3 * i + 1];
        s.b += frame.data[3 * i + 2];
        ++members[static_cast<std::size_t>(labels[i])];
      }
    }
    for (std::size_t id = 0; id < centers.size(); ++id) {
      if (members[id] == 0) continue;
      const double n = static_cast<double>(members[id]);
      centers[id] = {sums[id].x / n, sums[id].y / n, sums[id].r / n, sums[id].g / n, sums[id].b / n};
    }
  }

  SuperpixelLabels out;
  out.width = frame.width;
  out.height = frame.height;
  std::vector<int> remap(centers.size(), -1);
  for (std::size_t id = 0; id < centers.size(); ++id) {
    if (members[id] == 0) continue;
    remap[id] = static_cast<int>(out.centers.size());
    out.centers.push_back(centers[id]);
  }
  out.labels.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out.labels[i] = remap[static_cast<std::size_t>(labels[i])];
  return out;
}

ConfidenceMap soft_mean_pool(const ConfidenceMap& conf, const SuperpixelLabels& labels, double blend) {
  if (conf.width != labels.width || conf.height != labels.height) {
    throw Error(Errc::shape_mismatch, "confidence map and superpixels differ in extent");
  }
  if (blend < 0.0 || blend > 1.0) throw Error(Errc::invalid_argument, "pooling blend must lie in [0,1]");
  if (blend == 0.0) return conf;

  std::vector<double> sum(static_cast<std::size_t>(labels.k()), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(labels.k()), 0);
  for (std::size_t i = 0; i < conf.size(); ++i) {
    sum[static_cast<std::size_t>(labels.labels[i])] += conf.data[i];
    ++count[static_cast<std::size_t>(labels.labels[i])];
  }
  for (std::size_t id = 0; id < sum.size(); ++id) {
    if (count[id] > 0) sum[id] /= static_cast<double>(count[id]);
  }
  ConfidenceMap out(conf.width, conf.height);
  for (std::size_t i = 0; i < conf.size(); ++i) {
    const double mean = sum[static_cast<std::size_t>(labels.labels[i])];
    out.data[i] = (1.0 - blend) * conf.data[i] + blend * mean;
  }
  return out;
}

}  // namespace sdf

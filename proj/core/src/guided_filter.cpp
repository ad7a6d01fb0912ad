#include "sdforest/guided_filter.hpp"

#include <algorithm>
#include <vector>

#include "sdforest/error.hpp"

namespace sdf {

namespace {

class SummedAreaTable {
 public:
  explicit SummedAreaTable(const ConfidenceMap& map)
      : w_(map.width), h_(map.height), table_(static_cast<std::size_t>(w_ + 1) * (h_ + 1), 0.0) {
    for (int y = 0; y < h_; ++y) {
      double row = 0.0;
      for (int x = 0; x < w_; ++x) {
        row += map(x, y);
        at(x + 1, y + 1) = at(x + 1, y) + row;
      }
    }
  }

  // Sum over [x0, x1) x [y0, y1).
  double sum(int x0, int y0, int x1, int y1) const {
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
  }

 private:
  double& at(int x, int y) { return table_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  double at(int x, int y) const { return table_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }

  int w_, h_;
  std::vector<double> table_;
};

void require_same_extent(const ConfidenceMap& a, const ConfidenceMap& b) {
  if (a.width != b.width || a.height != b.height) {
    throw Error(Errc::shape_mismatch, "guidance and confidence extents differ");
  }
}

}  // namespace

ConfidenceMap box_filter(const ConfidenceMap& map, int radius) {
  if (radius < 1) throw Error(Errc::invalid_argument, "box filter radius must be >= 1");
  const SummedAreaTable sat(map);
  ConfidenceMap out(map.width, map.height);
  for (int y = 0; y < map.height; ++y) {
    const int y0 = std::max(0, y - radius), y1 = std::min(map.height, y + radius + 1);
    for (int x = 0; x < map.width; ++x) {
      const int x0 = std::max(0, x - radius), x1 = std::min(map.width, x + radius + 1);
      const double count = static_cast<double>(x1 - x0) * (y1 - y0);
      out(x, y) = sat.sum(x0, y0, x1, y1) / count;
    }
  }
  return out;
}

ConfidenceMap guided_filter_raw(const ConfidenceMap& guidance, const ConfidenceMap& conf,
                                const GuidedFilterParams& params) {
  require_same_extent(guidance, conf);
  if (params.radius < 1) throw Error(Errc::invalid_argument, "guided filter radius must be >= 1");
  if (params.eps < 0.0) throw Error(Errc::invalid_argument, "guided filter eps must be >= 0");

  const int r = params.radius;
  ConfidenceMap ip(conf.width, conf.height), ii(conf.width, conf.height);
  for (std::size_t i = 0; i < conf.size(); ++i) {
    ip.data[i] = guidance.data[i] * conf.data[i];
    ii.data[i] = guidance.data[i] * guidance.data[i];
  }
  const ConfidenceMap mean_i = box_filter(guidance, r);
  const ConfidenceMap mean_p = box_filter(conf, r);
  const ConfidenceMap corr_ip = box_filter(ip, r);
  const ConfidenceMap corr_ii = box_filter(ii, r);

  ConfidenceMap a(conf.width, conf.height), b(conf.width, conf.height);
  for (std::size_t i = 0; i < conf.size(); ++i) {
    const double var = std::max(0.0, corr_ii.data[i] - mean_i.data[i] * mean_i.data[i]);
    const double cov = corr_ip.data[i] - mean_i.data[i] * mean_p.data[i];
    const double denom = var + params.eps;
    a.data[i] = denom > 0.0 ? cov / denom : 0.0;
    b.data[i] = mean_p.data[i] - a.data[i] * mean_i.data[i];
  }
  const ConfidenceMap mean_a = box_filter(a, r);
  const ConfidenceMap mean_b = box_filter(b, r);

  ConfidenceMap q(conf.width, conf.height);
  for (std::size_t i = 0; i < conf.size(); ++i) {
    q.data[i] = mean_a.data[i] * guidance.data[i] + mean_b.data[i];
  }
  return q;
}

ConfidenceMap guided_filter(const ConfidenceMap& guidance, const ConfidenceMap& conf,
                            const GuidedFilterParams& params) {
  ConfidenceMap q = guided_filter_raw(guidance, conf, params);
  for (auto& v : q.data) v = std::clamp(v, 0.0, 1.0);
  return q;
}

LabelMask threshold_mask(const ConfidenceMap& conf, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(Errc::invalid_argument, "threshold must lie in (0,1)");
  LabelMask out(conf.width, conf.height);
  for (std::size_t i = 0; i < conf.size(); ++i) out.labels[i] = conf.data[i] >= threshold ? 1 : 0;
  return out;
}

}  // namespace sdf

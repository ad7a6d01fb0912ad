#include "sdforest/tracker.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include "sdforest/error.hpp"

namespace sdf {

namespace {

constexpr double kDegenerateNorm = 1e-12;
// Region norms come from summed-area tables (sum of squares minus squared
// sum); below this fraction of the patch energy the difference is rounding.
constexpr double kCancellationFloor = 1e-12;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (!p) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {
    if (!plan_) throw Error(Errc::invalid_argument, "FFTW planning failed");
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  fftw_plan get() const noexcept { return plan_; }

 private:
  fftw_plan plan_;
};

int fft_size(int n) {
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

SearchWindow ensure_min_extent(SearchWindow win, int min_w, int min_h, int width, int height) {
  if (win.w < min_w) {
    const double cx = win.center_x();
    win.w = std::min(min_w, width);
    win.x0 = std::clamp(static_cast<int>(std::floor(cx - 0.5 * win.w + 0.5)), 0, width - win.w);
  }
  if (win.h < min_h) {
    const double cy = win.center_y();
    win.h = std::min(min_h, height);
    win.y0 = std::clamp(static_cast<int>(std::floor(cy - 0.5 * win.h + 0.5)), 0, height - win.h);
  }
  return win;
}

}  // namespace

FeatureMap crop_features(const FeatureMap& map, const SearchWindow& box) {
  if (box.empty() || box.x0 < 0 || box.y0 < 0 || box.x1() > map.width || box.y1() > map.height) {
    throw Error(Errc::invalid_argument, "crop box outside the feature map");
  }
  FeatureMap out(map.channels, box.h, box.w);
  for (int c = 0; c < map.channels; ++c) {
    for (int y = 0; y < box.h; ++y) {
      const float* src = map.channel(c).data() + static_cast<std::size_t>(box.y0 + y) * map.width + box.x0;
      std::copy(src, src + box.w, out.channel(c).data() + static_cast<std::size_t>(y) * box.w);
    }
  }
  return out;
}

ResponseMap cross_correlate(const FeatureMap& exemplar, const FeatureMap& region) {
  if (exemplar.channels != region.channels) {
    throw Error(Errc::shape_mismatch, "exemplar and region channel counts differ");
  }
  if (exemplar.height < 1 || exemplar.width < 1 || exemplar.channels < 1) {
    throw Error(Errc::invalid_argument, "empty exemplar");
  }
  if (exemplar.height > region.height || exemplar.width > region.width) {
    throw Error(Errc::invalid_argument, "exemplar larger than search region");
  }
  const int channels = exemplar.channels;
  const int eh = exemplar.height, ew = exemplar.width;
  const int rh = region.height, rw = region.width;
  const int oh = rh - eh + 1, ow = rw - ew + 1;
  const double n = static_cast<double>(eh) * ew;

  // Centred exemplar and its joint norm.
  std::vector<double> centred(exemplar.values.size());
  double exemplar_norm2 = 0.0;
  for (int c = 0; c < channels; ++c) {
    const auto src = exemplar.channel(c);
    double mean = 0.0;
    for (float v : src) mean += v;
    mean /= n;
    for (std::size_t i = 0; i < src.size(); ++i) {
      const double d = src[i] - mean;
      centred[c * exemplar.plane_size() + i] = d;
      exemplar_norm2 += d * d;
    }
  }
  ResponseMap response(ow, oh, 0.0);
  const double exemplar_norm = std::sqrt(exemplar_norm2);
  if (exemplar_norm < kDegenerateNorm) return response;

  // Numerator: sum_c corr(E'_c, R_c), accumulated in the frequency domain.
  const int ph = fft_size(rh), pw = fft_size(rw);
  const int pwc = pw / 2 + 1;
  const std::size_t real_size = static_cast<std::size_t>(ph) * pw;
  const std::size_t complex_size = static_cast<std::size_t>(ph) * pwc;
  auto real_buf = fftw_buffer<double>(real_size);
  auto spec_e = fftw_buffer<fftw_complex>(complex_size);
  auto spec_r = fftw_buffer<fftw_complex>(complex_size);
  auto accum = fftw_buffer<fftw_complex>(complex_size);
  std::fill_n(reinterpret_cast<double*>(accum.get()), 2 * complex_size, 0.0);

  std::unique_ptr<Plan> forward, inverse;
  {
    std::lock_guard lock(planner_mutex());
    forward = std::make_unique<Plan>(fftw_plan_dft_r2c_2d(ph, pw, real_buf.get(), spec_e.get(), FFTW_ESTIMATE));
    inverse = std::make_unique<Plan>(fftw_plan_dft_c2r_2d(ph, pw, accum.get(), real_buf.get(), FFTW_ESTIMATE));
  }

  for (int c = 0; c < channels; ++c) {
    std::fill_n(real_buf.get(), real_size, 0.0);
    for (int y = 0; y < eh; ++y) {
      for (int x = 0; x < ew; ++x) {
        real_buf[static_cast<std::size_t>(y) * pw + x] = centred[c * exemplar.plane_size() + static_cast<std::size_t>(y) * ew + x];
      }
    }
    fftw_execute_dft_r2c(forward->get(), real_buf.get(), spec_e.get());

    std::fill_n(real_buf.get(), real_size, 0.0);
    const auto src = region.channel(c);
    for (int y = 0; y < rh; ++y) {
      for (int x = 0; x < rw; ++x) real_buf[static_cast<std::size_t>(y) * pw + x] = src[static_cast<std::size_t>(y) * rw + x];
    }
    fftw_execute_dft_r2c(forward->get(), real_buf.get(), spec_r.get());

    for (std::size_t k = 0; k < complex_size; ++k) {
      const std::complex<double> e(spec_e[k][0], spec_e[k][1]);
      const std::complex<double> r(spec_r[k][0], spec_r[k][1]);
      const std::complex<double> prod = std::conj(e) * r;
      accum[k][0] += prod.real();
      accum[k][1] += prod.imag();
    }
  }
  fftw_execute_dft_c2r(inverse->get(), accum.get(), real_buf.get());
  const double inv_size = 1.0 / static_cast<double>(real_size);

  // Region patch norms via per-channel summed-area tables of R and R^2.
  std::vector<double> var_sum(static_cast<std::size_t>(oh) * ow, 0.0);
  std::vector<double> energy(static_cast<std::size_t>(oh) * ow, 0.0);
  std::vector<double> s1(static_cast<std::size_t>(rh + 1) * (rw + 1));
  std::vector<double> s2(s1.size());
  auto idx = [rw](int x, int y) { return static_cast<std::size_t>(y) * (rw + 1) + x; };
  for (int c = 0; c < channels; ++c) {
    std::fill(s1.begin(), s1.end(), 0.0);
    std::fill(s2.begin(), s2.end(), 0.0);
    const auto src = region.channel(c);
    for (int y = 0; y < rh; ++y) {
      double row1 = 0.0, row2 = 0.0;
      for (int x = 0; x < rw; ++x) {
        const double v = src[static_cast<std::size_t>(y) * rw + x];
        row1 += v;
        row2 += v * v;
        s1[idx(x + 1, y + 1)] = s1[idx(x + 1, y)] + row1;
        s2[idx(x + 1, y + 1)] = s2[idx(x + 1, y)] + row2;
      }
    }
    for (int v = 0; v < oh; ++v) {
      for (int u = 0; u < ow; ++u) {
        const double sum1 = s1[idx(u + ew, v + eh)] - s1[idx(u, v + eh)] - s1[idx(u + ew, v)] + s1[idx(u, v)];
        const double sum2 = s2[idx(u + ew, v + eh)] - s2[idx(u, v + eh)] - s2[idx(u + ew, v)] + s2[idx(u, v)];
        const std::size_t o = static_cast<std::size_t>(v) * ow + u;
        var_sum[o] += std::max(0.0, sum2 - sum1 * sum1 / n);
        energy[o] += sum2;
      }
    }
  }

  for (int v = 0; v < oh; ++v) {
    for (int u = 0; u < ow; ++u) {
      const std::size_t o = static_cast<std::size_t>(v) * ow + u;
      const double region_norm2 = var_sum[o];
      if (region_norm2 < kDegenerateNorm * kDegenerateNorm || region_norm2 <= kCancellationFloor * energy[o]) {
        continue;
      }
      const double num = real_buf[static_cast<std::size_t>(v) * pw + u] * inv_size;
      response(u, v) = std::clamp(num / (exemplar_norm * std::sqrt(region_norm2)), -1.0, 1.0);
    }
  }
  return response;
}

TrackerState init_tracker(const FeatureMap& frame_features, const LabelMask& prompt_mask, int object_id,
                          double scale) {
  if (frame_features.width != prompt_mask.width || frame_features.height != prompt_mask.height) {
    throw Error(Errc::shape_mismatch, "features and prompt mask extents differ");
  }
  if (!(scale > 0.0)) throw Error(Errc::invalid_argument, "tracker scale must be positive");
  const SearchWindow box = bounding_box(prompt_mask, object_id);
  if (box.empty()) throw Error(Errc::degenerate_data, "object " + std::to_string(object_id) + " has no pixels");

  TrackerState state;
  state.scale = scale;
  state.exemplar_box = box;
  state.exemplar = crop_features(frame_features, box);
  state.window = ensure_min_extent(scale_window(box, scale, frame_features.width, frame_features.height), box.w,
                                   box.h, frame_features.width, frame_features.height);
  state.previous_features = frame_features;
  state.frame_index = 0;
  return state;
}

std::pair<TrackerState, SearchWindow> track_step(TrackerState state, const FeatureMap& frame_features,
                                                 const LabelMask& predicted_mask_prev) {
  const int width = frame_features.width, height = frame_features.height;
  if (state.exemplar.values.empty()) throw Error(Errc::invalid_argument, "tracker is not initialised");
  if (predicted_mask_prev.width != width || predicted_mask_prev.height != height ||
      state.previous_features.width != width || state.previous_features.height != height) {
    throw Error(Errc::shape_mismatch, "tracker inputs differ in extent");
  }

  const SearchWindow prev_box = bounding_box(predicted_mask_prev);
  if (!prev_box.empty()) {
    state.exemplar_box = prev_box;
    state.exemplar = crop_features(state.previous_features, prev_box);
  }
  const int ew = state.exemplar.width, eh = state.exemplar.height;

  const SearchWindow region =
      ensure_min_extent(scale_window(state.window, state.scale, width, height), ew, eh, width, height);
  const ResponseMap response = cross_correlate(state.exemplar, crop_features(frame_features, region));

  int best_u = 0, best_v = 0;
  double best = response(0, 0);
  for (int v = 0; v < response.height; ++v) {
    for (int u = 0; u < response.width; ++u) {
      if (response(u, v) > best) {
        best = response(u, v);
        best_u = u;
        best_v = v;
      }
    }
  }
  const double cx = region.x0 + best_u + 0.5 * ew;
  const double cy = region.y0 + best_v + 0.5 * eh;

  int w = state.window.w, h = state.window.h;
  if (!prev_box.empty()) {
    w = std::max(1, static_cast<int>(std::floor(prev_box.w * state.scale + 0.5)));
    h = std::max(1, static_cast<int>(std::floor(prev_box.h * state.scale + 0.5)));
  }
  w = std::max(w, ew);
  h = std::max(h, eh);
  const SearchWindow window =
      ensure_min_extent(centered_window(cx, cy, w, h, width, height), ew, eh, width, height);

  state.window = window;
  state.previous_features = frame_features;
  ++state.frame_index;
  return {std::move(state), window};
}

}  // namespace sdf

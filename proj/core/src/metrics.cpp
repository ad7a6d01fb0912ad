#include "sdforest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sdforest/error.hpp"
#include "sdforest/tensor_io.hpp"

namespace sdf {

namespace fs = std::filesystem;

namespace {

void require_same_extent(const LabelMask& a, const LabelMask& b) {
  if (a.width != b.width || a.height != b.height) throw Error(Errc::shape_mismatch, "mask extents differ");
}

std::vector<fs::path> png_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

SeriesStats average(const std::vector<SeriesStats>& stats) {
  SeriesStats out;
  if (stats.empty()) return out;
  for (const auto& s : stats) {
    out.mean += s.mean;
    out.recall += s.recall;
    out.decay += s.decay;
  }
  const double n = static_cast<double>(stats.size());
  out.mean /= n;
  out.recall /= n;
  out.decay /= n;
  return out;
}

std::optional<double> read_fps(const fs::path& dir) {
  std::ifstream in(dir / "timing.txt");
  if (!in) return std::nullopt;
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    if (line.substr(0, colon) == "frames_per_second") {
      try {
        return std::stod(line.substr(colon + 1));
      } catch (const std::exception&) {
        return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

double jaccard(const LabelMask& pred, const LabelMask& gt) {
  require_same_extent(pred, gt);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    const bool p = pred.labels[i] != 0, g = gt.labels[i] != 0;
    inter += (p && g) ? 1 : 0;
    uni += (p || g) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

LabelMask boundary_map(const LabelMask& mask) {
  LabelMask out(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask(x, y) == 0) continue;
      const bool edge = (x > 0 && mask(x - 1, y) == 0) || (x + 1 < mask.width && mask(x + 1, y) == 0) ||
                        (y > 0 && mask(x, y - 1) == 0) || (y + 1 < mask.height && mask(x, y + 1) == 0);
      out(x, y) = edge ? 1 : 0;
    }
  }
  return out;
}

namespace {

// Fraction of `from` boundary pixels with a `to` boundary pixel within tol.
double matched_fraction(const LabelMask& from, const LabelMask& to, int tol) {
  const int w = to.width, h = to.height;
  std::vector<std::size_t> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  auto at = [w](int x, int y) { return static_cast<std::size_t>(y) * (w + 1) + x; };
  for (int y = 0; y < h; ++y) {
    std::size_t row = 0;
    for (int x = 0; x < w; ++x) {
      row += to(x, y);
      sat[at(x + 1, y + 1)] = sat[at(x + 1, y)] + row;
    }
  }
  std::size_t total = 0, matched = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!from(x, y)) continue;
      ++total;
      const int x0 = std::max(0, x - tol), x1 = std::min(w, x + tol + 1);
      const int y0 = std::max(0, y - tol), y1 = std::min(h, y + tol + 1);
      const std::size_t hits = sat[at(x1, y1)] + sat[at(x0, y0)] - sat[at(x0, y1)] - sat[at(x1, y0)];
      if (hits > 0) ++matched;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(total);
}

bool any(const LabelMask& m) {
  return std::any_of(m.labels.begin(), m.labels.end(), [](std::uint8_t v) { return v != 0; });
}

}  // namespace

double boundary_f(const LabelMask& pred, const LabelMask& gt, int tolerance) {
  require_same_extent(pred, gt);
  if (tolerance < 0) throw Error(Errc::invalid_argument, "boundary tolerance must be >= 0");
  const bool pred_any = any(pred), gt_any = any(gt);
  if (!pred_any && !gt_any) return 1.0;
  if (!pred_any || !gt_any) return 0.0;

  const LabelMask bp = boundary_map(pred);
  const LabelMask bg = boundary_map(gt);
  const bool bp_any = any(bp), bg_any = any(bg);
  if (!bp_any && !bg_any) return 1.0;
  if (!bp_any || !bg_any) return 0.0;

  const double precision = matched_fraction(bp, bg, tolerance);
  const double recall = matched_fraction(bg, bp, tolerance);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

int default_boundary_tolerance(int width, int height) {
  const double diag = std::sqrt(static_cast<double>(width) * width + static_cast<double>(height) * height);
  return static_cast<int>(std::ceil(0.008 * diag));
}

SeriesStats sequence_stats(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::invalid_argument, "sequence_stats needs at least one value");
  const std::size_t n = values.size();
  SeriesStats s;
  s.mean = mean_of(values);
  s.recall = static_cast<double>(std::count_if(values.begin(), values.end(), [](double v) { return v > 0.5; })) /
             static_cast<double>(n);

  double first = 0.0, last = 0.0;
  if (n < 4) {
    // Too few values for four bins: bin i holds the single value at i*n/4.
    first = values[0];
    last = values[(3 * n) / 4];
  } else {
    const std::size_t base = n / 4, rem = n % 4;
    const std::size_t first_size = base + (rem > 0 ? 1 : 0);
    const std::size_t last_size = base;  // the last bin never receives a remainder
    first = mean_of(values.subspan(0, first_size));
    last = mean_of(values.subspan(n - last_size, last_size));
  }
  s.decay = first - last;
  return s;
}

SequenceMetrics evaluate_sequence(const std::string& name, const std::vector<LabelMask>& pred,
                                  const std::vector<LabelMask>& gt, std::optional<int> tolerance) {
  if (pred.size() != gt.size()) throw Error(Errc::shape_mismatch, name + ": prediction and ground-truth frame counts differ");
  if (gt.size() < 2) throw Error(Errc::invalid_argument, name + ": need at least two frames");
  for (std::size_t n = 0; n < gt.size(); ++n) {
    if (pred[n].width != gt[n].width || pred[n].height != gt[n].height) {
      throw Error(Errc::shape_mismatch, name + ": frame " + std::to_string(n) + " extent mismatch");
    }
  }
  const int tol = tolerance.value_or(default_boundary_tolerance(gt.front().width, gt.front().height));
  int objects = 0;
  for (const auto& m : gt) objects = std::max(objects, m.num_objects());

  SequenceMetrics seq;
  seq.name = name;
  seq.frames = gt.size();
  std::vector<SeriesStats> js, fs_;
  for (int id = 1; id <= objects; ++id) {
    ObjectMetrics obj;
    obj.object_id = id;
    for (std::size_t n = 1; n < gt.size(); ++n) {
      const LabelMask p = pred[n].binary(id);
      const LabelMask g = gt[n].binary(id);
      obj.j_series.push_back(jaccard(p, g));
      obj.f_series.push_back(boundary_f(p, g, tol));
    }
    obj.j = sequence_stats(obj.j_series);
    obj.f = sequence_stats(obj.f_series);
    js.push_back(obj.j);
    fs_.push_back(obj.f);
    seq.objects.push_back(std::move(obj));
  }
  seq.j = average(js);
  seq.f = average(fs_);
  return seq;
}

MetricsReport evaluate(const fs::path& pred_dir, const fs::path& gt_dir, std::optional<int> tolerance) {
  if (!fs::is_directory(gt_dir)) throw Error(Errc::file_not_found, "ground-truth directory " + gt_dir.string());
  if (!fs::is_directory(pred_dir)) throw Error(Errc::file_not_found, "prediction directory " + pred_dir.string());

  std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> sequences;
  if (!png_files(gt_dir).empty()) {
    sequences.push_back({gt_dir.filename().string(), {pred_dir, gt_dir}});
  } else {
    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(gt_dir)) {
      if (entry.is_directory() && !png_files(entry.path()).empty()) subdirs.push_back(entry.path());
    }
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& d : subdirs) sequences.push_back({d.filename().string(), {pred_dir / d.filename(), d}});
  }
  if (sequences.empty()) throw Error(Errc::file_not_found, "no ground-truth masks under " + gt_dir.string());

  MetricsReport report;
  std::vector<SeriesStats> js, fs_;
  std::vector<double> speeds;
  for (const auto& [name, dirs] : sequences) {
    const auto& [pdir, gdir] = dirs;
    std::vector<LabelMask> pred, gt;
    for (const auto& gt_file : png_files(gdir)) {
      const fs::path pred_file = pdir / gt_file.filename();
      if (!fs::exists(pred_file)) {
        throw Error(Errc::file_not_found, name + ": missing predicted frame " + pred_file.string());
      }
      gt.push_back(read_mask(gt_file));
      pred.push_back(read_mask(pred_file));
    }
    report.sequences.push_back(evaluate_sequence(name, pred, gt, tolerance));
    js.push_back(report.sequences.back().j);
    fs_.push_back(report.sequences.back().f);
    if (auto fps = read_fps(pdir)) speeds.push_back(*fps);
  }
  report.j = average(js);
  report.f = average(fs_);
  if (!speeds.empty()) report.frames_per_second = mean_of(speeds);
  return report;
}

std::string report_text(const MetricsReport& report) {
  std::ostringstream out;
  out << std::setprecision(6) << std::fixed;
  auto stats = [&](const std::string& prefix, const SeriesStats& j, const SeriesStats& f) {
    out << prefix << "J_mean: " << j.mean << '\n'
        << prefix << "J_recall: " << j.recall << '\n'
        << prefix << "J_decay: " << j.decay << '\n'
        << prefix << "F_mean: " << f.mean << '\n'
        << prefix << "F_recall: " << f.recall << '\n'
        << prefix << "F_decay: " << f.decay << '\n';
  };
  out << "sequences: " << report.sequences.size() << '\n';
  stats("", report.j, report.f);
  if (report.frames_per_second) out << "frames_per_second: " << *report.frames_per_second << '\n';
  for (const auto& seq : report.sequences) {
    const std::string prefix = "sequence." + seq.name + ".";
    out << prefix << "frames: " << seq.frames << '\n';
    stats(prefix, seq.j, seq.f);
    for (const auto& obj : seq.objects) {
      stats(prefix + "object." + std::to_string(obj.object_id) + ".", obj.j, obj.f);
    }
  }
  return out.str();
}

std::string report_json(const MetricsReport& report) {
  using nlohmann::json;
  auto stats = [](const SeriesStats& s) { return json{{"mean", s.mean}, {"recall", s.recall}, {"decay", s.decay}}; };
  json root;
  root["J"] = stats(report.j);
  root["F"] = stats(report.f);
  root["frames_per_second"] = report.frames_per_second ? json(*report.frames_per_second) : json(nullptr);
  root["sequences"] = json::array();
  for (const auto& seq : report.sequences) {
    json s{{"name", seq.name}, {"frames", seq.frames}, {"J", stats(seq.j)}, {"F", stats(seq.f)}};
    s["objects"] = json::array();
    for (const auto& obj : seq.objects) {
      s["objects"].push_back({{"id", obj.object_id},
                              {"J", stats(obj.j)},
                              {"F", stats(obj.f)},
                              {"J_per_frame", obj.j_series},
                              {"F_per_frame", obj.f_series}});
    }
    root["sequences"].push_back(std::move(s));
  }
  return root.dump(2) + "\n";
}

}  // namespace sdf

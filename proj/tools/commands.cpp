#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdforest/bounds.hpp"
#include "sdforest/config.hpp"
#include "sdforest/error.hpp"
#include "sdforest/features.hpp"
#include "sdforest/metrics.hpp"
#include "sdforest/pipeline.hpp"
#include "sdforest/tensor_io.hpp"

namespace sdf::cli {
namespace {

namespace fs = std::filesystem;

std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::file_not_found, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return files;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::io_error, "cannot write " + path.string());
  os << text;
  if (!os) throw Error(Errc::io_error, "failed writing " + path.string());
}

std::string format_timings(const StageTimings& t) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "frames: " << t.frames << '\n'
     << "features_ms: " << t.features_ms << '\n'
     << "fit_ms: " << t.fit_ms << '\n'
     << "tracking_ms: " << t.tracking_ms << '\n'
     << "confidence_ms: " << t.confidence_ms << '\n'
     << "superpixel_ms: " << t.superpixel_ms << '\n'
     << "filter_ms: " << t.filter_ms << '\n'
     << "threshold_ms: " << t.threshold_ms << '\n'
     << "total_ms: " << t.total_ms() << '\n'
     << "frames_per_second: " << t.frames_per_second() << '\n';
  return os.str();
}

// ---------------------------------------------------------------- segment

struct SegmentArgs {
  std::string frames;
  std::string mask;
  std::string out;
  std::string features;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  bool dump_confidence = false;
};

int cmd_segment(const SegmentArgs& a, std::ostream& out) {
  RunConfig cfg;
  if (!a.config.empty()) cfg.merge_file(a.config);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(Errc::invalid_argument, "--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed) cfg.seed = *a.seed;
  cfg.pipeline.keep_confidence = a.dump_confidence;

  const auto frame_paths = list_pngs(a.frames);
  if (frame_paths.empty()) throw Error(Errc::file_not_found, "no PNG frames in " + a.frames);
  if (!fs::exists(a.mask)) throw Error(Errc::file_not_found, "prompt mask " + a.mask + " does not exist");
  const LabelMask prompt = read_mask(a.mask);

  std::vector<ImageFrame> frames;
  frames.reserve(frame_paths.size());
  for (const auto& p : frame_paths) frames.push_back(read_image(p));

  FeatureProvider provider;
  if (!a.features.empty()) {
    const fs::path dir = a.features;
    auto expected_channels = std::make_shared<int>(-1);
    provider = [dir, &frame_paths, expected_channels](std::size_t n, const ImageFrame& frame) {
      const std::string name = frame_paths[n].filename().string();
      const fs::path tensor_path = dir / (frame_paths[n].stem().string() + kTensorExtension);
      FeatureMap map;
      try {
        map = load_external_features(tensor_path, frame.height, frame.width);
      } catch (const Error& e) {
        throw Error(e.code(), "frame " + name + ": " + e.what());
      }
      if (*expected_channels < 0) *expected_channels = map.channels;
      if (map.channels != *expected_channels) {
        throw Error(Errc::shape_mismatch, "frame " + name + ": expected " + std::to_string(*expected_channels) +
                                              " feature channels, got " + std::to_string(map.channels));
      }
      return map;
    };
  }

  const SequenceResult result = run_sequence(frames, prompt, cfg.pipeline, cfg.seed, provider);

  const fs::path out_dir = a.out;
  fs::create_directories(out_dir);
  for (std::size_t n = 0; n < frames.size(); ++n) write_mask(result.masks[n], out_dir / frame_paths[n].filename());
  if (a.dump_confidence) {
    const fs::path conf_dir = out_dir / "confidence";
    fs::create_directories(conf_dir);
    for (std::size_t n = 0; n < result.confidences.size(); ++n) {
      const auto& maps = result.confidences[n];
      Tensor t;
      t.dims = {static_cast<std::uint32_t>(maps.size()), static_cast<std::uint32_t>(prompt.height),
                static_cast<std::uint32_t>(prompt.width)};
      t.data.reserve(t.element_count());
      for (const auto& m : maps) {
        for (double v : m.data) t.data.push_back(static_cast<float>(v));
      }
      write_tensor(t, conf_dir / (frame_paths[n].stem().string() + kTensorExtension));
    }
  }
  write_text_file(out_dir / "timing.txt", format_timings(result.timings));
  write_text_file(out_dir / "config.txt", cfg.to_text());
  out << "segmented " << frames.size() << " frames into " << out_dir.string() << " ("
      << std::fixed << std::setprecision(2) << result.timings.frames_per_second() << " fps)\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const std::string& pred, const std::string& gt, const std::string& report_path,
             std::optional<int> tolerance, std::ostream& out) {
  const MetricsReport report = evaluate(pred, gt, tolerance);
  const std::string text = report_text(report);
  write_text_file(report_path, text);
  write_text_file(report_path + ".json", report_json(report));
  out << text;
  return kExitOk;
}

// ---------------------------------------------------------------- features

int cmd_features(const std::string& frames_dir, const std::string& out_dir, std::ostream& out) {
  const auto frame_paths = list_pngs(frames_dir);
  fs::create_directories(out_dir);
  for (const auto& p : frame_paths) {
    const FeatureMap map = handcrafted_features(read_image(p));
    write_tensor(to_tensor(map), fs::path(out_dir) / (p.stem().string() + kTensorExtension));
  }
  out << "wrote " << frame_paths.size() << " feature tensors (" << kHandcraftedChannels << " channels) to "
      << out_dir << '\n';
  return kExitOk;
}

int cmd_inspect(const std::string& path, std::ostream& out) {
  const Tensor t = read_tensor(path);
  out << "dims:";
  for (auto d : t.dims) out << ' ' << d;
  out << '\n' << "elements: " << t.element_count() << '\n';
  if (!t.data.empty()) {
    const auto [lo, hi] = std::minmax_element(t.data.begin(), t.data.end());
    out << std::setprecision(9) << "min: " << *lo << '\n' << "max: " << *hi << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- viz

int cmd_viz(const std::string& input, const std::string& output, int channel, std::ostream& out) {
  const Tensor t = read_tensor(input);
  std::uint32_t planes = 1, h = 0, w = 0;
  if (t.dims.size() == 2) {
    h = t.dims[0];
    w = t.dims[1];
  } else if (t.dims.size() == 3) {
    planes = t.dims[0];
    h = t.dims[1];
    w = t.dims[2];
  } else {
    throw Error(Errc::unsupported_format, "viz expects a [H,W] or [C,H,W] tensor");
  }
  if (channel < 0 || static_cast<std::uint32_t>(channel) >= planes) {
    throw Error(Errc::invalid_argument, "channel " + std::to_string(channel) + " out of range");
  }
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<std::uint8_t> pixels(plane);
  for (std::size_t i = 0; i < plane; ++i) {
    const double v = std::clamp(static_cast<double>(t.data[channel * plane + i]), 0.0, 1.0);
    pixels[i] = static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
  }
  write_gray_png(static_cast<int>(w), static_cast<int>(h), pixels, output);
  out << "wrote " << w << "x" << h << " heatmap to " << output << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- bounds

void print_breakdown(const bounds::Breakdown& b, const std::string& title, std::ostream& out) {
  std::size_t width = 5;
  for (const auto& t : b.terms) width = std::max(width, t.name.size());
  out << title << '\n';
  for (const auto& t : b.terms) {
    out << "  " << std::left << std::setw(static_cast<int>(width)) << t.name << "  " << std::setprecision(10)
        << t.value << '\n';
  }
  out << "  " << std::left << std::setw(static_cast<int>(width)) << "total" << "  " << std::setprecision(10)
      << b.total << '\n';
  out << "note: natural logarithms; asymptotic O/Omega constants set to 1 unless given, so values are "
         "comparative, not certified.\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SDForest video object segmentation", "sdforest"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  SegmentArgs seg;
  auto* segment = app.add_subcommand("segment", "Segment a frame sequence from a first-frame mask");
  segment->add_option("--frames", seg.frames, "Directory of PNG frames (lexicographic order)")->required();
  segment->add_option("--mask", seg.mask, "First-frame label mask PNG")->required();
  segment->add_option("--out", seg.out, "Output directory for masks and timing.txt")->required();
  segment->add_option("--features", seg.features, "Directory of <frame stem>.sdft feature tensors");
  segment->add_option("--config", seg.config, "key = value configuration file");
  segment->add_option("--seed", seg.seed, "Random seed (overrides the config file)");
  segment->add_option("--set", seg.overrides, "Override one config key (key=value); repeatable");
  segment->add_flag("--dump-confidence", seg.dump_confidence, "Also write per-frame confidence tensors");

  std::string pred_dir, gt_dir, report_path;
  std::optional<int> tolerance;
  auto* eval = app.add_subcommand("eval", "Compute J/F statistics of predictions against ground truth");
  eval->add_option("--pred", pred_dir, "Predicted masks directory")->required();
  eval->add_option("--gt", gt_dir, "Ground-truth masks directory")->required();
  eval->add_option("--report", report_path, "Report file (a .json twin is written alongside)")->required();
  eval->add_option("--tolerance", tolerance, "Boundary tolerance in pixels (default: 0.8% of the diagonal)")
      ->check(CLI::NonNegativeNumber);

  std::string feat_frames, feat_out, feat_inspect;
  auto* features = app.add_subcommand("features", "Export handcrafted feature tensors or inspect a tensor");
  auto* feat_frames_opt = features->add_option("--frames", feat_frames, "Directory of PNG frames");
  auto* feat_out_opt = features->add_option("--out", feat_out, "Output directory for .sdft tensors");
  auto* feat_inspect_opt = features->add_option("--inspect", feat_inspect, "Print the header and range of a tensor");
  feat_frames_opt->needs(feat_out_opt);
  feat_out_opt->needs(feat_frames_opt);
  feat_inspect_opt->excludes(feat_frames_opt);

  std::string viz_in, viz_out;
  int viz_channel = 0;
  auto* viz = app.add_subcommand("viz", "Render a confidence tensor as a grayscale PNG (v*255, round half up)");
  viz->add_option("--input", viz_in, "Tensor with dims [H,W] or [C,H,W]")->required();
  viz->add_option("--out", viz_out, "Output PNG")->required();
  viz->add_option("--channel", viz_channel, "Plane to render for [C,H,W] input");

  auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate the generalisation bounds");
  bounds_cmd->require_subcommand(1);

  double tree_q = 1000, tree_j = 219, tree_m = 82335, tree_delta = 0.05;
  auto* tree = bounds_cmd->add_subcommand("tree", "Decision-tree gap sqrt(((Q+1) ln(J+3) + ln(2/delta)) / 2m)");
  tree->add_option("-Q,--nodes", tree_q, "Tree node count Q")->capture_default_str();
  tree->add_option("-J,--feature-dim", tree_j, "Feature dimension J")->capture_default_str();
  tree->add_option("-m,--samples", tree_m, "Training samples m")->capture_default_str();
  tree->add_option("--delta", tree_delta, "Failure probability delta")->capture_default_str();

  double vc_w = 2.3e7, vc_u = 50, vc_c = 1;
  std::optional<double> vc_m;
  double vc_delta = 0.05;
  auto* vc = bounds_cmd->add_subcommand("vc", "ReLU network VC lower bound c W U ln(W/U)");
  vc->add_option("-W,--weights", vc_w, "Weight count")->capture_default_str();
  vc->add_option("-U,--layers", vc_u, "Layer count")->capture_default_str();
  vc->add_option("-c,--constant", vc_c, "Omega constant")->capture_default_str();
  vc->add_option("-m,--samples", vc_m, "If given, also report the gap with this VC dimension");
  vc->add_option("--delta", vc_delta, "Failure probability delta")->capture_default_str();

  double mm_logz = 0, mm_m = 100, mm_b = 2, mm_c = 1, mm_rm = 0, mm_delta = 0.05;
  auto* margin = bounds_cmd->add_subcommand("margin", "Max-margin Rademacher bound");
  margin->add_option("--logz", mm_logz, "log Z_w")->capture_default_str();
  margin->add_option("-m,--samples", mm_m, "Training samples m")->capture_default_str();
  margin->add_option("-B,--weight-norm", mm_b, "Weight norm bound B (> e/4)")->capture_default_str();
  margin->add_option("-C,--loss-bound", mm_c, "Loss bound C")->capture_default_str();
  margin->add_option("--rademacher", mm_rm, "Empirical Rademacher complexity R_m")->capture_default_str();
  margin->add_option("--delta", mm_delta, "Failure probability delta")->capture_default_str();

  bounds::DiversityInputs div;
  auto* diversity = bounds_cmd->add_subcommand("diversity", "Gaussian-complexity bound under (nu,eps)-diversity");
  diversity->add_option("--train-error", div.train_error, "Empirical training error")->capture_default_str();
  diversity->add_option("-L,--lipschitz", div.lipschitz, "Lipschitz constant L")->capture_default_str();
  diversity->add_option("--nu", div.nu, "Diversity parameter nu (> 0)")->capture_default_str();
  diversity->add_option("-K,--tasks", div.tasks, "Number of tasks K")->capture_default_str();
  diversity->add_option("-m,--samples", div.samples, "Samples per task m")->capture_default_str();
  diversity->add_option("-C,--loss-bound", div.loss_bound, "Loss bound C")->capture_default_str();
  diversity->add_option("-D,--feature-norm", div.feature_norm, "Feature norm bound D")->capture_default_str();
  diversity->add_option("-G,--gaussian", div.gaussian_complexity, "Gaussian complexity G_F")
      ->capture_default_str();
  diversity->add_option("--delta", div.delta, "Failure probability delta")->capture_default_str();
  diversity->add_option("-c,--constant", div.constant, "O constant")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (segment->parsed()) return cmd_segment(seg, out);
    if (eval->parsed()) return cmd_eval(pred_dir, gt_dir, report_path, tolerance, out);
    if (features->parsed()) {
      if (!feat_inspect.empty()) return cmd_inspect(feat_inspect, out);
      if (feat_frames.empty()) {
        err << "features: give --frames and --out, or --inspect\n";
        return kExitUsage;
      }
      return cmd_features(feat_frames, feat_out, out);
    }
    if (viz->parsed()) return cmd_viz(viz_in, viz_out, viz_channel, out);
    if (tree->parsed()) {
      print_breakdown(bounds::tree_generalization_breakdown(tree_q, tree_j, tree_m, tree_delta),
                      "tree generalisation gap", out);
      return kExitOk;
    }
    if (vc->parsed()) {
      const double dim = bounds::relu_vc_lower_bound(vc_w, vc_u, vc_c);
      bounds::Breakdown b;
      b.terms = {{"vc_lower_bound", dim}};
      b.total = dim;
      if (vc_m) {
        const double gap = bounds::vc_generalization_gap(dim, *vc_m, vc_delta);
        b.terms.push_back({"generalisation_gap", gap});
      }
      print_breakdown(b, "ReLU network VC lower bound", out);
      return kExitOk;
    }
    if (margin->parsed()) {
      print_breakdown(bounds::maxmargin_bound(mm_logz, mm_m, mm_b, mm_c, mm_rm, mm_delta), "max-margin bound", out);
      return kExitOk;
    }
    if (diversity->parsed()) {
      print_breakdown(bounds::diversity_bound(div), "diversity bound", out);
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace sdf::cli

#include "sdforest/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "sdforest/error.hpp"

namespace sdf {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw Error(Errc::invalid_argument, key + ": expected a number, got '" + v + "'");
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(Errc::invalid_argument, key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(Errc::invalid_argument, key + ": expected a boolean, got '" + v + "'");
}

int as_int(const std::string& key, const std::string& v, long long lo) {
  const long long n = parse_int(key, v);
  if (n < lo || n > std::numeric_limits<int>::max()) {
    throw Error(Errc::invalid_argument, key + ": value out of range");
  }
  return static_cast<int>(n);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long n = parse_int(k, v);
         if (n < 0) throw Error(Errc::invalid_argument, k + ": must be >= 0");
         c.seed = static_cast<std::uint64_t>(n);
       }},
      {"sampler.stride", [](RunConfig& c, const std::string& k, const std::string& v) { c.pipeline.sampler_stride = as_int(k, v, 1); }},
      {"forest.trees", [](RunConfig& c, const std::string& k, const std::string& v) { c.pipeline.forest.trees = as_int(k, v, 1); }},
      {"forest.max_depth", [](RunConfig& c, const std::string& k, const std::string& v) { c.pipeline.forest.max_depth = as_int(k, v, 0); }},
      {"forest.bootstrap", [](RunConfig& c, const std::string& k, const std::string& v) { c.pipeline.forest.bootstrap = parse_bool(k, v); }},
      {"linear.l2", [](RunConfig& c, const std::string& k, const std::string& v) { c.pipeline.linear.l2 = parse_double(k, v); }},
      {"linear.tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.pipeline.linear.tol = parse_double(k, v); }},
      {"linear.max_iters", [](RunConfig& c, const std::string& k, const std::string& v) { c.pipeline.linear.max_iters = as_int(k, v, 0); }},
      {"ensemble.forest_weight", [](RunConfig& c, const std::string& k, const std::string& v) {
         const double w = parse_double(k, v);
         if (w < 0.0 || w > 1.0) throw Error(Errc::invalid_argument, k + ": must lie in [0,1]");
         c.pipeline.forest_weight = w;
       }},
      {"threshold", [](RunConfig& c, const std::string& k, const std::string& v) {
         const double t = parse_double(k, v);
         if (!(t > 0.0 && t < 1.0)) throw Error(Errc::invalid_argument, k + ": must lie in (0,1)");
         c.pipeline.threshold = t;
       }},
      {"tracker.scale", [](RunConfig& c, const std::string& k, const std::string& v) {
         const double s = parse_double(k, v);
         if (!(s > 0.0)) throw Error(Errc::invalid_argument, k + ": must be positive");
         c.pipeline.tracker_scale = s;
       }},
      {"slic.k", [](RunConfig& c, const std::string& k, const std::string& v) { c.pipeline.slic.k = as_int(k, v, 1); }},
      {"slic.compactness", [](RunConfig& c, const std::string& k, const std::string& v) { c.pipeline.slic.compactness = parse_double(k, v); }},
      {"slic.iters", [](RunConfig& c, const std::string& k, const std::string& v) { c.pipeline.slic.iters = as_int(k, v, 1); }},
      {"pooling.blend", [](RunConfig& c, const std::string& k, const std::string& v) {
         const double b = parse_double(k, v);
         if (b < 0.0 || b > 1.0) throw Error(Errc::invalid_argument, k + ": must lie in [0,1]");
         c.pipeline.pooling_blend = b;
       }},
      {"igf.radius", [](RunConfig& c, const std::string& k, const std::string& v) { c.pipeline.igf.radius = as_int(k, v, 1); }},
      {"igf.eps", [](RunConfig& c, const std::string& k, const std::string& v) {
         const double e = parse_double(k, v);
         if (e < 0.0) throw Error(Errc::invalid_argument, k + ": must be >= 0");
         c.pipeline.igf.eps = e;
       }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
  }();
  return names;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw Error(Errc::invalid_argument, "unknown config key '" + key + "'");
  it->second(*this, key, trim(value));
}

void RunConfig::merge_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::invalid_argument, origin + ":" + std::to_string(number) + ": expected key = value");
    }
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::file_not_found, "config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  merge_text(text.str(), path.string());
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  out.precision(17);
  const auto& p = pipeline;
  out << "seed = " << seed << '\n'
      << "sampler.stride = " << p.sampler_stride << '\n'
      << "forest.trees = " << p.forest.trees << '\n'
      << "forest.max_depth = " << p.forest.max_depth << '\n'
      << "forest.bootstrap = " << (p.forest.bootstrap ? "true" : "false") << '\n'
      << "linear.l2 = " << p.linear.l2 << '\n'
      << "linear.tol = " << p.linear.tol << '\n'
      << "linear.max_iters = " << p.linear.max_iters << '\n'
      << "ensemble.forest_weight = " << p.forest_weight << '\n'
      << "threshold = " << p.threshold << '\n'
      << "tracker.scale = " << p.tracker_scale << '\n'
      << "slic.k = " << p.slic.k << '\n'
      << "slic.compactness = " << p.slic.compactness << '\n'
      << "slic.iters = " << p.slic.iters << '\n'
      << "pooling.blend = " << p.pooling_blend << '\n'
      << "igf.radius = " << p.igf.radius << '\n'
      << "igf.eps = " << p.igf.eps << '\n';
  return out.str();
}

}  // namespace sdf

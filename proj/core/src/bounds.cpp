#include "sdforest/bounds.hpp"

#include <cmath>
#include <numbers>

#include "sdforest/error.hpp"

namespace sdf::bounds {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(Errc::invalid_argument, what);
}

void check_delta(double delta) { require(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)"); }
void check_samples(double m) { require(m >= 1.0 && std::isfinite(m), "sample count m must be >= 1"); }

Breakdown sum_of(std::vector<Term> terms) {
  Breakdown b;
  b.terms = std::move(terms);
  for (const auto& t : b.terms) b.total += t.value;
  return b;
}

}  // namespace

double tree_capacity(double nodes, double feature_dim) {
  require(nodes >= 0.0 && feature_dim >= 0.0, "Q and J must be >= 0");
  return (nodes + 1.0) * std::log(feature_dim + 3.0);
}

double tree_generalization_gap(double nodes, double feature_dim, double samples, double delta) {
  check_delta(delta);
  check_samples(samples);
  return std::sqrt((tree_capacity(nodes, feature_dim) + std::log(2.0 / delta)) / (2.0 * samples));
}

Breakdown tree_generalization_breakdown(double nodes, double feature_dim, double samples, double delta) {
  const double gap = tree_generalization_gap(nodes, feature_dim, samples, delta);
  Breakdown b;
  b.terms = {{"capacity (Q+1)ln(J+3)", tree_capacity(nodes, feature_dim)},
             {"confidence ln(2/delta)", std::log(2.0 / delta)},
             {"denominator 2m", 2.0 * samples},
             {"gap", gap}};
  b.total = gap;
  return b;
}

double relu_vc_lower_bound(double weights, double layers, double constant) {
  require(layers >= 1.0, "layer count U must be >= 1");
  require(weights > layers, "weight count W must exceed layer count U");
  require(constant > 0.0, "asymptotic constant must be positive");
  return constant * weights * layers * std::log(weights / layers);
}

double vc_generalization_gap(double vc_dimension, double samples, double delta) {
  check_delta(delta);
  check_samples(samples);
  require(vc_dimension >= 0.0, "VC dimension must be >= 0");
  return std::sqrt((vc_dimension + std::log(2.0 / delta)) / (2.0 * samples));
}

Breakdown maxmargin_bound(double log_z, double samples, double weight_norm, double loss_bound, double rademacher,
                          double delta) {
  check_delta(delta);
  check_samples(samples);
  require(weight_norm > std::numbers::e / 4.0, "B must exceed e/4 so that ln ln(4B) > 0");
  require(log_z >= 0.0 && loss_bound >= 0.0 && rademacher >= 0.0, "logZ, C and R_m must be >= 0");
  const double m = samples;
  return sum_of({{"logZ/m", log_z / m},
                 {"8 B C R_m", 8.0 * weight_norm * loss_bound * rademacher},
                 {"sqrt(ln ln 4B)/sqrt(m)", std::sqrt(std::log(std::log(4.0 * weight_norm))) / std::sqrt(m)},
                 {"sqrt(ln(2/delta))/sqrt(2m)", std::sqrt(std::log(2.0 / delta)) / std::sqrt(2.0 * m)}});
}

Breakdown diversity_bound(const DiversityInputs& in) {
  check_delta(in.delta);
  check_samples(in.samples);
  require(in.nu > 0.0, "nu must be positive");
  require(in.tasks >= 1.0, "task count K must be >= 1");
  require(in.lipschitz >= 0.0 && in.loss_bound >= 0.0 && in.feature_norm >= 0.0 && in.gaussian_complexity >= 0.0 &&
              in.train_error >= 0.0 && in.constant > 0.0,
          "diversity inputs must be non-negative");
  const double log_term = std::log(2.0 / in.delta);
  const double c = in.constant;
  const double L = in.lipschitz, K = in.tasks, nu = in.nu;
  return sum_of({{"train error", in.train_error},
                 {"L^2 ln(K)/nu", c * L * L * std::log(K) / nu},
                 {"L G(F)", c * L * in.gaussian_complexity},
                 {"(C/nu) sqrt(ln(2/delta)/K)", c * (in.loss_bound / nu) * std::sqrt(log_term / K)},
                 {"sqrt(ln(2/delta)/m)", c * std::sqrt(log_term / in.samples)},
                 {"L D/(nu K^2)", c * L * in.feature_norm / (nu * K * K)}});
}

}  // namespace sdf::bounds

#pragma once

#include <string>
#include <vector>

namespace sdf::bounds {

// Generalisation-gap calculators. All logarithms are natural; asymptotic
// O/Omega constants are explicit parameters defaulting to 1, so the values
// are comparative rather than certified.

struct Term {
  std::string name;
  double value = 0.0;
};

struct Breakdown {
  std::vector<Term> terms;
  double total = 0.0;
};

/// sqrt(((n+1) ln(J+3) + ln(2/delta)) / (2m)) for a tree with n = Q nodes.
double tree_generalization_gap(double nodes, double feature_dim, double samples, double delta);
Breakdown tree_generalization_breakdown(double nodes, double feature_dim, double samples, double delta);

/// (Q+1) ln(J+3): the capacity numerator of the tree gap.
double tree_capacity(double nodes, double feature_dim);

/// c * W * U * ln(W/U), the ReLU-network VC lower bound.
double relu_vc_lower_bound(double weights, double layers, double constant = 1.0);

/// Same gap form as the tree bound with a VC dimension in the numerator.
double vc_generalization_gap(double vc_dimension, double samples, double delta);

/// logZ/m + 8 B C R_m + sqrt(ln ln(4B))/sqrt(m) + sqrt(ln(2/delta))/sqrt(2m).
/// Requires B > e/4 so that ln ln(4B) > 0.
Breakdown maxmargin_bound(double log_z, double samples, double weight_norm, double loss_bound,
                          double rademacher, double delta);

struct DiversityInputs {
  double train_error = 0.0;
  double lipschitz = 0.0;
  double nu = 1.0;
  double tasks = 1.0;  // K
  double samples = 1.0;
  double loss_bound = 0.0;     // C
  double feature_norm = 0.0;   // D
  double gaussian_complexity = 0.0;
  double delta = 0.05;
  double constant = 1.0;  // the O(.) constant
};

/// train_err + c (L^2 ln K / nu + L G + (C/nu) sqrt(ln(2/delta)/K)
///               + sqrt(ln(2/delta)/m) + L D / (nu K^2)).
Breakdown diversity_bound(const DiversityInputs& in);

}  // namespace sdf::bounds

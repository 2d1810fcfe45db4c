#pragma once

#include <vector>

#include "stochlab/armodel.hpp"
#include "stochlab/finstoch.hpp"
#include "stochlab/linalg.hpp"

namespace stochlab {

/// Relative eigenvalue cutoff separating genuine null directions from
/// round-off when counting the rank of a pullback metric.
inline constexpr double kRankTolerance = 1e-8;

/// Simplex floor below which chart computations refuse to proceed.
inline constexpr double kSimplexFloor = 1e-12;

/// Fisher-Rao pullback of the head map at a hidden state: the expected
/// outer product of the score with respect to h.
struct PullbackMetric {
  std::vector<double> at;           // the hidden state h
  Matrix matrix;                    // d_model x d_model, symmetric PSD
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // columns pair with eigenvalues
  std::size_t rank = 0;             // eigenvalues above kRankTolerance * max
};

/// Fisher-Rao matrix in the chart given by the first |V|-1 probabilities:
/// g_ij = delta_ij / p_i + 1 / p_n. Requires full support.
Matrix fisher_rao_matrix(const Distribution& p);

/// Jacobian of the head map, d p(w) / d h_a = p(w) (W_{w,a} - sum_w' p(w') W_{w',a}).
/// Full |V| x d_model form; every column sums to zero.
Matrix head_jacobian(const ArModel& model, const std::vector<double>& h);

PullbackMetric pullback_metric(const ArModel& model, const std::vector<double>& h);

struct ExpansionReport {
  std::vector<double> epsilons;
  std::vector<double> kl_values;        // KL(p_{h+eps v} || p_h)
  std::vector<double> residuals;        // kl - 0.5 eps^2 v' g* v
  std::vector<double> residual_ratios;  // residual / eps^3
  double quadratic_form = 0.0;          // v' g*(h) v
  /// Log-log slope of |residual| against eps; +inf when the residuals sit
  /// below the numerical floor (better than cubic).
  double loglog_slope = 0.0;
};

/// Checks the local KL expansion KL(p_{h+eps v} || p_h) = eps^2/2 v'g*v + O(eps^3)
/// at the given direction (normalized internally) and epsilons.
ExpansionReport verify_local_expansion(const ArModel& model, const std::vector<double>& h,
                                       const std::vector<double>& direction,
                                       const std::vector<double>& epsilons);

/// Max elementwise discrepancy between the score-outer-product form of g*
/// and the chart form J' g_FR J. Requires full support.
double pullback_consistency(const ArModel& model, const std::vector<double>& h);

/// Context-averaged pullback metric sum_x mu(x) g*(h_x).
Matrix averaged_pullback_metric(const ArModel& model, const DataProcess& proc);

}  // namespace stochlab

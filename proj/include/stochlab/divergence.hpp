#pragma once

#include <string>
#include <vector>

#include "stochlab/finstoch.hpp"

namespace stochlab {

/// Statistical divergences between distributions on the same space.
/// All values are in nats. Bhattacharyya is the similarity coefficient
/// (1 at equality, 0 on disjoint supports); every other kind is a proper
/// divergence (0 iff equal, DPI-monotone).
enum class DivergenceTag {
  kl,
  total_variation,
  hellinger_sq,
  bhattacharyya,
  jensen_shannon,
  renyi,
};

struct DivergenceKind {
  DivergenceTag tag = DivergenceTag::kl;
  double alpha = 0.0;  // Renyi order; > 0 and != 1

  static DivergenceKind kl() { return {DivergenceTag::kl, 0.0}; }
  static DivergenceKind total_variation() { return {DivergenceTag::total_variation, 0.0}; }
  static DivergenceKind hellinger_sq() { return {DivergenceTag::hellinger_sq, 0.0}; }
  static DivergenceKind bhattacharyya() { return {DivergenceTag::bhattacharyya, 0.0}; }
  static DivergenceKind jensen_shannon() { return {DivergenceTag::jensen_shannon, 0.0}; }
  static DivergenceKind renyi(double alpha);

  std::string name() const;
  static DivergenceKind parse(const std::string& name);
};

/// True for the kinds that satisfy "zero iff equal" and the DPI in the
/// usual decreasing form; false for the Bhattacharyya coefficient.
bool is_proper_divergence(const DivergenceKind& kind);

/// The +infinity sentinel returned on absolute-continuity failure.
double infinity_sentinel() noexcept;

double divergence(const DivergenceKind& kind, const Distribution& p, const Distribution& q);

double joint_divergence(const DivergenceKind& kind, const Joint& j1, const Joint& j2);

/// Bhattacharyya coefficient sum_i sqrt(p_i q_i).
double bhattacharyya_coefficient(const Distribution& p, const Distribution& q);

/// Squared Hellinger distance, normalized convention: 1 - BC, range [0, 1].
double hellinger_sq_normalized(const Distribution& p, const Distribution& q);

/// Squared Hellinger distance, unnormalized convention: 2 (1 - BC), range [0, 2].
double hellinger_sq_unnormalized(const Distribution& p, const Distribution& q);

/// Weighted mean that refuses to silently average an infinite value:
/// raises infinite_average when a term with positive weight is non-finite.
double checked_weighted_mean(const std::vector<double>& values,
                             const std::vector<double>& weights);

/// Shannon entropy -sum p log p in nats (independent of the divergence path;
/// used as an oracle and for data-side conditional entropies).
double shannon_entropy(const std::vector<double>& weights);
inline double shannon_entropy(const Distribution& p) { return shannon_entropy(p.weights()); }

}  // namespace stochlab

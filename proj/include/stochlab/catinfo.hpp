#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "stochlab/divergence.hpp"
#include "stochlab/finstoch.hpp"

namespace stochlab {

/// Per-point and averaged categorical entropy of a kernel under a weighting
/// of its source. per_point covers the support of the weighting only.
struct EntropyReport {
  std::map<std::string, double> per_point;  // source label -> nats
  double average = 0.0;
  DivergenceKind kind;
  Distribution weighting;
};

struct SurplusReport {
  double mi_full = 0.0;    // I_D(H; W_{t:t+K-1}), nats
  double mi_single = 0.0;  // I_D(H; W_t), nats
  double surplus = 0.0;    // mi_full - mi_single
  std::size_t horizon = 1;
};

/// Categorical entropy of one kernel row: divergence between the
/// copy-after-sample joint and the sample-twice joint of that row.
double categorical_entropy_point(const Kernel& k, std::size_t x, const DivergenceKind& kind);
double categorical_entropy_point(const Kernel& k, const std::string& x,
                                 const DivergenceKind& kind);

/// Categorical entropy of a bare distribution (the kernel row in isolation).
double categorical_entropy(const Distribution& p, const DivergenceKind& kind);

EntropyReport average_categorical_entropy(const Kernel& k, const Distribution& weighting,
                                          const DivergenceKind& kind);

/// Divergence between a joint and the product of its own marginals.
double categorical_mutual_information(const Joint& j, const DivergenceKind& kind);

/// DPI slack: divergence(p, q) - divergence(p k, q k). Contract: >= -1e-12
/// for proper divergence kinds. Defined as +infinity when the input
/// divergence is already infinite.
double dpi_audit(const Distribution& p, const Distribution& q, const Kernel& k,
                 const DivergenceKind& kind);

/// Information surplus of a joint over H x V^K: mutual information with the
/// full K-token future minus mutual information with the first token alone.
/// The right space of `joint_full` must be the K-fold power of `vocab`.
SurplusReport information_surplus(const Joint& joint_full, const SpacePtr& vocab,
                                  std::size_t horizon, const DivergenceKind& kind);

/// Marginalize the future block onto its first coordinate (the deterministic
/// projection V^K -> V).
Joint project_future_to_first(const Joint& joint_full, const SpacePtr& vocab,
                              std::size_t horizon);

}  // namespace stochlab

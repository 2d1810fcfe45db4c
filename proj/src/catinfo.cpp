#include "stochlab/catinfo.hpp"

#include <cmath>

namespace stochlab {

double categorical_entropy(const Distribution& p, const DivergenceKind& kind) {
  return joint_divergence(kind, diagonal_pair(p), independent_pair(p));
}

double categorical_entropy_point(const Kernel& k, std::size_t x, const DivergenceKind& kind) {
  if (x >= k.source()->size()) {
    raise(Errc::unknown_element, "categorical_entropy_point: index out of range");
  }
  return categorical_entropy(k.row_distribution(x), kind);
}

double categorical_entropy_point(const Kernel& k, const std::string& x,
                                 const DivergenceKind& kind) {
  return categorical_entropy_point(k, k.source()->index_of(x), kind);
}

EntropyReport average_categorical_entropy(const Kernel& k, const Distribution& weighting,
                                          const DivergenceKind& kind) {
  if (!same_space(weighting.space(), k.source())) {
    raise(Errc::space_mismatch, "average_categorical_entropy: weighting space != kernel source");
  }
  EntropyReport report{{}, 0.0, kind, weighting};
  std::vector<double> values;
  std::vector<double> weights;
  values.reserve(k.source()->size());
  weights.reserve(k.source()->size());
  for (std::size_t x = 0; x < k.source()->size(); ++x) {
    if (weighting[x] == 0.0) {
      continue;
    }
    const double psi = categorical_entropy_point(k, x, kind);
    report.per_point[k.source()->label(x)] = psi;
    values.push_back(psi);
    weights.push_back(weighting[x]);
  }
  report.average = checked_weighted_mean(values, weights);
  return report;
}

double categorical_mutual_information(const Joint& j, const DivergenceKind& kind) {
  const Joint product = product_joint(marginalize(j, Side::left), marginalize(j, Side::right));
  return joint_divergence(kind, j, product);
}

double dpi_audit(const Distribution& p, const Distribution& q, const Kernel& k,
                 const DivergenceKind& kind) {
  const double before = divergence(kind, p, q);
  if (std::isinf(before)) {
    // An infinite input divergence cannot be exceeded; the inequality holds
    // regardless of the processed value.
    return infinity_sentinel();
  }
  const double after = divergence(kind, push_forward(p, k), push_forward(q, k));
  return before - after;
}

Joint project_future_to_first(const Joint& joint_full, const SpacePtr& vocab,
                              std::size_t horizon) {
  const std::size_t v = vocab->size();
  std::size_t block_count = 1;
  for (std::size_t i = 0; i < horizon; ++i) {
    block_count *= v;
  }
  if (joint_full.right()->size() != block_count) {
    raise(Errc::malformed_product_space,
          "right space size does not equal |V|^K for the given vocabulary and horizon");
  }
  // Spot-check the label structure: block index b decomposes with the first
  // token as the most significant digit.
  const std::size_t tail = block_count / v;
  if (horizon > 1) {
    const std::string& first_block = joint_full.right()->label(0);
    const std::string expected_prefix = vocab->label(0) + kProductSeparator;
    if (first_block.rfind(expected_prefix, 0) != 0) {
      raise(Errc::malformed_product_space, "right space labels are not V^K product labels");
    }
  }
  Matrix m(joint_full.left()->size(), v);
  for (std::size_t h = 0; h < joint_full.left()->size(); ++h) {
    for (std::size_t b = 0; b < block_count; ++b) {
      m(h, b / tail) += joint_full(h, b);
    }
  }
  return Joint(joint_full.left(), vocab, std::move(m));
}

SurplusReport information_surplus(const Joint& joint_full, const SpacePtr& vocab,
                                  std::size_t horizon, const DivergenceKind& kind) {
  if (horizon < 1) {
    raise(Errc::horizon_too_large, "horizon must be >= 1");
  }
  SurplusReport report;
  report.horizon = horizon;
  report.mi_full = categorical_mutual_information(joint_full, kind);
  if (horizon == 1) {
    report.mi_single = report.mi_full;
  } else {
    const Joint first = project_future_to_first(joint_full, vocab, horizon);
    report.mi_single = categorical_mutual_information(first, kind);
  }
  report.surplus = report.mi_full - report.mi_single;
  return report;
}

}  // namespace stochlab

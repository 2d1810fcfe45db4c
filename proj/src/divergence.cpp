#include "stochlab/divergence.hpp"

#include <cmath>
#include <limits>

namespace stochlab {

DivergenceKind DivergenceKind::renyi(double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0) {
    raise(Errc::unknown_kind, "Renyi order must be positive and != 1");
  }
  return {DivergenceTag::renyi, alpha};
}

std::string DivergenceKind::name() const {
  switch (tag) {
    case DivergenceTag::kl: return "kl";
    case DivergenceTag::total_variation: return "tv";
    case DivergenceTag::hellinger_sq: return "hellinger_sq";
    case DivergenceTag::bhattacharyya: return "bhattacharyya";
    case DivergenceTag::jensen_shannon: return "js";
    case DivergenceTag::renyi: return "renyi(" + std::to_string(alpha) + ")";
  }
  return "?";
}

DivergenceKind DivergenceKind::parse(const std::string& name) {
  if (name == "kl") return kl();
  if (name == "tv" || name == "total_variation") return total_variation();
  if (name == "hellinger_sq" || name == "hellinger") return hellinger_sq();
  if (name == "bhattacharyya" || name == "bc") return bhattacharyya();
  if (name == "js" || name == "jensen_shannon") return jensen_shannon();
  if (name.rfind("renyi(", 0) == 0 && name.back() == ')') {
    return renyi(std::stod(name.substr(6, name.size() - 7)));
  }
  raise(Errc::unknown_kind, "no divergence named '" + name + "'");
}

bool is_proper_divergence(const DivergenceKind& kind) {
  return kind.tag != DivergenceTag::bhattacharyya;
}

double infinity_sentinel() noexcept { return std::numeric_limits<double>::infinity(); }

namespace {

double kl_raw(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) {
      continue;  // 0 log(0/q) = 0
    }
    if (q[i] == 0.0) {
      return infinity_sentinel();
    }
    s += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(s, 0.0);
}

double tv_raw(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += std::abs(p[i] - q[i]);
  }
  return 0.5 * s;
}

double bc_raw(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += std::sqrt(p[i] * q[i]);
  }
  return s;
}

double js_raw(const std::vector<double>& p, const std::vector<double>& q) {
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = 0.5 * (p[i] + q[i]);
  }
  return 0.5 * kl_raw(p, m) + 0.5 * kl_raw(q, m);
}

double renyi_raw(double alpha, const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) {
      continue;
    }
    if (q[i] == 0.0) {
      if (alpha > 1.0) {
        return infinity_sentinel();
      }
      continue;  // p^a q^(1-a) -> 0 for a < 1
    }
    s += std::pow(p[i], alpha) * std::pow(q[i], 1.0 - alpha);
  }
  if (s <= 0.0) {
    return infinity_sentinel();  // disjoint supports
  }
  return std::max(std::log(s) / (alpha - 1.0), 0.0);
}

double divergence_raw(const DivergenceKind& kind, const std::vector<double>& p,
                      const std::vector<double>& q) {
  switch (kind.tag) {
    case DivergenceTag::kl: return kl_raw(p, q);
    case DivergenceTag::total_variation: return tv_raw(p, q);
    case DivergenceTag::hellinger_sq: return std::max(1.0 - bc_raw(p, q), 0.0);
    case DivergenceTag::bhattacharyya: return bc_raw(p, q);
    case DivergenceTag::jensen_shannon: return js_raw(p, q);
    case DivergenceTag::renyi: return renyi_raw(kind.alpha, p, q);
  }
  raise(Errc::unknown_kind, "unhandled divergence tag");
}

}  // namespace

double divergence(const DivergenceKind& kind, const Distribution& p, const Distribution& q) {
  if (!same_space(p.space(), q.space())) {
    raise(Errc::space_mismatch, "divergence: distributions on different spaces");
  }
  return divergence_raw(kind, p.weights(), q.weights());
}

double joint_divergence(const DivergenceKind& kind, const Joint& j1, const Joint& j2) {
  if (!same_space(j1.left(), j2.left()) || !same_space(j1.right(), j2.right())) {
    raise(Errc::space_mismatch, "joint_divergence: joints on different spaces");
  }
  return divergence_raw(kind, j1.weights().data(), j2.weights().data());
}

double bhattacharyya_coefficient(const Distribution& p, const Distribution& q) {
  if (!same_space(p.space(), q.space())) {
    raise(Errc::space_mismatch, "bhattacharyya: distributions on different spaces");
  }
  return bc_raw(p.weights(), q.weights());
}

double hellinger_sq_normalized(const Distribution& p, const Distribution& q) {
  return std::max(1.0 - bhattacharyya_coefficient(p, q), 0.0);
}

double hellinger_sq_unnormalized(const Distribution& p, const Distribution& q) {
  return 2.0 * hellinger_sq_normalized(p, q);
}

double checked_weighted_mean(const std::vector<double>& values,
                             const std::vector<double>& weights) {
  if (values.size() != weights.size()) {
    raise(Errc::length_mismatch, "checked_weighted_mean: lengths disagree");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] == 0.0) {
      continue;
    }
    if (!std::isfinite(values[i])) {
      raise(Errc::infinite_average, "non-finite term with positive weight");
    }
    s += weights[i] * values[i];
  }
  return s;
}

double shannon_entropy(const std::vector<double>& weights) {
  double h = 0.0;
  for (double w : weights) {
    if (w > 0.0) {
      h -= w * std::log(w);
    }
  }
  return std::max(h, 0.0);
}

}  // namespace stochlab

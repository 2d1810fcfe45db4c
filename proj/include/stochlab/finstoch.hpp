#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "stochlab/errors.hpp"
#include "stochlab/linalg.hpp"

namespace stochlab {

/// Normalization tolerance shared by every stochastic object in the library.
inline constexpr double kNormTolerance = 1e-12;

/// Finite labeled space. Labels are unique, order is part of the identity,
/// and the index<->label bijection is fixed at construction.
class Space {
 public:
  explicit Space(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Index of a label; raises unknown_element if absent.
  std::size_t index_of(const std::string& label) const;
  bool contains(const std::string& label) const noexcept;

  bool operator==(const Space& other) const noexcept { return labels_ == other.labels_; }

  /// Space {"0","1",...,"n-1"}.
  static std::shared_ptr<const Space> integer_range(std::size_t n);
  /// The monoidal unit: a single point.
  static std::shared_ptr<const Space> unit();

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

using SpacePtr = std::shared_ptr<const Space>;

inline bool same_space(const SpacePtr& a, const SpacePtr& b) {
  return a == b || (a && b && *a == *b);
}

/// Separator used in product-space labels ("a,b").
inline constexpr char kProductSeparator = ',';

/// Product space X x Y in row-major order: x varies slowest.
SpacePtr product_space(const SpacePtr& left, const SpacePtr& right);
/// K-fold product V^K, K >= 1.
SpacePtr power_space(const SpacePtr& base, std::size_t k);

/// Probability vector over a Space. Weights are validated at construction:
/// nonnegative, summing to one within kNormTolerance.
class Distribution {
 public:
  Distribution(SpacePtr space, std::vector<double> weights);

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_.at(i); }
  const std::vector<double>& weights() const noexcept { return weights_; }

  double mass_of(const std::string& label) const { return weights_.at(space_->index_of(label)); }

  static Distribution dirac(SpacePtr space, std::size_t index);
  static Distribution uniform(SpacePtr space);

 private:
  SpacePtr space_;
  std::vector<double> weights_;
};

/// Row-stochastic matrix from a source Space to a target Space.
class Kernel {
 public:
  Kernel(SpacePtr source, SpacePtr target, Matrix rows);

  const SpacePtr& source() const noexcept { return source_; }
  const SpacePtr& target() const noexcept { return target_; }
  const Matrix& rows() const noexcept { return rows_; }
  double operator()(std::size_t x, std::size_t y) const { return rows_(x, y); }

  Distribution row_distribution(std::size_t x) const;

  static Kernel identity(SpacePtr space);
  /// Deterministic kernel x -> delta_{f(x)} given target indices per source element.
  static Kernel deterministic(SpacePtr source, SpacePtr target,
                              const std::vector<std::size_t>& image);
  /// The discard map X -> unit.
  static Kernel discard(SpacePtr source);

 private:
  SpacePtr source_;
  SpacePtr target_;
  Matrix rows_;
};

/// Joint state on a product of two spaces; entries nonnegative, total mass one.
class Joint {
 public:
  Joint(SpacePtr left, SpacePtr right, Matrix weights);

  const SpacePtr& left() const noexcept { return left_; }
  const SpacePtr& right() const noexcept { return right_; }
  const Matrix& weights() const noexcept { return weights_; }
  double operator()(std::size_t i, std::size_t j) const { return weights_(i, j); }

 private:
  SpacePtr left_;
  SpacePtr right_;
  Matrix weights_;
};

enum class Side { left, right };

/// Normalizing constructor: raw weights must be nonnegative with positive total.
Distribution make_distribution(SpacePtr space, const std::vector<double>& raw_weights);

/// Chapman-Kolmogorov composition: first k, then h.
Kernel compose(const Kernel& k, const Kernel& h);

/// Parallel product (X x W) -> (Y x Z).
Kernel tensor(const Kernel& k, const Kernel& h);

Distribution push_forward(const Distribution& p, const Kernel& k);

/// Copy-after-sample state: mass p(y) on the diagonal (y, y).
Joint diagonal_pair(const Distribution& p);

/// Sample-twice state: mass p(y1) p(y2) everywhere.
Joint independent_pair(const Distribution& p);

/// Product joint p (x) q.
Joint product_joint(const Distribution& p, const Distribution& q);

Distribution marginalize(const Joint& j, Side side);

/// Flatten a joint into a distribution over the product space.
Distribution flatten(const Joint& j);

}  // namespace stochlab

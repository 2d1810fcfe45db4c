#include "stochlab/finstoch.hpp"

#include <cmath>
#include <sstream>

namespace stochlab {

namespace {

void check_weights_valid(const std::vector<double>& w, std::size_t expected, const char* what) {
  if (w.size() != expected) {
    raise(Errc::length_mismatch, std::string(what) + ": weight count does not match space size");
  }
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) {
      raise(Errc::negative_weight, std::string(what) + ": negative or NaN weight");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os << what << ": mass " << total << " is not 1 within " << kNormTolerance;
    raise(Errc::non_stochastic_table, os.str());
  }
}

}  // namespace

Space::Space(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) {
    raise(Errc::length_mismatch, "Space: empty label set");
  }
  index_.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second) {
      raise(Errc::unknown_element, "Space: duplicate label '" + labels_[i] + "'");
    }
  }
}

std::size_t Space::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) {
    raise(Errc::unknown_element, "Space: no label '" + label + "'");
  }
  return it->second;
}

bool Space::contains(const std::string& label) const noexcept {
  return index_.find(label) != index_.end();
}

SpacePtr Space::integer_range(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels.push_back(std::to_string(i));
  }
  return std::make_shared<Space>(std::move(labels));
}

SpacePtr Space::unit() {
  return std::make_shared<Space>(std::vector<std::string>{"*"});
}

SpacePtr product_space(const SpacePtr& left, const SpacePtr& right) {
  std::vector<std::string> labels;
  labels.reserve(left->size() * right->size());
  for (const auto& l : left->labels()) {
    for (const auto& r : right->labels()) {
      labels.push_back(l + kProductSeparator + r);
    }
  }
  return std::make_shared<Space>(std::move(labels));
}

SpacePtr power_space(const SpacePtr& base, std::size_t k) {
  if (k == 0) {
    raise(Errc::length_mismatch, "power_space: exponent must be >= 1");
  }
  SpacePtr out = base;
  for (std::size_t i = 1; i < k; ++i) {
    out = product_space(out, base);
  }
  return out;
}

Distribution::Distribution(SpacePtr space, std::vector<double> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
  check_weights_valid(weights_, space_->size(), "Distribution");
}

Distribution Distribution::dirac(SpacePtr space, std::size_t index) {
  std::vector<double> w(space->size(), 0.0);
  w.at(index) = 1.0;
  return Distribution(std::move(space), std::move(w));
}

Distribution Distribution::uniform(SpacePtr space) {
  std::vector<double> w(space->size(), 1.0 / static_cast<double>(space->size()));
  return Distribution(std::move(space), std::move(w));
}

Kernel::Kernel(SpacePtr source, SpacePtr target, Matrix rows)
    : source_(std::move(source)), target_(std::move(target)), rows_(std::move(rows)) {
  if (rows_.rows() != source_->size() || rows_.cols() != target_->size()) {
    raise(Errc::length_mismatch, "Kernel: matrix shape does not match spaces");
  }
  for (std::size_t x = 0; x < rows_.rows(); ++x) {
    double total = 0.0;
    for (std::size_t y = 0; y < rows_.cols(); ++y) {
      const double v = rows_(x, y);
      if (!(v >= 0.0)) {
        raise(Errc::negative_weight, "Kernel: negative or NaN entry in row " + std::to_string(x));
      }
      total += v;
    }
    if (std::abs(total - 1.0) > kNormTolerance) {
      std::ostringstream os;
      os << "Kernel: row " << x << " sums to " << total;
      raise(Errc::non_stochastic_table, os.str());
    }
  }
}

Distribution Kernel::row_distribution(std::size_t x) const {
  return make_distribution(target_, rows_.row(x));
}

Kernel Kernel::identity(SpacePtr space) {
  Matrix m(space->size(), space->size());
  for (std::size_t i = 0; i < space->size(); ++i) {
    m(i, i) = 1.0;
  }
  return Kernel(space, space, std::move(m));
}

Kernel Kernel::deterministic(SpacePtr source, SpacePtr target,
                             const std::vector<std::size_t>& image) {
  if (image.size() != source->size()) {
    raise(Errc::length_mismatch, "deterministic kernel: image size mismatch");
  }
  Matrix m(source->size(), target->size());
  for (std::size_t x = 0; x < source->size(); ++x) {
    m(x, image.at(x)) = 1.0;
  }
  return Kernel(std::move(source), std::move(target), std::move(m));
}

Kernel Kernel::discard(SpacePtr source) {
  Matrix m(source->size(), 1, 1.0);
  return Kernel(std::move(source), Space::unit(), std::move(m));
}

Joint::Joint(SpacePtr left, SpacePtr right, Matrix weights)
    : left_(std::move(left)), right_(std::move(right)), weights_(std::move(weights)) {
  if (weights_.rows() != left_->size() || weights_.cols() != right_->size()) {
    raise(Errc::length_mismatch, "Joint: matrix shape does not match spaces");
  }
  double total = 0.0;
  for (double v : weights_.data()) {
    if (!(v >= 0.0)) {
      raise(Errc::negative_weight, "Joint: negative or NaN entry");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os << "Joint: total mass " << total;
    raise(Errc::non_stochastic_table, os.str());
  }
}

Distribution make_distribution(SpacePtr space, const std::vector<double>& raw_weights) {
  if (raw_weights.size() != space->size()) {
    raise(Errc::length_mismatch, "make_distribution: weight count does not match space size");
  }
  double total = 0.0;
  for (double w : raw_weights) {
    if (!(w >= 0.0)) {
      raise(Errc::negative_weight, "make_distribution: negative or NaN weight");
    }
    total += w;
  }
  if (total <= 0.0) {
    raise(Errc::all_zero, "make_distribution: all weights zero");
  }
  std::vector<double> w(raw_weights);
  for (double& x : w) {
    x /= total;
  }
  return Distribution(std::move(space), std::move(w));
}

Kernel compose(const Kernel& k, const Kernel& h) {
  if (!same_space(k.target(), h.source())) {
    raise(Errc::space_mismatch, "compose: k.target != h.source");
  }
  return Kernel(k.source(), h.target(), matmul(k.rows(), h.rows()));
}

Kernel tensor(const Kernel& k, const Kernel& h) {
  SpacePtr source = product_space(k.source(), h.source());
  SpacePtr target = product_space(k.target(), h.target());
  Matrix m(source->size(), target->size());
  for (std::size_t x = 0; x < k.source()->size(); ++x) {
    for (std::size_t w = 0; w < h.source()->size(); ++w) {
      const std::size_t row = x * h.source()->size() + w;
      for (std::size_t y = 0; y < k.target()->size(); ++y) {
        for (std::size_t z = 0; z < h.target()->size(); ++z) {
          m(row, y * h.target()->size() + z) = k(x, y) * h(w, z);
        }
      }
    }
  }
  return Kernel(std::move(source), std::move(target), std::move(m));
}

Distribution push_forward(const Distribution& p, const Kernel& k) {
  if (!same_space(p.space(), k.source())) {
    raise(Errc::space_mismatch, "push_forward: p.space != k.source");
  }
  std::vector<double> out = vecmat(p.weights(), k.rows());
  return make_distribution(k.target(), out);
}

Joint diagonal_pair(const Distribution& p) {
  Matrix m(p.size(), p.size());
  for (std::size_t y = 0; y < p.size(); ++y) {
    m(y, y) = p[y];
  }
  return Joint(p.space(), p.space(), std::move(m));
}

Joint independent_pair(const Distribution& p) {
  Matrix m(p.size(), p.size());
  for (std::size_t y1 = 0; y1 < p.size(); ++y1) {
    for (std::size_t y2 = 0; y2 < p.size(); ++y2) {
      m(y1, y2) = p[y1] * p[y2];
    }
  }
  return Joint(p.space(), p.space(), std::move(m));
}

Joint product_joint(const Distribution& p, const Distribution& q) {
  Matrix m(p.size(), q.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      m(i, j) = p[i] * q[j];
    }
  }
  return Joint(p.space(), q.space(), std::move(m));
}

Distribution marginalize(const Joint& j, Side side) {
  if (side == Side::left) {
    std::vector<double> w(j.left()->size(), 0.0);
    for (std::size_t i = 0; i < j.left()->size(); ++i) {
      for (std::size_t k = 0; k < j.right()->size(); ++k) {
        w[i] += j(i, k);
      }
    }
    return make_distribution(j.left(), w);
  }
  std::vector<double> w(j.right()->size(), 0.0);
  for (std::size_t i = 0; i < j.left()->size(); ++i) {
    for (std::size_t k = 0; k < j.right()->size(); ++k) {
      w[k] += j(i, k);
    }
  }
  return make_distribution(j.right(), w);
}

Distribution flatten(const Joint& j) {
  SpacePtr space = product_space(j.left(), j.right());
  std::vector<double> w(j.weights().data());
  // Construction already validated mass; bypass renormalization to keep the
  // entries bit-identical.
  return Distribution(std::move(space), std::move(w));
}

}  // namespace stochlab

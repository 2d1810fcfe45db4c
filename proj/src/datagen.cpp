#include "stochlab/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stochlab/divergence.hpp"
#include "stochlab/rng.hpp"

namespace stochlab {

std::vector<std::size_t> context_tokens(std::size_t vocab_size, std::size_t order,
                                        std::size_t context_index) {
  std::vector<std::size_t> tokens(order, 0);
  std::size_t rest = context_index;
  for (std::size_t i = order; i-- > 0;) {
    tokens[i] = rest % vocab_size;
    rest /= vocab_size;
  }
  return tokens;
}

std::size_t context_shift(std::size_t vocab_size, std::size_t order, std::size_t context_index,
                          std::size_t token) {
  std::size_t tail = 1;
  for (std::size_t i = 1; i < order; ++i) {
    tail *= vocab_size;
  }
  return (context_index % tail) * vocab_size + token;
}

Distribution stationary_distribution(const SpacePtr& space, const Matrix& transition,
                                     double residual_tol, std::size_t max_iterations) {
  const std::size_t n = space->size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n, 0.0);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = pi[i];
      if (w == 0.0) {
        continue;
      }
      for (std::size_t j = 0; j < n; ++j) {
        next[j] += w * transition(i, j);
      }
    }
    double residual = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      residual = std::max(residual, std::abs(next[j] - pi[j]));
    }
    if (residual <= residual_tol) {
      return make_distribution(space, next);
    }
    // Lazy-chain step: same stationary law, but periodic cycles converge.
    for (std::size_t j = 0; j < n; ++j) {
      pi[j] = 0.5 * (pi[j] + next[j]);
    }
  }
  raise(Errc::non_convergent_stationary,
        "power iteration did not converge; chain is likely reducible or pathological");
}

DataProcess::DataProcess(SpacePtr vocab, std::size_t order, Kernel transition,
                         Distribution context_dist, std::uint64_t seed, double gamma,
                         std::string kind)
    : vocab_(std::move(vocab)),
      order_(order),
      contexts_(transition.source()),
      transition_(std::move(transition)),
      context_dist_(std::move(context_dist)),
      seed_(seed),
      gamma_(gamma),
      kind_(std::move(kind)) {
  if (!same_space(context_dist_.space(), contexts_)) {
    raise(Errc::space_mismatch, "DataProcess: context distribution space != context space");
  }
}

DataProcess DataProcess::from_transition(SpacePtr vocab, std::size_t order, Matrix table,
                                         std::uint64_t seed, double gamma, std::string kind) {
  SpacePtr contexts = power_space(vocab, order);
  Kernel transition(contexts, vocab, std::move(table));
  // Induced chain on contexts: emitting w from x moves to shift(x, w).
  const std::size_t v = vocab->size();
  const std::size_t n_ctx = contexts->size();
  Matrix chain(n_ctx, n_ctx);
  for (std::size_t x = 0; x < n_ctx; ++x) {
    for (std::size_t w = 0; w < v; ++w) {
      chain(x, context_shift(v, order, x, w)) += transition(x, w);
    }
  }
  Distribution pi = stationary_distribution(contexts, chain);
  return DataProcess(std::move(vocab), order, std::move(transition), std::move(pi), seed, gamma,
                     std::move(kind));
}

DataProcess DataProcess::with_context_dist(SpacePtr vocab, std::size_t order, Matrix table,
                                           Distribution context_dist, std::uint64_t seed,
                                           double gamma, std::string kind) {
  SpacePtr contexts = power_space(vocab, order);
  Kernel transition(contexts, vocab, std::move(table));
  if (!same_space(context_dist.space(), contexts)) {
    raise(Errc::space_mismatch, "with_context_dist: distribution not on the context space");
  }
  return DataProcess(std::move(vocab), order, std::move(transition), std::move(context_dist),
                     seed, gamma, std::move(kind));
}

const Kernel& DataProcess::horizon_conditional(std::size_t k) const {
  if (k < 1 || k > kMaxHorizon) {
    raise(Errc::horizon_too_large,
          "horizon " + std::to_string(k) + " outside [1, " + std::to_string(kMaxHorizon) + "]");
  }
  auto it = horizon_cache_.find(k);
  if (it != horizon_cache_.end()) {
    return it->second;
  }
  if (k == 1) {
    return horizon_cache_.emplace(1, transition_).first->second;
  }

  const std::size_t v = vocab_->size();
  const std::size_t n_ctx = contexts_->size();
  std::size_t block_count = 1;
  for (std::size_t i = 0; i < k; ++i) {
    block_count *= v;
  }
  Matrix rows(n_ctx, block_count);
  std::vector<std::size_t> block(k, 0);
  for (std::size_t x = 0; x < n_ctx; ++x) {
    for (std::size_t b = 0; b < block_count; ++b) {
      // Decompose b with the first token as the most significant digit,
      // matching power_space label order.
      std::size_t rest = b;
      for (std::size_t i = k; i-- > 0;) {
        block[i] = rest % v;
        rest /= v;
      }
      double prob = 1.0;
      std::size_t ctx = x;
      for (std::size_t i = 0; i < k && prob > 0.0; ++i) {
        prob *= transition_(ctx, block[i]);
        ctx = context_shift(v, order_, ctx, block[i]);
      }
      rows(x, b) = prob;
    }
  }
  Kernel kernel(contexts_, power_space(vocab_, k), std::move(rows));
  return horizon_cache_.emplace(k, std::move(kernel)).first->second;
}

DataProcess build_markov_source(std::size_t vocab_size, std::size_t order, double gamma,
                                std::uint64_t seed) {
  if (vocab_size < 2) {
    raise(Errc::length_mismatch, "build_markov_source: vocab_size must be >= 2");
  }
  if (order < 1) {
    raise(Errc::length_mismatch, "build_markov_source: order must be >= 1");
  }
  if (!(gamma > 0.0)) {
    raise(Errc::non_stochastic_table, "build_markov_source: concentration must be positive");
  }
  SpacePtr vocab = Space::integer_range(vocab_size);
  std::size_t n_ctx = 1;
  for (std::size_t i = 0; i < order; ++i) {
    n_ctx *= vocab_size;
  }
  SplitRng rng(seed, 0x64617461);  // source stream
  Matrix table(n_ctx, vocab_size);
  for (std::size_t x = 0; x < n_ctx; ++x) {
    double total = 0.0;
    for (std::size_t w = 0; w < vocab_size; ++w) {
      table(x, w) = rng.gamma(gamma);
      total += table(x, w);
    }
    for (std::size_t w = 0; w < vocab_size; ++w) {
      table(x, w) /= total;
    }
    // Normalize the last entry so the row sums to one exactly in floats.
    double partial = 0.0;
    for (std::size_t w = 0; w + 1 < vocab_size; ++w) {
      partial += table(x, w);
    }
    table(x, vocab_size - 1) = std::max(0.0, 1.0 - partial);
  }
  return DataProcess::from_transition(std::move(vocab), order, std::move(table), seed, gamma,
                                      "random");
}

DataProcess build_markov_source(std::size_t vocab_size, std::size_t order, Matrix table) {
  if (vocab_size < 2) {
    raise(Errc::length_mismatch, "build_markov_source: vocab_size must be >= 2");
  }
  if (order < 1) {
    raise(Errc::length_mismatch, "build_markov_source: order must be >= 1");
  }
  return DataProcess::from_transition(Space::integer_range(vocab_size), order, std::move(table));
}

double conditional_entropy_data(const DataProcess& proc) {
  const Distribution& pi = proc.context_dist();
  double h = 0.0;
  for (std::size_t x = 0; x < pi.size(); ++x) {
    if (pi[x] == 0.0) {
      continue;
    }
    h += pi[x] * shannon_entropy(proc.transition().rows().row(x));
  }
  return h;
}

Joint joint_hidden_future(const DataProcess& proc, const std::vector<std::string>& encoder_labels,
                          std::size_t horizon) {
  const std::size_t n_ctx = proc.context_space()->size();
  if (encoder_labels.size() != n_ctx) {
    raise(Errc::length_mismatch, "joint_hidden_future: encoder must cover every context");
  }
  const Kernel& future = proc.horizon_conditional(horizon);

  // Hidden space in order of first appearance.
  std::vector<std::string> hidden_order;
  std::vector<std::size_t> hidden_index(n_ctx, 0);
  for (std::size_t x = 0; x < n_ctx; ++x) {
    auto it = std::find(hidden_order.begin(), hidden_order.end(), encoder_labels[x]);
    if (it == hidden_order.end()) {
      hidden_index[x] = hidden_order.size();
      hidden_order.push_back(encoder_labels[x]);
    } else {
      hidden_index[x] = static_cast<std::size_t>(it - hidden_order.begin());
    }
  }
  SpacePtr hidden = std::make_shared<Space>(hidden_order);

  Matrix joint(hidden->size(), future.target()->size());
  const Distribution& pi = proc.context_dist();
  for (std::size_t x = 0; x < n_ctx; ++x) {
    if (pi[x] == 0.0) {
      continue;
    }
    const std::size_t h = hidden_index[x];
    for (std::size_t b = 0; b < future.target()->size(); ++b) {
      joint(h, b) += pi[x] * future(x, b);
    }
  }
  return Joint(hidden, future.target(), std::move(joint));
}

std::vector<std::string> injective_encoder(const DataProcess& proc) {
  return proc.context_space()->labels();
}

std::vector<std::string> constant_encoder(const DataProcess& proc) {
  return std::vector<std::string>(proc.context_space()->size(), "h");
}

DataProcess surplus_process(std::size_t num_classes, std::uint64_t seed) {
  if (num_classes < 2) {
    raise(Errc::length_mismatch, "surplus_process: need at least 2 classes");
  }
  // Class tokens 0..m-1 plus a start marker '#'. From a start context
  // (#, c) the next token is uniform over the classes; from any context
  // whose older token is a class c the next token is perm[c] with
  // certainty. Two steps out from (#, c) therefore emit (uniform, perm[c]).
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < num_classes; ++i) {
    labels.push_back(std::to_string(i));
  }
  labels.push_back("#");
  SpacePtr vocab = std::make_shared<Space>(std::move(labels));
  const std::size_t v = vocab->size();
  const std::size_t marker = num_classes;

  std::vector<std::size_t> perm(num_classes);
  std::iota(perm.begin(), perm.end(), 0);
  SplitRng rng(seed, 0x73757270);  // surplus stream
  for (std::size_t i = num_classes - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.below(i + 1)]);
  }

  Matrix table(v * v, v);
  for (std::size_t a = 0; a < v; ++a) {
    for (std::size_t b = 0; b < v; ++b) {
      const std::size_t row = a * v + b;
      if (a == marker) {
        for (std::size_t w = 0; w < num_classes; ++w) {
          table(row, w) = 1.0 / static_cast<double>(num_classes);
        }
      } else {
        table(row, perm[a]) = 1.0;
      }
    }
  }

  SpacePtr contexts = power_space(vocab, 2);
  std::vector<double> ctx_weights(contexts->size(), 0.0);
  for (std::size_t c = 0; c < num_classes; ++c) {
    ctx_weights[marker * v + c] = 1.0 / static_cast<double>(num_classes);
  }
  return DataProcess::with_context_dist(vocab, 2, std::move(table),
                                        Distribution(contexts, std::move(ctx_weights)), seed,
                                        0.0, "surplus");
}

DataProcess two_cluster_source(std::size_t vocab_size, double wobble, std::uint64_t seed) {
  if (vocab_size < 4) {
    raise(Errc::length_mismatch, "two_cluster_source: vocab_size must be >= 4");
  }
  if (!(wobble >= 0.0)) {
    raise(Errc::negative_weight, "two_cluster_source: wobble must be >= 0");
  }
  const std::size_t half = vocab_size / 2;
  SplitRng rng(seed, 0x636c7573);  // cluster stream
  Matrix table(vocab_size, vocab_size);
  for (std::size_t x = 0; x < vocab_size; ++x) {
    const bool group_a = x < half;
    double total = 0.0;
    for (std::size_t w = 0; w < vocab_size; ++w) {
      const bool heavy = group_a ? (w < half) : (w >= half);
      const double base = heavy ? 0.95 / static_cast<double>(half)
                                : 0.05 / static_cast<double>(vocab_size - half);
      table(x, w) = base * std::exp(wobble * rng.normal());
      total += table(x, w);
    }
    for (std::size_t w = 0; w < vocab_size; ++w) {
      table(x, w) /= total;
    }
    double partial = 0.0;
    for (std::size_t w = 0; w + 1 < vocab_size; ++w) {
      partial += table(x, w);
    }
    table(x, vocab_size - 1) = std::max(0.0, 1.0 - partial);
  }
  return DataProcess::from_transition(Space::integer_range(vocab_size), 1, std::move(table),
                                      seed, wobble, "two_cluster");
}

std::vector<std::size_t> two_cluster_groups(const DataProcess& proc) {
  const std::size_t n = proc.context_space()->size();
  std::vector<std::size_t> groups(n, 0);
  for (std::size_t x = n / 2; x < n; ++x) {
    groups[x] = 1;
  }
  return groups;
}

Distribution random_distribution(const SpacePtr& space, double gamma, SplitRng& rng) {
  std::vector<double> w(space->size(), 0.0);
  for (double& x : w) {
    x = rng.gamma(gamma);
  }
  return make_distribution(space, w);
}

Kernel random_kernel(const SpacePtr& source, const SpacePtr& target, double gamma,
                     SplitRng& rng) {
  Matrix rows(source->size(), target->size());
  for (std::size_t x = 0; x < source->size(); ++x) {
    double total = 0.0;
    for (std::size_t y = 0; y < target->size(); ++y) {
      rows(x, y) = rng.gamma(gamma);
      total += rows(x, y);
    }
    for (std::size_t y = 0; y < target->size(); ++y) {
      rows(x, y) /= total;
    }
    double partial = 0.0;
    for (std::size_t y = 0; y + 1 < target->size(); ++y) {
      partial += rows(x, y);
    }
    rows(x, target->size() - 1) = std::max(0.0, 1.0 - partial);
  }
  return Kernel(source, target, std::move(rows));
}

}  // namespace stochlab

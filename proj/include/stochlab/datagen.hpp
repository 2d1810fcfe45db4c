#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stochlab/catinfo.hpp"
#include "stochlab/finstoch.hpp"
#include "stochlab/rng.hpp"

namespace stochlab {

/// Maximum future horizon kept exactly enumerable.
inline constexpr std::size_t kMaxHorizon = 4;

/// Contexts are enumerated in the order of power_space(vocab, order): the
/// oldest token is the most significant digit.
std::vector<std::size_t> context_tokens(std::size_t vocab_size, std::size_t order,
                                        std::size_t context_index);
/// Context reached after emitting `token` from `context_index`.
std::size_t context_shift(std::size_t vocab_size, std::size_t order, std::size_t context_index,
                          std::size_t token);

/// Exact synthetic ground-truth source: an order-k Markov table over a
/// finite vocabulary, with its context distribution and exact K-step
/// conditionals. Immutable after construction.
class DataProcess {
 public:
  const SpacePtr& vocab() const noexcept { return vocab_; }
  std::size_t order() const noexcept { return order_; }
  const SpacePtr& context_space() const noexcept { return contexts_; }
  const Kernel& transition() const noexcept { return transition_; }
  const Distribution& context_dist() const noexcept { return context_dist_; }

  /// Exact conditional law of the next K tokens given the context; K in
  /// [1, kMaxHorizon]. horizon_conditional(1) is the transition itself.
  const Kernel& horizon_conditional(std::size_t k) const;

  std::uint64_t seed() const noexcept { return seed_; }
  double gamma() const noexcept { return gamma_; }
  const std::string& kind() const noexcept { return kind_; }

  /// Builds a process from an explicit transition table, computing the
  /// context distribution as the stationary law of the induced chain.
  static DataProcess from_transition(SpacePtr vocab, std::size_t order, Matrix table,
                                     std::uint64_t seed = 0, double gamma = 0.0,
                                     std::string kind = "explicit");

  /// Same, but with an explicitly supplied context distribution (used by
  /// constructions whose natural context law is not the stationary one).
  static DataProcess with_context_dist(SpacePtr vocab, std::size_t order, Matrix table,
                                       Distribution context_dist, std::uint64_t seed,
                                       double gamma, std::string kind);

 private:
  DataProcess(SpacePtr vocab, std::size_t order, Kernel transition, Distribution context_dist,
              std::uint64_t seed, double gamma, std::string kind);

  SpacePtr vocab_;
  std::size_t order_;
  SpacePtr contexts_;
  Kernel transition_;
  Distribution context_dist_;
  mutable std::map<std::size_t, Kernel> horizon_cache_;
  std::uint64_t seed_;
  double gamma_;
  std::string kind_;
};

/// Stationary distribution of a row-stochastic matrix by damped power
/// iteration (the lazy chain (I+P)/2 has the same stationary law and kills
/// periodicity). Residual is checked on the original matrix; the default
/// tolerance leaves room for the returned vector to satisfy the 1e-12
/// stationarity contract even at the largest desk-scale context counts.
Distribution stationary_distribution(const SpacePtr& space, const Matrix& transition,
                                     double residual_tol = 1e-14,
                                     std::size_t max_iterations = 1000000);

/// Random source: each transition row drawn from a symmetric Dirichlet with
/// concentration gamma.
DataProcess build_markov_source(std::size_t vocab_size, std::size_t order, double gamma,
                                std::uint64_t seed);

/// Explicit-table source.
DataProcess build_markov_source(std::size_t vocab_size, std::size_t order, Matrix table);

/// Average conditional Shannon entropy of the next token given the context,
/// weighted by the context distribution. Nats.
double conditional_entropy_data(const DataProcess& proc);

/// Joint law of (encoder(context), next-K-token block). The encoder assigns
/// a hidden label to every context, listed in context-space order.
Joint joint_hidden_future(const DataProcess& proc, const std::vector<std::string>& encoder_labels,
                          std::size_t horizon);

/// Identity encoder: every context is its own hidden label.
std::vector<std::string> injective_encoder(const DataProcess& proc);
/// Constant encoder: all contexts collapse to one hidden label.
std::vector<std::string> constant_encoder(const DataProcess& proc);

/// Order-2 construction with guaranteed positive information surplus: from
/// every supported context the next token is uniform over the class tokens
/// (so it carries no information about the context), while the token after
/// next is a fixed bijection of the context class. The vocabulary is the
/// class tokens plus one start marker; the context distribution is uniform
/// over the start contexts. Surplus under an injective encoder is exactly
/// log(num_classes).
DataProcess surplus_process(std::size_t num_classes, std::uint64_t seed);

/// Order-1 source whose contexts split into two groups with near-identical
/// within-group conditionals and well-separated across-group conditionals.
/// `wobble` controls the within-group perturbation size.
DataProcess two_cluster_source(std::size_t vocab_size, double wobble, std::uint64_t seed);

/// Group index (0 or 1) of each context of a two_cluster_source.
std::vector<std::size_t> two_cluster_groups(const DataProcess& proc);

/// Dirichlet(gamma, ..., gamma) draw over a space.
Distribution random_distribution(const SpacePtr& space, double gamma, SplitRng& rng);
/// Kernel with independent Dirichlet rows.
Kernel random_kernel(const SpacePtr& source, const SpacePtr& target, double gamma,
                     SplitRng& rng);

}  // namespace stochlab

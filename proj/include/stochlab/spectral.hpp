#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stochlab/armodel.hpp"
#include "stochlab/datagen.hpp"
#include "stochlab/finstoch.hpp"
#include "stochlab/linalg.hpp"

namespace stochlab {

enum class SimilarityTag {
  bc,               // Bhattacharyya coefficient
  hellinger_gauss,  // exp(-beta * d_H^2), d_H^2 = 2 (1 - BC)
  linear,           // <p_x, p_x'>
  sym_kl,           // exp(-beta * JS(p_x, p_x'))
};

struct SimilarityKindSpec {
  SimilarityTag tag = SimilarityTag::bc;
  double beta = 1.0;

  std::string name() const;
  static SimilarityKindSpec parse(const std::string& name, double beta);
};

/// Predictive similarity between contexts, computed from the true
/// next-token conditionals of a source.
struct SimilarityMatrix {
  SpacePtr contexts;
  SimilarityKindSpec kind;
  Matrix entries;  // symmetric, nonnegative
};

struct SpectralReport {
  std::vector<double> operator_eigenvalues;  // descending
  Matrix leading_eigenvectors;               // columns, mapped back to L2(mu)
  std::map<std::size_t, double> dirichlet_energies;
  double alignment_score = 0.0;
  bool degenerate_gram = false;
};

SimilarityMatrix similarity_matrix(const DataProcess& proc, const SimilarityKindSpec& kind);

/// Similarity matrix from explicit per-context conditionals (rows of a kernel).
SimilarityMatrix similarity_matrix_from_kernel(const Kernel& conditionals,
                                               const SimilarityKindSpec& kind);

/// Expected-prototype kernel K(x,x') = <gbar_x, gbar_x'> with
/// gbar_x = sum_w p_x(w) g(w) from the data conditionals and the model's
/// current prototypes. With one-hot prototypes this reduces to the linear
/// predictive kernel.
SimilarityMatrix prototype_similarity(const DataProcess& proc, const ArModel& model);
SimilarityMatrix prototype_similarity_one_hot(const DataProcess& proc);

/// mu-weighted Dirichlet energy 1/2 sum_{x,x'} K(x,x') (phi_x - phi_x')^2 mu_x mu_x'.
double dirichlet_energy(const SimilarityMatrix& K, const Distribution& mu,
                        const std::vector<double>& phi);

/// Matrix of the similarity operator (M psi)(x) = sum_x' K(x,x') psi(x') mu(x'):
/// entries K(x,x') mu(x').
Matrix operator_matrix(const SimilarityMatrix& K, const Distribution& mu);

/// Spectrum of the operator in the mu-weighted inner product, solved via the
/// symmetrized form diag(sqrt mu) K diag(sqrt mu). Eigenvectors are mapped
/// back to functions on contexts (zero-mass contexts get zero).
SymmetricEigen operator_spectrum(const SimilarityMatrix& K, const Distribution& mu);

struct AlignmentResult {
  double score = 0.0;  // in [-1, 1]
  bool degenerate = false;
};

/// CKA-style alignment between the Gram matrix of per-context hidden vectors
/// and a similarity matrix, both double-centered under mu.
AlignmentResult gram_alignment(const std::vector<std::vector<double>>& hidden,
                               const SimilarityMatrix& K, const Distribution& mu);

/// Convenience overload: hidden vectors taken from the model.
AlignmentResult gram_alignment(const ArModel& model, const DataProcess& proc,
                               const SimilarityMatrix& K);

struct DirectionEnergy {
  std::map<std::size_t, double> energies;  // eigendirection index -> normalized energy
  bool degenerate_metric = false;          // averaged pullback metric ~ 0
  bool degenerate_variance = false;        // some projection had no spread
};

/// Dirichlet energy of representation projections onto the top
/// eigendirections of the context-averaged pullback metric, normalized by
/// the mu-weighted variance of the projection.
DirectionEnergy sensitive_direction_energy(const ArModel& model, const DataProcess& proc,
                                           const SimilarityMatrix& K,
                                           std::size_t num_directions = 3);

/// Variance-normalized Dirichlet energy of the projection onto an arbitrary
/// direction; used for random-direction baselines.
double direction_energy(const ArModel& model, const DataProcess& proc,
                        const SimilarityMatrix& K, const std::vector<double>& direction,
                        bool* degenerate = nullptr);

SpectralReport spectral_report(const ArModel& model, const DataProcess& proc,
                               const SimilarityKindSpec& kind, std::size_t num_directions = 3);

}  // namespace stochlab

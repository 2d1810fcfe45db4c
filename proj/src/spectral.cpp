#include "stochlab/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "stochlab/divergence.hpp"
#include "stochlab/infogeo.hpp"

namespace stochlab {

std::string SimilarityKindSpec::name() const {
  switch (tag) {
    case SimilarityTag::bc: return "bc";
    case SimilarityTag::hellinger_gauss: return "hellinger_gauss";
    case SimilarityTag::linear: return "linear";
    case SimilarityTag::sym_kl: return "symkl";
  }
  return "?";
}

SimilarityKindSpec SimilarityKindSpec::parse(const std::string& name, double beta) {
  SimilarityKindSpec spec;
  spec.beta = beta;
  if (name == "bc") {
    spec.tag = SimilarityTag::bc;
  } else if (name == "hellinger_gauss" || name == "hellinger") {
    spec.tag = SimilarityTag::hellinger_gauss;
  } else if (name == "linear") {
    spec.tag = SimilarityTag::linear;
  } else if (name == "symkl" || name == "sym_kl") {
    spec.tag = SimilarityTag::sym_kl;
  } else {
    raise(Errc::unknown_kind, "no similarity kernel named '" + name + "'");
  }
  if ((spec.tag == SimilarityTag::hellinger_gauss || spec.tag == SimilarityTag::sym_kl) &&
      !(beta > 0.0)) {
    raise(Errc::unknown_kind, "similarity kernel '" + name + "' needs beta > 0");
  }
  return spec;
}

SimilarityMatrix similarity_matrix_from_kernel(const Kernel& conditionals,
                                               const SimilarityKindSpec& kind) {
  const std::size_t n = conditionals.source()->size();
  Matrix entries(n, n);
  std::vector<Distribution> rows;
  rows.reserve(n);
  for (std::size_t x = 0; x < n; ++x) {
    rows.push_back(conditionals.row_distribution(x));
  }
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x; y < n; ++y) {
      double value = 0.0;
      switch (kind.tag) {
        case SimilarityTag::bc:
          value = bhattacharyya_coefficient(rows[x], rows[y]);
          break;
        case SimilarityTag::hellinger_gauss:
          // Def-style unnormalized convention: d_H^2 = 2 (1 - BC).
          value = std::exp(-kind.beta * hellinger_sq_unnormalized(rows[x], rows[y]));
          break;
        case SimilarityTag::linear:
          value = dot(rows[x].weights(), rows[y].weights());
          break;
        case SimilarityTag::sym_kl:
          value = std::exp(-kind.beta *
                           divergence(DivergenceKind::jensen_shannon(), rows[x], rows[y]));
          break;
      }
      entries(x, y) = value;
      entries(y, x) = value;
    }
  }
  return SimilarityMatrix{conditionals.source(), kind, std::move(entries)};
}

SimilarityMatrix similarity_matrix(const DataProcess& proc, const SimilarityKindSpec& kind) {
  return similarity_matrix_from_kernel(proc.transition(), kind);
}

namespace {

std::vector<std::vector<double>> expected_prototypes(const DataProcess& proc,
                                                     const Matrix& prototypes) {
  const std::size_t n = proc.context_space()->size();
  const std::size_t d = prototypes.cols();
  std::vector<std::vector<double>> gbar(n, std::vector<double>(d, 0.0));
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t w = 0; w < proc.vocab()->size(); ++w) {
      const double p = proc.transition()(x, w);
      if (p == 0.0) {
        continue;
      }
      for (std::size_t a = 0; a < d; ++a) {
        gbar[x][a] += p * prototypes(w, a);
      }
    }
  }
  return gbar;
}

SimilarityMatrix gram_of(const SpacePtr& contexts, const std::vector<std::vector<double>>& vecs,
                         const SimilarityKindSpec& kind) {
  const std::size_t n = vecs.size();
  Matrix entries(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x; y < n; ++y) {
      const double v = dot(vecs[x], vecs[y]);
      entries(x, y) = v;
      entries(y, x) = v;
    }
  }
  return SimilarityMatrix{contexts, kind, std::move(entries)};
}

// Double centering under mu: (I - 1 mu^T) A (I - mu 1^T).
Matrix center_mu(const Matrix& a, const std::vector<double>& mu) {
  const std::size_t n = a.rows();
  std::vector<double> col_mean(n, 0.0);  // mu^T A
  std::vector<double> row_mean(n, 0.0);  // A mu
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      col_mean[j] += mu[i] * a(i, j);
      row_mean[i] += a(i, j) * mu[j];
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    total += mu[j] * col_mean[j];
  }
  Matrix c(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      c(i, j) = a(i, j) - col_mean[j] - row_mean[i] + total;
    }
  }
  return c;
}

}  // namespace

SimilarityMatrix prototype_similarity(const DataProcess& proc, const ArModel& model) {
  SimilarityKindSpec kind;
  kind.tag = SimilarityTag::linear;
  return gram_of(proc.context_space(), expected_prototypes(proc, model.head), kind);
}

SimilarityMatrix prototype_similarity_one_hot(const DataProcess& proc) {
  SimilarityKindSpec kind;
  kind.tag = SimilarityTag::linear;
  Matrix one_hot(proc.vocab()->size(), proc.vocab()->size());
  for (std::size_t w = 0; w < proc.vocab()->size(); ++w) {
    one_hot(w, w) = 1.0;
  }
  return gram_of(proc.context_space(), expected_prototypes(proc, one_hot), kind);
}

double dirichlet_energy(const SimilarityMatrix& K, const Distribution& mu,
                        const std::vector<double>& phi) {
  if (!same_space(K.contexts, mu.space())) {
    raise(Errc::space_mismatch, "dirichlet_energy: weighting space != kernel contexts");
  }
  if (phi.size() != K.contexts->size()) {
    raise(Errc::length_mismatch, "dirichlet_energy: phi must cover every context");
  }
  const std::size_t n = phi.size();
  double e = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    if (mu[x] == 0.0) {
      continue;
    }
    for (std::size_t y = 0; y < n; ++y) {
      if (mu[y] == 0.0) {
        continue;
      }
      const double diff = phi[x] - phi[y];
      e += K.entries(x, y) * diff * diff * mu[x] * mu[y];
    }
  }
  return 0.5 * e;
}

Matrix operator_matrix(const SimilarityMatrix& K, const Distribution& mu) {
  if (!same_space(K.contexts, mu.space())) {
    raise(Errc::space_mismatch, "operator_matrix: weighting space != kernel contexts");
  }
  const std::size_t n = mu.size();
  Matrix m(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      m(x, y) = K.entries(x, y) * mu[y];
    }
  }
  return m;
}

SymmetricEigen operator_spectrum(const SimilarityMatrix& K, const Distribution& mu) {
  if (!same_space(K.contexts, mu.space())) {
    raise(Errc::space_mismatch, "operator_spectrum: weighting space != kernel contexts");
  }
  const std::size_t n = mu.size();
  std::vector<double> root(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    root[i] = std::sqrt(mu[i]);
  }
  Matrix sym(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      sym(x, y) = root[x] * K.entries(x, y) * root[y];
    }
  }
  SymmetricEigen eig = symmetric_eigen(sym);
  // Map eigenvectors of the symmetrized form back to eigenfunctions of the
  // operator in L2(mu); zero-mass contexts carry no function value.
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      eig.vectors(i, j) = root[i] > 0.0 ? eig.vectors(i, j) / root[i] : 0.0;
    }
  }
  return eig;
}

AlignmentResult gram_alignment(const std::vector<std::vector<double>>& hidden,
                               const SimilarityMatrix& K, const Distribution& mu) {
  if (!same_space(K.contexts, mu.space())) {
    raise(Errc::space_mismatch, "gram_alignment: weighting space != kernel contexts");
  }
  if (hidden.size() != K.contexts->size()) {
    raise(Errc::length_mismatch, "gram_alignment: hidden map must cover every context");
  }
  const std::size_t n = hidden.size();
  Matrix gram(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x; y < n; ++y) {
      const double v = dot(hidden[x], hidden[y]);
      gram(x, y) = v;
      gram(y, x) = v;
    }
  }
  const Matrix gc = center_mu(gram, mu.weights());
  const Matrix kc = center_mu(K.entries, mu.weights());

  double inner = 0.0, ng = 0.0, nk = 0.0;
  for (std::size_t i = 0; i < gc.data().size(); ++i) {
    inner += gc.data()[i] * kc.data()[i];
    ng += gc.data()[i] * gc.data()[i];
    nk += kc.data()[i] * kc.data()[i];
  }
  AlignmentResult out;
  if (std::sqrt(ng) < 1e-12 || std::sqrt(nk) < 1e-12) {
    out.degenerate = true;
    out.score = 0.0;
    return out;
  }
  out.score = inner / (std::sqrt(ng) * std::sqrt(nk));
  out.score = std::clamp(out.score, -1.0, 1.0);
  return out;
}

AlignmentResult gram_alignment(const ArModel& model, const DataProcess& proc,
                               const SimilarityMatrix& K) {
  const std::size_t n = proc.context_space()->size();
  std::vector<std::vector<double>> hidden(n);
  for (std::size_t x = 0; x < n; ++x) {
    hidden[x] = encode_context(model, proc, x);
  }
  return gram_alignment(hidden, K, proc.context_dist());
}

double direction_energy(const ArModel& model, const DataProcess& proc,
                        const SimilarityMatrix& K, const std::vector<double>& direction,
                        bool* degenerate) {
  const Distribution& mu = proc.context_dist();
  const std::size_t n = proc.context_space()->size();
  std::vector<double> phi(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    phi[x] = dot(encode_context(model, proc, x), direction);
  }
  double mean = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    mean += mu[x] * phi[x];
  }
  double var = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    var += mu[x] * (phi[x] - mean) * (phi[x] - mean);
  }
  if (var < 1e-12) {
    if (degenerate != nullptr) {
      *degenerate = true;
    }
    return 0.0;
  }
  if (degenerate != nullptr) {
    *degenerate = false;
  }
  return dirichlet_energy(K, mu, phi) / var;
}

DirectionEnergy sensitive_direction_energy(const ArModel& model, const DataProcess& proc,
                                           const SimilarityMatrix& K,
                                           std::size_t num_directions) {
  DirectionEnergy out;
  const Matrix avg = averaged_pullback_metric(model, proc);
  double max_entry = 0.0;
  for (double v : avg.data()) {
    max_entry = std::max(max_entry, std::abs(v));
  }
  if (max_entry < 1e-14) {
    out.degenerate_metric = true;
    return out;
  }
  const SymmetricEigen eig = symmetric_eigen(avg);
  const std::size_t m = std::min(num_directions, eig.values.size());
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> v(avg.rows(), 0.0);
    for (std::size_t i = 0; i < avg.rows(); ++i) {
      v[i] = eig.vectors(i, j);
    }
    bool degenerate = false;
    const double e = direction_energy(model, proc, K, v, &degenerate);
    if (degenerate) {
      out.degenerate_variance = true;
      continue;
    }
    out.energies[j] = e;
  }
  return out;
}

SpectralReport spectral_report(const ArModel& model, const DataProcess& proc,
                               const SimilarityKindSpec& kind, std::size_t num_directions) {
  SpectralReport report;
  const SimilarityMatrix K = similarity_matrix(proc, kind);
  const Distribution& mu = proc.context_dist();

  const SymmetricEigen spectrum = operator_spectrum(K, mu);
  report.operator_eigenvalues = spectrum.values;
  const std::size_t lead = std::min<std::size_t>(num_directions, spectrum.values.size());
  report.leading_eigenvectors = Matrix(mu.size(), lead);
  for (std::size_t j = 0; j < lead; ++j) {
    for (std::size_t i = 0; i < mu.size(); ++i) {
      report.leading_eigenvectors(i, j) = spectrum.vectors(i, j);
    }
  }

  const DirectionEnergy energies = sensitive_direction_energy(model, proc, K, num_directions);
  report.dirichlet_energies = energies.energies;

  const AlignmentResult alignment = gram_alignment(model, proc, K);
  report.alignment_score = alignment.score;
  report.degenerate_gram = alignment.degenerate;
  return report;
}

}  // namespace stochlab

#include <doctest.h>

#include <cmath>

#include "stochlab/armodel.hpp"
#include "stochlab/datagen.hpp"
#include "stochlab/divergence.hpp"
#include "stochlab/rng.hpp"
#include "stochlab/spectral.hpp"

using namespace stochlab;

namespace {

Kernel conditionals_from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t v = rows[0].size();
  Matrix m(n, v);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t w = 0; w < v; ++w) {
      m(x, w) = rows[x][w];
    }
  }
  return Kernel(Space::integer_range(n), Space::integer_range(v), std::move(m));
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("similarity matrix values") {
  // identical conditionals everywhere: BC entries are all one
  const Kernel same = conditionals_from_rows({{0.3, 0.7}, {0.3, 0.7}, {0.3, 0.7}});
  const SimilarityMatrix all_ones =
      similarity_matrix_from_kernel(same, SimilarityKindSpec::parse("bc", 1.0));
  for (double v : all_ones.entries.data()) {
    CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  }

  // disjoint supports: BC entry 0, hellinger-gauss entry exp(-2 beta)
  const Kernel disjoint = conditionals_from_rows({{1.0, 0.0}, {0.0, 1.0}});
  const double beta = 0.7;
  const SimilarityMatrix bc0 =
      similarity_matrix_from_kernel(disjoint, SimilarityKindSpec::parse("bc", 1.0));
  CHECK(bc0.entries(0, 1) == 0.0);
  const SimilarityMatrix hg =
      similarity_matrix_from_kernel(disjoint, SimilarityKindSpec::parse("hellinger_gauss", beta));
  CHECK(hg.entries(0, 1) == doctest::Approx(std::exp(-2.0 * beta)).epsilon(1e-14));
  CHECK(hg.entries(0, 0) == 1.0);

  // direct-summation oracle for BC on (0.5,0.5) vs (0.25,0.75)
  const Kernel pair = conditionals_from_rows({{0.5, 0.5}, {0.25, 0.75}});
  const SimilarityMatrix bc =
      similarity_matrix_from_kernel(pair, SimilarityKindSpec::parse("bc", 1.0));
  const double expected = std::sqrt(0.5 * 0.25) + std::sqrt(0.5 * 0.75);
  CHECK(bc.entries(0, 1) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(0.96593).epsilon(1e-4));

  // linear kernel is the plain inner product
  const SimilarityMatrix lin =
      similarity_matrix_from_kernel(pair, SimilarityKindSpec::parse("linear", 1.0));
  CHECK(lin.entries(0, 1) == doctest::Approx(0.5 * 0.25 + 0.5 * 0.75).epsilon(1e-14));

  // sym-kl uses the jensen-shannon divergence in the exponent
  const SimilarityMatrix sk =
      similarity_matrix_from_kernel(pair, SimilarityKindSpec::parse("symkl", beta));
  const double js = divergence(DivergenceKind::jensen_shannon(),
                               pair.row_distribution(0), pair.row_distribution(1));
  CHECK(sk.entries(0, 1) == doctest::Approx(std::exp(-beta * js)).epsilon(1e-14));

  CHECK_THROWS_AS((void)SimilarityKindSpec::parse("nope", 1.0), Error);
  CHECK_THROWS_AS((void)SimilarityKindSpec::parse("symkl", 0.0), Error);
}

TEST_CASE("similarity matrices are symmetric and psd where claimed") {
  SplitRng rng(81);
  for (int i = 0; i < 20; ++i) {
    const DataProcess proc = build_markov_source(4, 1, 1.0, rng.next_u64());
    for (const char* name : {"bc", "hellinger_gauss", "linear", "symkl"}) {
      const SimilarityMatrix sim =
          similarity_matrix(proc, SimilarityKindSpec::parse(name, 1.3));
      for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
          CHECK(sim.entries(a, b) >= 0.0);
          CHECK(sim.entries(a, b) == sim.entries(b, a));
          if (std::string(name) == "bc" || std::string(name) == "linear") {
            CHECK(sim.entries(a, b) <= 1.0 + 1e-12);
          }
        }
        if (std::string(name) == "bc" || std::string(name) == "hellinger_gauss") {
          CHECK(sim.entries(a, a) == doctest::Approx(1.0).epsilon(1e-12));
        }
      }
      if (std::string(name) != "symkl") {
        // psd by Gram / Gaussian-of-Hilbertian-metric structure
        const SymmetricEigen eig = symmetric_eigen(sim.entries);
        CHECK(eig.values.back() >= -1e-10);
      }
    }
  }
}

TEST_CASE("dirichlet energy") {
  const Kernel pair = conditionals_from_rows({{0.5, 0.5}, {0.25, 0.75}});
  const SimilarityMatrix sim =
      similarity_matrix_from_kernel(pair, SimilarityKindSpec::parse("bc", 1.0));
  const Distribution mu = Distribution::uniform(sim.contexts);

  // constant functions cost nothing
  CHECK(dirichlet_energy(sim, mu, {3.0, 3.0}) == 0.0);

  // off-diagonal-zero kernel costs nothing
  Matrix diag_only(2, 2);
  diag_only(0, 0) = 1.0;
  diag_only(1, 1) = 1.0;
  const SimilarityMatrix diag_sim{sim.contexts, sim.kind, std::move(diag_only)};
  CHECK(dirichlet_energy(diag_sim, mu, {0.0, 1.0}) == 0.0);

  // direct double-sum oracle: two contexts, K = 1, phi = (0,1), uniform mu
  Matrix ones(2, 2, 1.0);
  const SimilarityMatrix ones_sim{sim.contexts, sim.kind, std::move(ones)};
  CHECK(dirichlet_energy(ones_sim, mu, {0.0, 1.0}) == doctest::Approx(0.25).epsilon(1e-15));

  CHECK_THROWS_AS((void)dirichlet_energy(sim, Distribution::uniform(Space::integer_range(3)),
                                         {0.0, 1.0}),
                  Error);
}

TEST_CASE("dirichlet energy equals the graph laplacian quadratic form") {
  SplitRng rng(82);
  for (int i = 0; i < 30; ++i) {
    const DataProcess proc = build_markov_source(5, 1, 1.0, rng.next_u64());
    const SimilarityMatrix sim = similarity_matrix(proc, SimilarityKindSpec{});
    const Distribution& mu = proc.context_dist();
    std::vector<double> phi(5);
    for (double& x : phi) {
      x = rng.uniform(-2.0, 2.0);
    }
    // independent laplacian-assembly oracle on weights K(x,y) mu_x mu_y
    double quad = 0.0;
    for (std::size_t a = 0; a < 5; ++a) {
      for (std::size_t b = 0; b < 5; ++b) {
        const double w = sim.entries(a, b) * mu[a] * mu[b];
        quad += w * phi[a] * (phi[a] - phi[b]);
      }
    }
    CHECK(std::abs(dirichlet_energy(sim, mu, phi) - quad) <= 1e-10);
  }
}

TEST_CASE("similarity operator") {
  const auto X = Space::integer_range(4);
  const Distribution mu = Distribution::uniform(X);
  SimilarityKindSpec kind;

  // identity-like kernel: eigenvalues all 1/n
  Matrix eye(4, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    eye(i, i) = 1.0;
  }
  const SymmetricEigen eig = operator_spectrum(SimilarityMatrix{X, kind, eye}, mu);
  for (double v : eig.values) {
    CHECK(v == doctest::Approx(0.25).epsilon(1e-13));
  }

  // all-ones kernel: rank one with unit top eigenvalue under any weighting
  Matrix ones(4, 4, 1.0);
  SplitRng rng(83);
  const Distribution any_mu = random_distribution(X, 1.0, rng);
  const SymmetricEigen ones_eig =
      operator_spectrum(SimilarityMatrix{X, kind, ones}, any_mu);
  CHECK(ones_eig.values.front() == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(std::abs(ones_eig.values[i]) <= 1e-12);
  }

  // on constant functions the operator returns the mu-weighted row mass
  const DataProcess proc = build_markov_source(4, 1, 1.0, 9);
  const SimilarityMatrix sim = similarity_matrix(proc, kind);
  const Matrix op = operator_matrix(sim, proc.context_dist());
  for (std::size_t x = 0; x < 4; ++x) {
    double applied = 0.0;
    double mass = 0.0;
    for (std::size_t y = 0; y < 4; ++y) {
      applied += op(x, y) * 1.0;
      mass += sim.entries(x, y) * proc.context_dist()[y];
    }
    CHECK(applied == doctest::Approx(mass).epsilon(1e-14));
  }
}

TEST_CASE("gram alignment") {
  const DataProcess proc = build_markov_source(5, 1, 1.0, 313);
  const SimilarityMatrix sim = similarity_matrix(proc, SimilarityKindSpec{});
  const Distribution& mu = proc.context_dist();

  // collapse: identical representations get the degenerate flag and score 0
  const std::vector<std::vector<double>> collapsed(5, std::vector<double>{0.4, -0.2});
  const AlignmentResult degen = gram_alignment(collapsed, sim, mu);
  CHECK(degen.degenerate);
  CHECK(degen.score == 0.0);

  // eigenvector embedding reproduces K as its Gram matrix: score 1
  const SymmetricEigen eig = symmetric_eigen(sim.entries);
  std::vector<std::vector<double>> embed(5, std::vector<double>(5, 0.0));
  for (std::size_t x = 0; x < 5; ++x) {
    for (std::size_t j = 0; j < 5; ++j) {
      embed[x][j] = std::sqrt(std::max(eig.values[j], 0.0)) * eig.vectors(x, j);
    }
  }
  CHECK(gram_alignment(embed, sim, mu).score == doctest::Approx(1.0).epsilon(1e-9));

  // random representations: bounded scores, small mean |score|
  SplitRng rng(84);
  double mean_abs = 0.0;
  for (int s = 0; s < 100; ++s) {
    std::vector<std::vector<double>> h(5, std::vector<double>(4, 0.0));
    for (auto& row : h) {
      for (double& x : row) {
        x = rng.normal();
      }
    }
    const AlignmentResult r = gram_alignment(h, sim, mu);
    CHECK(r.score >= -1.0);
    CHECK(r.score <= 1.0);
    mean_abs += std::abs(r.score);
  }
  mean_abs /= 100.0;
  CHECK(mean_abs < 0.6);  // permutation-baseline oracle: far from perfect alignment
}

TEST_CASE("prototype kernel with one-hot prototypes is the linear kernel") {
  const DataProcess proc = build_markov_source(4, 1, 1.0, 515);
  const SimilarityMatrix proto = prototype_similarity_one_hot(proc);
  const SimilarityMatrix lin =
      similarity_matrix(proc, SimilarityKindSpec::parse("linear", 1.0));
  CHECK(max_abs_diff(proto.entries, lin.entries) <= 1e-14);
}

TEST_CASE("sensitive direction energy flags degenerate cases") {
  const DataProcess proc = build_markov_source(3, 1, 1.0, 616);

  // W = 0 kills the pullback metric everywhere
  ModelDims dims;
  dims.order = 1;
  dims.d_emb = 2;
  dims.d_model = 3;
  const ArModel flat = ArModel::init(proc.vocab(), dims, 0, 0.0);
  const SimilarityMatrix sim = similarity_matrix(proc, SimilarityKindSpec{});
  const DirectionEnergy de = sensitive_direction_energy(flat, proc, sim);
  CHECK(de.degenerate_metric);
  CHECK(de.energies.empty());

  // constant representations have no spread along any direction
  ModelDims tdims;
  tdims.order = 1;
  tdims.d_emb = 1;
  tdims.d_model = 3;
  tdims.tabular = true;
  ArModel constant = ArModel::init(proc.vocab(), tdims, 4, 0.2);
  for (std::size_t x = 0; x < 3; ++x) {
    for (std::size_t a = 0; a < 3; ++a) {
      constant.table(x, a) = 0.5;
    }
  }
  bool degenerate = false;
  (void)direction_energy(constant, proc, sim, {1.0, 0.0, 0.0}, &degenerate);
  CHECK(degenerate);
}

TEST_CASE("operator spectrum tolerates zero-mass contexts") {
  // surplus sources put mass on two of nine contexts; eigenfunctions must
  // stay finite with zeros on the unweighted contexts
  const DataProcess proc = surplus_process(2, 3);
  const SimilarityMatrix sim = similarity_matrix(proc, SimilarityKindSpec{});
  const SymmetricEigen eig = operator_spectrum(sim, proc.context_dist());
  for (double v : eig.values) {
    CHECK(std::isfinite(v));
  }
  for (std::size_t x = 0; x < proc.context_space()->size(); ++x) {
    for (std::size_t j = 0; j < eig.values.size(); ++j) {
      CHECK(std::isfinite(eig.vectors(x, j)));
      if (proc.context_dist()[x] == 0.0) {
        CHECK(eig.vectors(x, j) == 0.0);
      }
    }
  }
  // mass sits on two contexts with identical conditionals: one unit
  // eigenvalue, everything else zero
  CHECK(eig.values.front() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(eig.values[1]) <= 1e-12);
}

TEST_CASE("spectral report is well formed") {
  const DataProcess proc = build_markov_source(4, 1, 1.0, 717);
  ModelDims dims;
  dims.order = 1;
  dims.d_emb = 2;
  dims.d_model = 4;
  const ArModel model = ArModel::init(proc.vocab(), dims, 5, 0.3);
  const SpectralReport report = spectral_report(model, proc, SimilarityKindSpec{});
  CHECK(report.operator_eigenvalues.size() == 4);
  for (std::size_t i = 1; i < report.operator_eigenvalues.size(); ++i) {
    CHECK(report.operator_eigenvalues[i - 1] >= report.operator_eigenvalues[i]);
  }
  CHECK(report.alignment_score >= -1.0);
  CHECK(report.alignment_score <= 1.0);
}

}  // TEST_SUITE

#include <doctest.h>

#include <cmath>

#include "stochlab/armodel.hpp"
#include "stochlab/datagen.hpp"
#include "stochlab/divergence.hpp"
#include "stochlab/infogeo.hpp"
#include "stochlab/rng.hpp"

using namespace stochlab;

namespace {

ArModel bernoulli_model() {
  const DataProcess proc = build_markov_source(2, 1, 1.0, 1);
  ModelDims dims;
  dims.order = 1;
  dims.d_emb = 1;
  dims.d_model = 1;
  ArModel model = ArModel::init(proc.vocab(), dims, 0, 0.0);
  model.head(0, 0) = 1.0;
  model.head(1, 0) = 0.0;
  return model;
}

ArModel random_model(std::size_t vocab, std::size_t d_model, std::uint64_t seed) {
  const DataProcess proc = build_markov_source(vocab, 1, 1.0, seed);
  ModelDims dims;
  dims.order = 1;
  dims.d_emb = 2;
  dims.d_model = d_model;
  return ArModel::init(proc.vocab(), dims, seed, 0.4);
}

}  // namespace

TEST_SUITE("infogeo") {

TEST_CASE("fisher-rao matrix in the first-probabilities chart") {
  const auto two = Space::integer_range(2);
  const Matrix g2 = fisher_rao_matrix(make_distribution(two, {0.5, 0.5}));
  REQUIRE(g2.rows() == 1);
  CHECK(g2(0, 0) == doctest::Approx(4.0).epsilon(1e-14));  // 1/0.5 + 1/0.5

  const auto three = Space::integer_range(3);
  const Matrix g3 = fisher_rao_matrix(Distribution::uniform(three));
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double expected = 3.0 * ((i == j ? 1.0 : 0.0) + 1.0);  // chart-formula oracle
      CHECK(g3(i, j) == doctest::Approx(expected).epsilon(1e-13));
    }
  }

  CHECK_THROWS_AS((void)fisher_rao_matrix(make_distribution(two, {1.0, 0.0})), Error);
}

TEST_CASE("head jacobian") {
  // W = 0: the map is constant, so the jacobian vanishes
  const DataProcess proc = build_markov_source(3, 1, 1.0, 9);
  ModelDims dims;
  dims.order = 1;
  dims.d_emb = 2;
  dims.d_model = 4;
  const ArModel flat = ArModel::init(proc.vocab(), dims, 0, 0.0);
  const Matrix j0 = head_jacobian(flat, {0.0, 0.0, 0.0, 0.0});
  for (double v : j0.data()) {
    CHECK(v == 0.0);
  }

  // logistic-derivative oracle: sigma'(0) = 1/4
  const ArModel bern = bernoulli_model();
  const Matrix jb = head_jacobian(bern, {0.0});
  CHECK(jb(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(jb(1, 0) == doctest::Approx(-0.25).epsilon(1e-14));

  // finite differences and the zero-column-sum property
  SplitRng rng(71);
  for (int i = 0; i < 10; ++i) {
    const ArModel model = random_model(5, 4, rng.next_u64());
    std::vector<double> h(4);
    for (double& x : h) {
      x = rng.uniform(-1.0, 1.0);
    }
    const Matrix jac = head_jacobian(model, h);
    for (std::size_t a = 0; a < 4; ++a) {
      double col = 0.0;
      for (std::size_t w = 0; w < 5; ++w) {
        col += jac(w, a);
      }
      CHECK(std::abs(col) <= 1e-14);

      std::vector<double> up(h), down(h);
      const double step = 1e-5;
      up[a] += step;
      down[a] -= step;
      const Distribution pu = head_distribution(model, up);
      const Distribution pd = head_distribution(model, down);
      for (std::size_t w = 0; w < 5; ++w) {
        const double fd = (pu[w] - pd[w]) / (2.0 * step);
        CHECK(std::abs(jac(w, a) - fd) /
                  std::max({std::abs(jac(w, a)), std::abs(fd), 1e-3}) <=
              1e-6);
      }
    }
  }
}

TEST_CASE("pullback metric") {
  // W = 0: zero metric, rank zero
  const DataProcess proc = build_markov_source(2, 1, 1.0, 5);
  ModelDims dims;
  dims.order = 1;
  dims.d_emb = 1;
  dims.d_model = 3;
  const ArModel flat = ArModel::init(proc.vocab(), dims, 0, 0.0);
  const PullbackMetric zero = pullback_metric(flat, {0.0, 0.0, 0.0});
  CHECK(zero.rank == 0);
  for (double v : zero.matrix.data()) {
    CHECK(v == 0.0);
  }

  // Bernoulli Fisher information oracle: p (1 - p) at p = 1/2
  const ArModel bern = bernoulli_model();
  const PullbackMetric pb = pullback_metric(bern, {0.0});
  CHECK(pb.matrix(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(pb.rank == 1);

  // rank bound in both dimension regimes
  SplitRng rng(72);
  for (int i = 0; i < 30; ++i) {
    const bool wide = rng.below(2) == 0;
    const ArModel model = random_model(wide ? 2 : 6, wide ? 3 : 4, rng.next_u64());
    std::vector<double> h(model.dims.d_model);
    for (double& x : h) {
      x = rng.uniform(-2.0, 2.0);
    }
    const PullbackMetric g = pullback_metric(model, h);
    CHECK(g.rank <= std::min(model.dims.d_model, model.dims.vocab_size - 1));
    CHECK(g.eigenvalues.back() >= -1e-10);  // PSD after symmetrization

    // the score has mean zero under p_h
    const Distribution p = head_distribution(model, h);
    for (std::size_t a = 0; a < model.dims.d_model; ++a) {
      double mean_score = 0.0;
      double mean_proto = 0.0;
      for (std::size_t w = 0; w < p.size(); ++w) {
        mean_proto += p[w] * model.head(w, a);
      }
      for (std::size_t w = 0; w < p.size(); ++w) {
        mean_score += p[w] * (model.head(w, a) - mean_proto);
      }
      CHECK(std::abs(mean_score) <= 1e-12);
    }
  }
}

TEST_CASE("local expansion of the kl divergence") {
  // null direction: KL stays identically zero
  const DataProcess proc = build_markov_source(2, 1, 1.0, 5);
  ModelDims dims;
  dims.order = 1;
  dims.d_emb = 1;
  dims.d_model = 2;
  const ArModel flat = ArModel::init(proc.vocab(), dims, 0, 0.0);
  const ExpansionReport null_dir =
      verify_local_expansion(flat, {0.0, 0.0}, {1.0, 0.0}, {1e-2, 5e-3});
  for (double r : null_dir.residuals) {
    CHECK(r == 0.0);
  }
  CHECK(std::isinf(null_dir.loglog_slope));

  // Bernoulli at h = 0: KL(p_eps || p_0) ~ eps^2/2 * 1/4
  const ArModel bern = bernoulli_model();
  const ExpansionReport sym = verify_local_expansion(bern, {0.0}, {1.0}, {1e-3});
  CHECK(sym.kl_values[0] == doctest::Approx(0.5 * 1e-6 * 0.25).epsilon(1e-5));
  CHECK(std::abs(sym.residual_ratios[0]) < 1.0);

  // generic point: third-order scaling, residual shrinking ~8x per halving
  const ExpansionReport gen =
      verify_local_expansion(bern, {1.0}, {1.0}, {1e-2, 5e-3, 2.5e-3});
  CHECK(gen.loglog_slope >= 2.7);
  const double ratio = gen.residuals[0] / gen.residuals[1];
  CHECK(ratio >= 6.0);
  CHECK(ratio <= 10.0);

  // random models: slope stays at least cubic
  SplitRng rng(73);
  for (int i = 0; i < 10; ++i) {
    const ArModel model = random_model(4, 4, rng.next_u64());
    std::vector<double> h(4), v(4);
    for (double& x : h) {
      x = rng.uniform(-1.0, 1.0);
    }
    for (double& x : v) {
      x = rng.uniform(-1.0, 1.0);
    }
    const ExpansionReport r = verify_local_expansion(model, h, v, {1e-2, 5e-3, 2.5e-3});
    CHECK(r.loglog_slope >= 2.7);
  }
}

TEST_CASE("chart and score forms of the pullback agree") {
  // both vanish at W = 0
  const DataProcess proc = build_markov_source(3, 1, 1.0, 5);
  ModelDims dims;
  dims.order = 1;
  dims.d_emb = 1;
  dims.d_model = 3;
  const ArModel flat = ArModel::init(proc.vocab(), dims, 0, 0.0);
  CHECK(pullback_consistency(flat, {0.0, 0.0, 0.0}) == 0.0);

  // Bernoulli: both equal 1/4
  const ArModel bern = bernoulli_model();
  CHECK(pullback_consistency(bern, {0.0}) <= 1e-14);

  // random d=4, |V|=6 within 1e-9 (dual-computation oracle)
  SplitRng rng(74);
  for (int i = 0; i < 25; ++i) {
    const ArModel model = random_model(6, 4, rng.next_u64());
    std::vector<double> h(4);
    for (double& x : h) {
      x = rng.uniform(-1.5, 1.5);
    }
    CHECK(pullback_consistency(model, h) <= 1e-9);
  }
}

TEST_CASE("averaged pullback metric is symmetric psd") {
  SplitRng rng(75);
  const DataProcess proc = build_markov_source(4, 1, 1.0, rng.next_u64());
  ModelDims dims;
  dims.order = 1;
  dims.d_emb = 2;
  dims.d_model = 5;
  const ArModel model = ArModel::init(proc.vocab(), dims, 3, 0.4);
  const Matrix avg = averaged_pullback_metric(model, proc);
  const SymmetricEigen eig = symmetric_eigen(avg);
  CHECK(eig.values.back() >= -1e-10);
  for (std::size_t i = 0; i < avg.rows(); ++i) {
    for (std::size_t j = 0; j < avg.cols(); ++j) {
      CHECK(std::abs(avg(i, j) - avg(j, i)) <= 1e-12);
    }
  }
}

}  // TEST_SUITE

#include <doctest.h>

#include <cmath>

#include "stochlab/catinfo.hpp"
#include "stochlab/datagen.hpp"
#include "stochlab/rng.hpp"

using namespace stochlab;

TEST_SUITE("catinfo") {

TEST_CASE("categorical entropy of kernel rows") {
  const auto X = Space::integer_range(2);
  const auto Y = Space::integer_range(4);
  Matrix rows(2, 4);
  rows(0, 2) = 1.0;                                      // deterministic row
  for (std::size_t w = 0; w < 4; ++w) rows(1, w) = 0.25; // uniform row
  const Kernel k(X, Y, std::move(rows));

  CHECK(categorical_entropy_point(k, std::size_t{0}, DivergenceKind::kl()) == 0.0);
  CHECK(categorical_entropy_point(k, std::size_t{1}, DivergenceKind::kl()) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-13));
  CHECK_THROWS_AS((void)categorical_entropy_point(k, std::size_t{5}, DivergenceKind::kl()),
                  Error);

  // direct-summation oracle for a (0.25, 0.75) row
  const auto two = Space::integer_range(2);
  const Distribution p = make_distribution(two, {0.25, 0.75});
  const double expected = 0.25 * std::log(4.0) + 0.75 * std::log(4.0 / 3.0);
  CHECK(categorical_entropy(p, DivergenceKind::kl()) ==
        doctest::Approx(expected).epsilon(1e-13));
  CHECK(expected == doctest::Approx(0.56234).epsilon(1e-4));
}

TEST_CASE("categorical entropy equals shannon entropy for the KL kind") {
  SplitRng rng(31);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto X = Space::integer_range(2 + rng.below(6));
    const Distribution p = random_distribution(X, 0.9, rng);
    worst = std::max(worst,
                     std::abs(categorical_entropy(p, DivergenceKind::kl()) - shannon_entropy(p)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("average categorical entropy") {
  const auto X = Space::integer_range(2);
  const auto Y = Space::integer_range(2);
  Matrix rows(2, 2);
  rows(0, 0) = 0.5;
  rows(0, 1) = 0.5;  // entropy ln 2
  rows(1, 0) = 1.0;  // entropy 0
  const Kernel k(X, Y, std::move(rows));

  const EntropyReport even =
      average_categorical_entropy(k, Distribution::uniform(X), DivergenceKind::kl());
  CHECK(even.average == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-13));
  CHECK(even.per_point.at("0") == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  CHECK(even.per_point.at("1") == 0.0);

  const EntropyReport at_one =
      average_categorical_entropy(k, Distribution::dirac(X, 1), DivergenceKind::kl());
  CHECK(at_one.average == 0.0);
  CHECK(at_one.per_point.count("0") == 0);  // support only

  Matrix det(2, 2);
  det(0, 1) = 1.0;
  det(1, 0) = 1.0;
  const EntropyReport zero = average_categorical_entropy(Kernel(X, Y, std::move(det)),
                                                         Distribution::uniform(X),
                                                         DivergenceKind::kl());
  CHECK(zero.average == 0.0);

  // report invariant: average is the weighting-weighted mean of per_point
  SplitRng rng(35);
  for (int i = 0; i < 20; ++i) {
    const auto S = Space::integer_range(2 + rng.below(4));
    const Kernel kk = random_kernel(S, Space::integer_range(3), 1.0, rng);
    const Distribution mu = random_distribution(S, 0.7, rng);
    const EntropyReport r = average_categorical_entropy(kk, mu, DivergenceKind::kl());
    double recomputed = 0.0;
    for (const auto& [label, psi] : r.per_point) {
      CHECK(psi >= 0.0);
      recomputed += mu[S->index_of(label)] * psi;
    }
    CHECK(std::abs(r.average - recomputed) <= 1e-12);
  }
}

TEST_CASE("categorical mutual information") {
  const auto X = Space::integer_range(2);
  const Distribution p = make_distribution(X, {0.3, 0.7});
  const Distribution q = make_distribution(X, {0.6, 0.4});
  CHECK(categorical_mutual_information(product_joint(p, q), DivergenceKind::kl()) <= 1e-15);

  // perfectly correlated uniform pair
  const Joint corr = diagonal_pair(Distribution::uniform(X));
  CHECK(categorical_mutual_information(corr, DivergenceKind::kl()) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-13));

  // direct-summation oracle for [[0.4, 0.1], [0.1, 0.4]]
  Matrix w(2, 2);
  w(0, 0) = 0.4;
  w(0, 1) = 0.1;
  w(1, 0) = 0.1;
  w(1, 1) = 0.4;
  const Joint j(X, X, std::move(w));
  const double expected = 0.8 * std::log(1.6) + 0.2 * std::log(0.4);
  CHECK(categorical_mutual_information(j, DivergenceKind::kl()) ==
        doctest::Approx(expected).epsilon(1e-13));
  CHECK(expected == doctest::Approx(0.19274).epsilon(1e-4));
}

TEST_CASE("mutual information agrees with the entropy identity") {
  SplitRng rng(32);
  for (int i = 0; i < 200; ++i) {
    const auto X = Space::integer_range(2 + rng.below(3));
    const auto Y = Space::integer_range(2 + rng.below(3));
    const Distribution flat = random_distribution(product_space(X, Y), 0.8, rng);
    Matrix w(X->size(), Y->size());
    for (std::size_t a = 0; a < X->size(); ++a) {
      for (std::size_t b = 0; b < Y->size(); ++b) {
        w(a, b) = flat[a * Y->size() + b];
      }
    }
    const Joint j(X, Y, std::move(w));
    const double mi = categorical_mutual_information(j, DivergenceKind::kl());
    const double shannon = shannon_entropy(marginalize(j, Side::left)) +
                           shannon_entropy(marginalize(j, Side::right)) -
                           shannon_entropy(flat);
    CHECK(std::abs(mi - shannon) <= 1e-10);
  }
}

TEST_CASE("dpi audit") {
  const auto X = Space::integer_range(3);
  SplitRng rng(33);
  const Distribution p = random_distribution(X, 1.0, rng);
  const Distribution q = random_distribution(X, 1.0, rng);

  CHECK(std::abs(dpi_audit(p, q, Kernel::identity(X), DivergenceKind::kl())) <= 1e-12);

  const double collapsed = dpi_audit(p, q, Kernel::discard(X), DivergenceKind::kl());
  CHECK(collapsed == doctest::Approx(divergence(DivergenceKind::kl(), p, q)).epsilon(1e-13));

  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Distribution a = random_distribution(X, 0.8, rng);
    const Distribution b = random_distribution(X, 0.8, rng);
    const Kernel k = random_kernel(X, X, 1.0, rng);
    const double slack = dpi_audit(a, b, k, DivergenceKind::kl());
    if (std::isfinite(slack)) {
      worst = std::min(worst, slack);
    }
  }
  CHECK(worst >= -1e-12);

  // an infinite input divergence cannot be violated
  const Distribution s = make_distribution(X, {1.0, 0.0, 0.0});
  const Distribution t = make_distribution(X, {0.0, 1.0, 0.0});
  CHECK(std::isinf(dpi_audit(s, t, Kernel::identity(X), DivergenceKind::kl())));
}

TEST_CASE("information surplus on hand-built joints") {
  const DivergenceKind kl = DivergenceKind::kl();
  const auto V = Space::integer_range(2);

  // K=1: projection is the identity, surplus must vanish
  const auto H1 = std::make_shared<Space>(std::vector<std::string>{"u", "v"});
  Matrix w1(2, 2);
  w1(0, 0) = 0.4;
  w1(0, 1) = 0.1;
  w1(1, 0) = 0.1;
  w1(1, 1) = 0.4;
  const SurplusReport k1 = information_surplus(Joint(H1, V, std::move(w1)), V, 1, kl);
  CHECK(k1.surplus == 0.0);
  CHECK(k1.mi_full == k1.mi_single);

  // independent H: everything vanishes
  const auto V2 = power_space(V, 2);
  const Distribution block = Distribution::uniform(V2);
  Matrix w2(2, 4);
  for (std::size_t h = 0; h < 2; ++h) {
    for (std::size_t b = 0; b < 4; ++b) {
      w2(h, b) = 0.5 * block[b];
    }
  }
  const SurplusReport indep = information_surplus(Joint(H1, V2, std::move(w2)), V, 2, kl);
  CHECK(std::abs(indep.mi_full) <= 1e-12);
  CHECK(std::abs(indep.surplus) <= 1e-12);

  // two equiprobable hidden states; W_t uniform and independent of H;
  // W_{t+1} = 0 iff H = a. Exact enumeration over all (H, w_t, w_{t+1}).
  Matrix w3(2, 4);
  // blocks in order 0,0 / 0,1 / 1,0 / 1,1 with the first token major
  w3(0, 0) = 0.25;  // H=a, (0,0)
  w3(0, 2) = 0.25;  // H=a, (1,0)
  w3(1, 1) = 0.25;  // H=b, (0,1)
  w3(1, 3) = 0.25;  // H=b, (1,1)
  const SurplusReport constructed = information_surplus(Joint(H1, V2, std::move(w3)), V, 2, kl);
  CHECK(std::abs(constructed.mi_single) <= 1e-12);
  CHECK(constructed.mi_full == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(constructed.surplus == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // malformed product space
  CHECK_THROWS_AS(
      (void)information_surplus(Joint(H1, Space::integer_range(3), Matrix(2, 3, 1.0 / 6.0)), V,
                                2, kl),
      Error);
}

TEST_CASE("surplus nonnegative on randomized instances") {
  SplitRng rng(34);
  const DivergenceKind kl = DivergenceKind::kl();
  for (int i = 0; i < 50; ++i) {
    const DataProcess proc =
        build_markov_source(2 + rng.below(3), 1 + rng.below(2), 1.0, rng.next_u64());
    const std::size_t K = 1 + rng.below(2);
    // randomized encoder: contexts collapse into a random number of bins
    std::vector<std::string> enc(proc.context_space()->size());
    const std::size_t bins = 1 + rng.below(enc.size());
    for (auto& label : enc) {
      label = "g" + std::to_string(rng.below(bins));
    }
    const SurplusReport r =
        information_surplus(joint_hidden_future(proc, enc, K), proc.vocab(), K, kl);
    CHECK(r.surplus >= -1e-12);
    CHECK(r.mi_full >= -1e-12);
  }
}

}  // TEST_SUITE

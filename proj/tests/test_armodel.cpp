#include <doctest.h>

#include <cmath>

#include "stochlab/armodel.hpp"
#include "stochlab/catinfo.hpp"
#include "stochlab/datagen.hpp"
#include "stochlab/rng.hpp"

using namespace stochlab;

namespace {

ArModel zeroed(const DataProcess& proc, std::size_t d_emb, std::size_t d_model,
               bool tabular = false, std::size_t draft = 0) {
  ModelDims dims;
  dims.order = proc.order();
  dims.d_emb = d_emb;
  dims.d_model = d_model;
  dims.tabular = tabular;
  dims.draft_horizon = draft;
  return ArModel::init(proc.vocab(), dims, 0, 0.0);
}

ArModel random_model(const DataProcess& proc, std::uint64_t seed, bool tabular = false,
                     std::size_t d_model = 5, std::size_t draft = 0) {
  ModelDims dims;
  dims.order = proc.order();
  dims.d_emb = 3;
  dims.d_model = d_model;
  dims.tabular = tabular;
  dims.draft_horizon = draft;
  return ArModel::init(proc.vocab(), dims, seed, 0.3);
}

// Tabular model realizing the source exactly: identity head, h_x = log p_x.
ArModel exact_fit(const DataProcess& proc) {
  const std::size_t v = proc.vocab()->size();
  ModelDims dims;
  dims.order = proc.order();
  dims.d_emb = 1;
  dims.d_model = v;
  dims.tabular = true;
  ArModel model = ArModel::init(proc.vocab(), dims, 0, 0.0);
  for (std::size_t w = 0; w < v; ++w) {
    model.head(w, w) = 1.0;
  }
  for (std::size_t x = 0; x < proc.context_space()->size(); ++x) {
    for (std::size_t w = 0; w < v; ++w) {
      model.table(x, w) = std::log(proc.transition()(x, w));
    }
  }
  return model;
}

}  // namespace

TEST_SUITE("armodel") {

TEST_CASE("encode on zero weights gives the zero vector") {
  const DataProcess proc = build_markov_source(3, 2, 1.0, 1);
  const ArModel model = zeroed(proc, 4, 5);
  const std::vector<double> h = encode(model, {1, 2});
  for (double x : h) {
    CHECK(x == 0.0);
  }
  CHECK_THROWS_AS((void)encode(model, {1}), Error);
  CHECK_THROWS_AS((void)encode(model, {1, 9}), Error);
}

TEST_CASE("near-identity backbone passes the embedding through") {
  const DataProcess proc = build_markov_source(3, 1, 1.0, 2);
  ArModel model = zeroed(proc, 4, 4);
  // w1 = eps I, w2 = (1/eps) I linearizes the tanh to machine precision
  const double eps = 1e-6;
  for (std::size_t i = 0; i < 4; ++i) {
    model.w1(i, i) = eps;
    model.w2(i, i) = 1.0 / eps;
  }
  SplitRng rng(3);
  for (std::size_t w = 0; w < 3; ++w) {
    for (std::size_t c = 0; c < 4; ++c) {
      model.embed(w, c) = rng.uniform(-0.2, 0.2);
    }
  }
  for (std::size_t w = 0; w < 3; ++w) {
    const std::vector<double> h = encode(model, {w});
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(h[c] == doctest::Approx(model.embed(w, c)).epsilon(1e-10));
    }
  }
}

TEST_CASE("encode is deterministic and tabular mode is a lookup") {
  const DataProcess proc = build_markov_source(3, 2, 1.0, 4);
  const ArModel a = random_model(proc, 55);
  const ArModel b = random_model(proc, 55);
  const std::vector<double> h1 = encode(a, {2, 1});
  const std::vector<double> h2 = encode(b, {2, 1});
  CHECK(h1 == h2);  // bitwise determinism across identically seeded models

  const ArModel t = random_model(proc, 56, true);
  const std::vector<double> row = encode(t, {2, 1});
  CHECK(row == t.table.row(2 * 3 + 1));
}

TEST_CASE("head distribution") {
  const DataProcess proc = build_markov_source(4, 1, 1.0, 5);
  const ArModel flat = zeroed(proc, 2, 3);
  const Distribution u = head_distribution(flat, {0.0, 0.0, 0.0});
  for (std::size_t w = 0; w < 4; ++w) {
    CHECK(u[w] == doctest::Approx(0.25).epsilon(1e-15));
  }

  const DataProcess proc2 = build_markov_source(2, 1, 1.0, 6);
  ArModel logistic = zeroed(proc2, 1, 1);
  logistic.head(0, 0) = 1.0;
  const Distribution even = head_distribution(logistic, {0.0});
  CHECK(even[0] == 0.5);

  // logistic closed-form oracle at h = 1
  const Distribution at1 = head_distribution(logistic, {1.0});
  const double sigma = 1.0 / (1.0 + std::exp(-1.0));
  CHECK(at1[0] == doctest::Approx(sigma).epsilon(1e-14));
  CHECK(at1[1] == doctest::Approx(1.0 - sigma).epsilon(1e-14));
  CHECK(sigma == doctest::Approx(0.73106).epsilon(1e-4));

  CHECK_THROWS_AS((void)head_distribution(logistic, {std::nan("")}), Error);
}

TEST_CASE("softmax never produces NaN inside the guard region") {
  const DataProcess proc = build_markov_source(4, 1, 1.0, 7);
  const ArModel model = random_model(proc, 8);
  std::vector<double> h(model.dims.d_model, 0.0);
  h[0] = 1e3;
  h[1] = -1e3;
  h[2] = 999.0;
  const Distribution p = head_distribution(model, h);
  double total = 0.0;
  for (double w : p.weights()) {
    CHECK(std::isfinite(w));
    total += w;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("exact losses") {
  SplitRng rng(61);
  const DataProcess proc = build_markov_source(4, 1, 1.0, rng.next_u64());

  // realizable fit: L_KL ~ 0 and L_CE ~ H_data (the identity's equality case)
  const ArModel fit = exact_fit(proc);
  const Losses at_fit = exact_losses(fit, proc);
  CHECK(at_fit.l_kl <= 1e-12);
  CHECK(at_fit.l_ce == doctest::Approx(at_fit.h_data).epsilon(1e-12));

  // uniform model on any source: L_CE = log |V|
  const ArModel flat = zeroed(proc, 2, 3);
  const Losses at_flat = exact_losses(flat, proc);
  CHECK(at_flat.l_ce == doctest::Approx(std::log(4.0)).epsilon(1e-13));

  // uniform model on uniform data: L_KL = 0
  Matrix uniform_table(3, 3, 1.0 / 3.0);
  const DataProcess uniform_proc = build_markov_source(3, 1, std::move(uniform_table));
  const Losses uu = exact_losses(zeroed(uniform_proc, 2, 3), uniform_proc);
  CHECK(uu.l_kl <= 1e-13);

  // vocabulary mismatch
  const DataProcess other = build_markov_source(3, 1, 1.0, 99);
  CHECK_THROWS_AS((void)exact_losses(flat, other), Error);
}

TEST_CASE("nll-kl identity at random parameters") {
  SplitRng rng(62);
  for (int i = 0; i < 100; ++i) {
    const DataProcess proc =
        build_markov_source(2 + rng.below(4), 1 + rng.below(2), 0.9, rng.next_u64());
    const ArModel model = random_model(proc, rng.next_u64(), rng.below(2) == 0);
    const Losses l = exact_losses(model, proc);
    CHECK(std::abs(l.l_ce - (l.l_kl + l.h_data)) <= 1e-10);
  }
}

TEST_CASE("gradient vanishes at the global optimum") {
  const DataProcess proc = build_markov_source(4, 1, 1.0, 1234);
  const ArModel fit = exact_fit(proc);
  CHECK(nll_gradients(fit, proc).max_abs() <= 1e-8);
}

TEST_CASE("head gradient closed form at zero head") {
  const DataProcess proc = build_markov_source(3, 1, 1.0, 77);
  ArModel model = random_model(proc, 78);
  for (double& v : model.head.data()) {
    v = 0.0;
  }
  const Gradients grads = nll_gradients(model, proc);
  const std::vector<double>& g_head = grads.block("head");
  // closed-form oracle: sum_x pi(x) (uniform - p_x) h_x^T
  Matrix oracle(3, model.dims.d_model);
  for (std::size_t x = 0; x < 3; ++x) {
    const std::vector<double> h = encode_context(model, proc, x);
    for (std::size_t w = 0; w < 3; ++w) {
      const double delta = 1.0 / 3.0 - proc.transition()(x, w);
      for (std::size_t a = 0; a < model.dims.d_model; ++a) {
        oracle(w, a) += proc.context_dist()[x] * delta * h[a];
      }
    }
  }
  for (std::size_t i = 0; i < oracle.data().size(); ++i) {
    CHECK(g_head[i] == doctest::Approx(oracle.data()[i]).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  for (std::uint64_t seed : {3u, 14u, 159u}) {
    const DataProcess proc = build_markov_source(4, 2, 1.0, 1000 + seed);
    ArModel model = random_model(proc, seed);
    const Gradients grads = nll_gradients(model, proc);
    auto params = model.parameter_blocks();
    const double step = 1e-5;
    double worst = 0.0;
    for (std::size_t b = 0; b < params.size(); ++b) {
      std::vector<double>& theta = *params[b].second;
      const std::vector<double>& g = grads.blocks[b].second;
      REQUIRE(grads.blocks[b].first == params[b].first);
      for (std::size_t j = 0; j < theta.size(); ++j) {
        const double keep = theta[j];
        theta[j] = keep + step;
        const double up = exact_losses(model, proc).l_ce;
        theta[j] = keep - step;
        const double down = exact_losses(model, proc).l_ce;
        theta[j] = keep;
        const double fd = (up - down) / (2.0 * step);
        worst = std::max(worst, std::abs(g[j] - fd) /
                                    std::max({std::abs(g[j]), std::abs(fd), 1e-2}));
      }
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("training basics") {
  const DataProcess proc = build_markov_source(3, 1, 1.0, 200);

  // epochs = 0 logs only the initial row
  ArModel m0 = random_model(proc, 10);
  TrainConfig none;
  none.epochs = 0;
  none.learning_rate = 0.1;
  const ExperimentTrace t0 = train(m0, proc, none);
  CHECK(t0.rows.size() == 1);
  CHECK(t0.rows[0].epoch == 0);

  // identical seeds, identical traces (bitwise through the CSV)
  TrainConfig config;
  config.learning_rate = 0.1;
  config.epochs = 120;
  config.log_every = 20;
  ArModel a = random_model(proc, 11);
  ArModel b = random_model(proc, 11);
  CHECK(train(a, proc, config).to_csv() == train(b, proc, config).to_csv());

  // small lr keeps L_CE non-increasing between logged epochs
  ArModel c = random_model(proc, 12);
  TrainConfig gentle;
  gentle.learning_rate = 0.05;
  gentle.epochs = 300;
  gentle.log_every = 10;
  const ExperimentTrace tc = train(c, proc, gentle);
  for (std::size_t i = 1; i < tc.rows.size(); ++i) {
    CHECK(tc.rows[i].l_ce <= tc.rows[i - 1].l_ce + 1e-12);
    CHECK(std::abs(tc.rows[i].l_ce - (tc.rows[i].l_kl + tc.rows[i].h_data)) <= 1e-9);
    CHECK(std::abs(tc.rows[i].l_align + tc.rows[i].l_unif - tc.rows[i].l_ce) <= 1e-9);
  }

  // absurd learning rate must trip the divergence guard
  ArModel d = random_model(proc, 13);
  TrainConfig wild;
  wild.learning_rate = 500.0;
  wild.epochs = 2000;
  CHECK_THROWS_AS((void)train(d, proc, wild), Error);
}

TEST_CASE("tabular training reaches the realizable optimum") {
  const DataProcess proc = build_markov_source(2, 1, 1.0, 321);
  ModelDims dims;
  dims.order = 1;
  dims.d_emb = 1;
  dims.d_model = 4;
  dims.tabular = true;
  ArModel model = ArModel::init(proc.vocab(), dims, 5, 0.1);
  TrainConfig config;
  config.learning_rate = 0.5;
  config.epochs = 20000;
  config.log_every = 2000;
  const ExperimentTrace trace = train(model, proc, config);
  const double final_kl = trace.rows.back().l_kl;
  CHECK(final_kl <= 1e-6);
  // KL shrinks along the trace
  CHECK(trace.rows.front().l_kl > final_kl);
}

TEST_CASE("deterministic sources train without tripping the divergence guard") {
  // H_data = 0 here, so the loss starts near zero once converged; continuing
  // to train must not spuriously raise DivergedLoss
  Matrix cycle(2, 2);
  cycle(0, 1) = 1.0;
  cycle(1, 0) = 1.0;
  const DataProcess proc = build_markov_source(2, 1, std::move(cycle));
  CHECK(conditional_entropy_data(proc) == 0.0);

  ModelDims dims;
  dims.order = 1;
  dims.d_emb = 1;
  dims.d_model = 3;
  dims.tabular = true;
  ArModel model = ArModel::init(proc.vocab(), dims, 2, 0.1);
  TrainConfig config;
  config.learning_rate = 0.5;
  config.epochs = 4000;
  config.log_every = 500;
  const ExperimentTrace first = train(model, proc, config);
  CHECK(first.rows.back().l_ce < 1e-2);
  const ExperimentTrace more = train(model, proc, config);  // keep training once converged
  CHECK(more.rows.back().l_ce <= first.rows.back().l_ce + 1e-6);
}

TEST_CASE("momentum optimizer also trains") {
  const DataProcess proc = build_markov_source(3, 1, 1.0, 88);
  ArModel model = random_model(proc, 21);
  TrainConfig config;
  config.learning_rate = 0.05;
  config.momentum = true;
  config.momentum_beta = 0.9;
  config.epochs = 400;
  config.log_every = 100;
  const ExperimentTrace trace = train(model, proc, config);
  CHECK(trace.rows.back().l_kl < trace.rows.front().l_kl);
}

TEST_CASE("alignment-uniformity decomposition") {
  const DataProcess proc = build_markov_source(4, 1, 1.0, 55);

  // W = 0: no alignment force, log-partition is log |V|
  ArModel flat = random_model(proc, 30);
  for (double& v : flat.head.data()) {
    v = 0.0;
  }
  const AlignUnif zero_w = loss_align_unif(flat, proc);
  CHECK(zero_w.l_align == 0.0);
  CHECK(zero_w.l_unif == doctest::Approx(std::log(4.0)).epsilon(1e-13));

  // h_x = 0 for all x: same values through the other factor
  const ArModel zero_h = zeroed(proc, 2, 3);
  const AlignUnif zh = loss_align_unif(zero_h, proc);
  CHECK(zh.l_align == 0.0);
  CHECK(zh.l_unif == doctest::Approx(std::log(4.0)).epsilon(1e-13));

  // random parameters: decomposition reproduces the cross-entropy
  SplitRng rng(63);
  for (int i = 0; i < 100; ++i) {
    const DataProcess p = build_markov_source(2 + rng.below(4), 1, 1.0, rng.next_u64());
    const ArModel m = random_model(p, rng.next_u64());
    const AlignUnif au = loss_align_unif(m, p);
    const Losses l = exact_losses(m, p);
    CHECK(std::abs(au.l_align + au.l_unif - l.l_ce) <= 1e-10);
  }
}

TEST_CASE("draft head") {
  const DataProcess proc = build_markov_source(3, 1, 1.0, 91);

  // zero draft weights: uniform over V^K
  ArModel model = zeroed(proc, 2, 3, false, 2);
  const Distribution d = draft_distribution(model, {0.0, 0.0, 0.0});
  CHECK(d.size() == 9);
  for (std::size_t b = 0; b < 9; ++b) {
    CHECK(d[b] == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
  }

  // K=1 draft head equal to the main head gives the same distribution
  ArModel k1 = random_model(proc, 92, false, 5, 1);
  *k1.draft = k1.head;
  const std::vector<double> h = encode_context(k1, proc, 0);
  const Distribution from_draft = draft_distribution(k1, h);
  const Distribution from_head = head_distribution(k1, h);
  for (std::size_t w = 0; w < 3; ++w) {
    CHECK(from_draft[w] == from_head[w]);
  }

  // training the draft head against the exact two-step conditionals
  ArModel trained = random_model(proc, 93, false, 5, 2);
  const double before = [&] {
    const Kernel dk = draft_kernel(trained, proc);
    double ce = 0.0;
    const Kernel& target = proc.horizon_conditional(2);
    for (std::size_t x = 0; x < proc.context_space()->size(); ++x) {
      for (std::size_t b = 0; b < dk.target()->size(); ++b) {
        if (target(x, b) > 0.0) {
          ce -= proc.context_dist()[x] * target(x, b) * std::log(dk(x, b));
        }
      }
    }
    return ce;
  }();
  const double after = train_draft_head(trained, proc, 0.5, 3000);
  CHECK(after < before);

  // no draft head configured
  const ArModel plain = random_model(proc, 94);
  CHECK_THROWS_AS((void)draft_distribution(plain, {0, 0, 0, 0, 0}), Error);

  // limits
  ModelDims big;
  big.order = 1;
  big.d_emb = 2;
  big.d_model = 3;
  big.draft_horizon = kMaxDraftHorizon + 1;
  CHECK_THROWS_AS((void)ArModel::init(proc.vocab(), big, 0, 0.1), Error);
}

TEST_CASE("hidden labels bin bitwise-equal states") {
  const DataProcess proc = build_markov_source(2, 2, 1.0, 44);
  ArModel model = random_model(proc, 45, true, 3);
  // collapse two contexts to the same vector
  model.table(3, 0) = model.table(0, 0);
  model.table(3, 1) = model.table(0, 1);
  model.table(3, 2) = model.table(0, 2);
  const std::vector<std::string> labels = hidden_labels(model, proc);
  CHECK(labels[0] == labels[3]);
  CHECK(labels[0] != labels[1]);
}

TEST_CASE("checkpoint blocks expose every trainable parameter") {
  const DataProcess proc = build_markov_source(3, 1, 1.0, 46);
  ArModel mlp = random_model(proc, 47);
  std::size_t total = 0;
  for (auto& [name, block] : mlp.parameter_blocks()) {
    total += block->size();
  }
  const std::size_t expected = 3 * 3 + 5 * 3 + 5 + 5 * 5 + 5 + 3 * 5;  // embed w1 b1 w2 b2 head
  CHECK(total == expected);

  ArModel tab = random_model(proc, 48, true);
  std::size_t tab_total = 0;
  for (auto& [name, block] : tab.parameter_blocks()) {
    tab_total += block->size();
  }
  CHECK(tab_total == 3 * 5 + 3 * 5);  // table + head
}

}  // TEST_SUITE

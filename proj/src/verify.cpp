#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stochlab/armodel.hpp"
#include "stochlab/catinfo.hpp"
#include "stochlab/config.hpp"
#include "stochlab/datagen.hpp"
#include "stochlab/divergence.hpp"
#include "stochlab/harness.hpp"
#include "stochlab/infogeo.hpp"
#include "stochlab/rng.hpp"
#include "stochlab/serialize.hpp"
#include "stochlab/spectral.hpp"

namespace stochlab {

namespace {

std::vector<DivergenceKind> proper_kinds() {
  return {DivergenceKind::kl(),           DivergenceKind::total_variation(),
          DivergenceKind::hellinger_sq(), DivergenceKind::jensen_shannon(),
          DivergenceKind::renyi(2.0),     DivergenceKind::renyi(0.5)};
}

std::vector<DivergenceKind> all_kinds() {
  auto kinds = proper_kinds();
  kinds.push_back(DivergenceKind::bhattacharyya());
  return kinds;
}

class Suite {
 public:
  explicit Suite(std::uint64_t seed) : rng_(seed, 0x766572) {}

  SplitRng& rng() { return rng_; }

  template <class Fn>
  void run(const std::string& name, Fn&& fn) {
    CheckResult result;
    result.name = name;
    try {
      std::ostringstream detail;
      result.passed = fn(detail);
      result.detail = detail.str();
    } catch (const std::exception& e) {
      result.passed = false;
      result.detail = std::string("exception: ") + e.what();
    }
    results_.push_back(std::move(result));
  }

  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  SplitRng rng_;
  std::vector<CheckResult> results_;
};

double row_sum_error(const Kernel& k) {
  double worst = 0.0;
  for (std::size_t x = 0; x < k.source()->size(); ++x) {
    double s = 0.0;
    for (std::size_t y = 0; y < k.target()->size(); ++y) {
      s += k(x, y);
    }
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

ArModel small_random_model(const DataProcess& proc, std::uint64_t seed, bool tabular = false,
                           std::size_t d_model = 5) {
  ModelDims dims;
  dims.order = proc.order();
  dims.d_emb = 3;
  dims.d_model = d_model;
  dims.tabular = tabular;
  return ArModel::init(proc.vocab(), dims, seed, 0.3);
}

}  // namespace

std::vector<CheckResult> verify_suite(std::uint64_t seed) {
  Suite suite(seed);

  // ---- finstoch ---------------------------------------------------------
  suite.run("finstoch.row_stochastic_closure", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(1);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const auto X = Space::integer_range(2 + rng.below(4));
      const auto Y = Space::integer_range(2 + rng.below(4));
      const auto Z = Space::integer_range(2 + rng.below(3));
      const Kernel k = random_kernel(X, Y, 1.0, rng);
      const Kernel h = random_kernel(Y, Z, 1.0, rng);
      worst = std::max(worst, row_sum_error(compose(k, h)));
      worst = std::max(worst, row_sum_error(tensor(k, h)));
      const Distribution p = random_distribution(X, 1.0, rng);
      const Distribution pushed = push_forward(p, k);
      double s = 0.0;
      for (double w : pushed.weights()) {
        s += w;
      }
      worst = std::max(worst, std::abs(s - 1.0));
    }
    d << "max row-sum error " << worst;
    return worst <= kNormTolerance;
  });

  suite.run("finstoch.compose_associative", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(2);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const auto X = Space::integer_range(3);
      const auto Y = Space::integer_range(4);
      const auto Z = Space::integer_range(3);
      const auto W = Space::integer_range(2);
      const Kernel a = random_kernel(X, Y, 1.0, rng);
      const Kernel b = random_kernel(Y, Z, 1.0, rng);
      const Kernel c = random_kernel(Z, W, 1.0, rng);
      worst = std::max(worst, max_abs_diff(compose(compose(a, b), c).rows(),
                                           compose(a, compose(b, c)).rows()));
    }
    d << "max elementwise gap " << worst;
    return worst <= kNormTolerance;
  });

  suite.run("finstoch.discard_terminal", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(3);
    for (int i = 0; i < 50; ++i) {
      const auto X = Space::integer_range(2 + rng.below(5));
      const Distribution p = random_distribution(X, 0.7, rng);
      const Distribution u = push_forward(p, Kernel::discard(X));
      if (std::abs(u[0] - 1.0) > kNormTolerance) {
        d << "discard did not produce the point state";
        return false;
      }
    }
    d << "50 states";
    return true;
  });

  suite.run("finstoch.deterministic_compose_is_function_composition",
            [&](std::ostringstream& d) {
              SplitRng rng = suite.rng().split(4);
              for (int i = 0; i < 50; ++i) {
                const auto X = Space::integer_range(4);
                const auto Y = Space::integer_range(3);
                const auto Z = Space::integer_range(5);
                std::vector<std::size_t> f(4), g(3);
                for (auto& v : f) v = rng.below(3);
                for (auto& v : g) v = rng.below(5);
                const Kernel kf = Kernel::deterministic(X, Y, f);
                const Kernel kg = Kernel::deterministic(Y, Z, g);
                const Kernel kfg = compose(kf, kg);
                for (std::size_t x = 0; x < 4; ++x) {
                  if (kfg(x, g[f[x]]) != 1.0) {
                    d << "row " << x << " not one-hot at g(f(x))";
                    return false;
                  }
                }
              }
              d << "50 pairs";
              return true;
            });

  suite.run("finstoch.copy_vs_independent_on_point_mass", [&](std::ostringstream& d) {
    const auto Y = Space::integer_range(4);
    for (std::size_t i = 0; i < 4; ++i) {
      const Distribution delta = Distribution::dirac(Y, i);
      if (max_abs_diff(diagonal_pair(delta).weights(), independent_pair(delta).weights()) !=
          0.0) {
        d << "joints differ on a point mass";
        return false;
      }
    }
    d << "exact coincidence";
    return true;
  });

  // ---- divergence -------------------------------------------------------
  suite.run("divergence.nonnegative_zero_iff_equal", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(5);
    for (int i = 0; i < 200; ++i) {
      const auto X = Space::integer_range(2 + rng.below(5));
      const Distribution p = random_distribution(X, 0.8, rng);
      const Distribution q = random_distribution(X, 0.8, rng);
      for (const auto& kind : proper_kinds()) {
        const double self = divergence(kind, p, p);
        if (!(self <= 1e-12)) {
          d << kind.name() << "(p,p) = " << self;
          return false;
        }
        const double pq = divergence(kind, p, q);
        if (!(pq >= 0.0)) {
          d << kind.name() << "(p,q) = " << pq << " < 0";
          return false;
        }
        double linf = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
          linf = std::max(linf, std::abs(p[j] - q[j]));
        }
        if (linf > 1e-6 && pq <= 0.0) {
          d << kind.name() << " vanished on distinct inputs";
          return false;
        }
      }
    }
    d << "200 pairs x " << proper_kinds().size() << " kinds";
    return true;
  });

  suite.run("divergence.pinsker_and_hellinger_bounds", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(6);
    for (int i = 0; i < 500; ++i) {
      const auto X = Space::integer_range(2 + rng.below(5));
      const Distribution p = random_distribution(X, 1.0, rng);
      const Distribution q = random_distribution(X, 1.0, rng);
      const double kl = divergence(DivergenceKind::kl(), p, q);
      const double tv = divergence(DivergenceKind::total_variation(), p, q);
      const double hsq = divergence(DivergenceKind::hellinger_sq(), p, q);
      if (tv * tv > 0.5 * kl + 1e-12) {
        d << "Pinsker violated: TV^2 " << tv * tv << " > KL/2 " << 0.5 * kl;
        return false;
      }
      if (2.0 * hsq > kl + 1e-12) {
        d << "2 Hsq " << 2.0 * hsq << " > KL " << kl;
        return false;
      }
    }
    d << "500 pairs";
    return true;
  });

  suite.run("divergence.hellinger_bhattacharyya_identity", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(7);
    for (int i = 0; i < 200; ++i) {
      const auto X = Space::integer_range(2 + rng.below(5));
      const Distribution p = random_distribution(X, 0.9, rng);
      const Distribution q = random_distribution(X, 0.9, rng);
      const double bc = bhattacharyya_coefficient(p, q);
      if (std::abs(hellinger_sq_normalized(p, q) - (1.0 - bc)) > 1e-15 ||
          std::abs(hellinger_sq_unnormalized(p, q) - 2.0 * (1.0 - bc)) > 1e-15) {
        d << "identity broken";
        return false;
      }
    }
    d << "Hsq = 1 - BC and 2(1 - BC) exactly";
    return true;
  });

  suite.run("divergence.dpi_all_proper_kinds", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(8);
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const auto X = Space::integer_range(3);
      const auto Y = Space::integer_range(3);
      const Distribution p = random_distribution(X, 0.8, rng);
      const Distribution q = random_distribution(X, 0.8, rng);
      const Kernel k = random_kernel(X, Y, 1.0, rng);
      for (const auto& kind : proper_kinds()) {
        const double slack = dpi_audit(p, q, k, kind);
        if (std::isfinite(slack)) {
          worst = std::min(worst, slack);
        }
      }
    }
    d << "min slack " << worst << " over 2000 triples x kinds";
    return worst >= -1e-12;
  });

  suite.run("divergence.bhattacharyya_grows_under_processing", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(9);
    for (int i = 0; i < 500; ++i) {
      const auto X = Space::integer_range(3);
      const auto Y = Space::integer_range(3);
      const Distribution p = random_distribution(X, 0.8, rng);
      const Distribution q = random_distribution(X, 0.8, rng);
      const Kernel k = random_kernel(X, Y, 1.0, rng);
      const double before = bhattacharyya_coefficient(p, q);
      const double after = bhattacharyya_coefficient(push_forward(p, k), push_forward(q, k));
      if (after < before - 1e-12) {
        d << "similarity decreased: " << before << " -> " << after;
        return false;
      }
    }
    d << "coefficient nondecreasing on 500 triples";
    return true;
  });

  suite.run("divergence.renyi_limit_matches_kl", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(10);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const auto X = Space::integer_range(2 + rng.below(5));
      const Distribution p = random_distribution(X, 2.0, rng);
      const Distribution q = random_distribution(X, 2.0, rng);
      const double kl = divergence(DivergenceKind::kl(), p, q);
      worst = std::max(worst,
                       std::abs(divergence(DivergenceKind::renyi(1.0 + 1e-4), p, q) - kl));
      worst = std::max(worst,
                       std::abs(divergence(DivergenceKind::renyi(1.0 - 1e-4), p, q) - kl));
    }
    d << "max |Renyi(1 +- 1e-4) - KL| = " << worst;
    return worst <= 1e-3;
  });

  // ---- catinfo ----------------------------------------------------------
  suite.run("catinfo.categorical_entropy_equals_shannon", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(11);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const auto X = Space::integer_range(2 + rng.below(6));
      const Distribution p = random_distribution(X, 0.9, rng);
      worst = std::max(worst, std::abs(categorical_entropy(p, DivergenceKind::kl()) -
                                       shannon_entropy(p)));
    }
    d << "max |Psi_KL - H| = " << worst << " over 1000 draws";
    return worst <= 1e-12;
  });

  suite.run("catinfo.entropy_zero_iff_deterministic", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(12);
    const auto X = Space::integer_range(4);
    for (const auto& kind : all_kinds()) {
      for (std::size_t i = 0; i < 4; ++i) {
        const double psi = categorical_entropy(Distribution::dirac(X, i), kind);
        const double expected = kind.tag == DivergenceTag::bhattacharyya ? 1.0 : 0.0;
        if (std::abs(psi - expected) > 1e-15) {
          d << kind.name() << " on a point mass gave " << psi;
          return false;
        }
      }
    }
    for (const auto& kind : proper_kinds()) {
      for (int i = 0; i < 50; ++i) {
        const Distribution p = random_distribution(X, 1.0, rng);
        double maxw = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
          maxw = std::max(maxw, p[j]);
        }
        if (maxw < 0.999 && categorical_entropy(p, kind) <= 0.0) {
          d << kind.name() << " vanished on a spread distribution";
          return false;
        }
      }
    }
    d << "point masses and spread draws behave";
    return true;
  });

  suite.run("catinfo.mutual_information_matches_entropy_identity",
            [&](std::ostringstream& d) {
              SplitRng rng = suite.rng().split(13);
              double worst = 0.0;
              for (int i = 0; i < 200; ++i) {
                const auto X = Space::integer_range(2 + rng.below(3));
                const auto Y = Space::integer_range(2 + rng.below(3));
                const Distribution flat =
                    random_distribution(product_space(X, Y), 0.8, rng);
                Matrix w(X->size(), Y->size());
                for (std::size_t a = 0; a < X->size(); ++a) {
                  for (std::size_t b = 0; b < Y->size(); ++b) {
                    w(a, b) = flat[a * Y->size() + b];
                  }
                }
                const Joint j(X, Y, std::move(w));
                const double mi = categorical_mutual_information(j, DivergenceKind::kl());
                const double hx = shannon_entropy(marginalize(j, Side::left));
                const double hy = shannon_entropy(marginalize(j, Side::right));
                const double hxy = shannon_entropy(flat);
                worst = std::max(worst, std::abs(mi - (hx + hy - hxy)));
              }
              d << "max |I - (Hx + Hy - Hxy)| = " << worst;
              return worst <= 1e-10;
            });

  suite.run("catinfo.surplus_nonnegative_and_exact_on_construction",
            [&](std::ostringstream& d) {
              SplitRng rng = suite.rng().split(14);
              const DivergenceKind kl = DivergenceKind::kl();
              for (int i = 0; i < 30; ++i) {
                const DataProcess proc = build_markov_source(2 + rng.below(3), 1 + rng.below(2),
                                                             1.0, rng.next_u64());
                const std::size_t K = 1 + rng.below(2);
                const SurplusReport r = information_surplus(
                    joint_hidden_future(proc, injective_encoder(proc), K), proc.vocab(), K, kl);
                if (r.surplus < -1e-12) {
                  d << "negative surplus " << r.surplus;
                  return false;
                }
              }
              for (std::size_t m : {2, 3, 4}) {
                const DataProcess sp = surplus_process(m, 7);
                const SurplusReport r = information_surplus(
                    joint_hidden_future(sp, injective_encoder(sp), 2), sp.vocab(), 2, kl);
                if (std::abs(r.surplus - std::log(static_cast<double>(m))) > 1e-10 ||
                    std::abs(r.mi_single) > 1e-12) {
                  d << "surplus_process(" << m << ") gave surplus " << r.surplus;
                  return false;
                }
                const SurplusReport c = information_surplus(
                    joint_hidden_future(sp, constant_encoder(sp), 2), sp.vocab(), 2, kl);
                if (std::abs(c.surplus) > 1e-12) {
                  d << "constant encoder leaked information";
                  return false;
                }
              }
              d << "log(m) surplus for m in {2,3,4}; randomized cases nonnegative";
              return true;
            });

  // ---- datagen ----------------------------------------------------------
  suite.run("datagen.stationarity_residual", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(15);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const DataProcess proc =
          build_markov_source(2 + rng.below(4), 1 + rng.below(2), 0.8, rng.next_u64());
      const std::vector<double> next =
          vecmat(proc.context_dist().weights(), proc.transition().rows());
      // pi P lives on token-shifted contexts; compare through the induced
      // context chain instead: rebuild it explicitly.
      const std::size_t v = proc.vocab()->size();
      const std::size_t n = proc.context_space()->size();
      std::vector<double> pushed(n, 0.0);
      for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t w = 0; w < v; ++w) {
          pushed[context_shift(v, proc.order(), x, w)] +=
              proc.context_dist()[x] * proc.transition()(x, w);
        }
      }
      for (std::size_t x = 0; x < n; ++x) {
        worst = std::max(worst, std::abs(pushed[x] - proc.context_dist()[x]));
      }
      (void)next;
    }
    d << "max ||pi P - pi||_inf = " << worst;
    return worst <= 1e-12;
  });

  suite.run("datagen.horizon_consistency", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(16);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const DataProcess proc =
          build_markov_source(2 + rng.below(3), 1 + rng.below(2), 1.0, rng.next_u64());
      for (std::size_t K : {2, 3}) {
        const Kernel& hk = proc.horizon_conditional(K);
        std::size_t tail = 1;
        for (std::size_t t = 1; t < K; ++t) {
          tail *= proc.vocab()->size();
        }
        for (std::size_t x = 0; x < proc.context_space()->size(); ++x) {
          for (std::size_t w = 0; w < proc.vocab()->size(); ++w) {
            double mass = 0.0;
            for (std::size_t rest = 0; rest < tail; ++rest) {
              mass += hk(x, w * tail + rest);
            }
            worst = std::max(worst, std::abs(mass - proc.transition()(x, w)));
          }
        }
      }
    }
    d << "max first-coordinate marginal gap " << worst;
    return worst <= 1e-12;
  });

  suite.run("datagen.entropy_matches_loss_identity", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(17);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const DataProcess proc = build_markov_source(2 + rng.below(3), 1, 1.0, rng.next_u64());
      const ArModel model = small_random_model(proc, rng.next_u64());
      const Losses l = exact_losses(model, proc);
      worst = std::max(worst, std::abs(conditional_entropy_data(proc) - (l.l_ce - l.l_kl)));
    }
    d << "max |H_data - (L_CE - L_KL)| = " << worst;
    return worst <= 1e-10;
  });

  // ---- armodel ----------------------------------------------------------
  suite.run("armodel.nll_kl_identity", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(18);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const DataProcess proc =
          build_markov_source(2 + rng.below(4), 1 + rng.below(2), 0.9, rng.next_u64());
      const ArModel model = small_random_model(proc, rng.next_u64(), rng.below(2) == 0);
      const Losses l = exact_losses(model, proc);
      worst = std::max(worst, std::abs(l.l_ce - (l.l_kl + l.h_data)));
    }
    d << "max identity residual " << worst << " over 100 pairs";
    return worst <= 1e-10;
  });

  suite.run("armodel.gradient_matches_finite_differences", [&](std::ostringstream& d) {
    double worst = 0.0;
    for (std::uint64_t s : {11u, 22u, 33u}) {
      const DataProcess proc = build_markov_source(4, 2, 1.0, 100 + s);
      ArModel model = small_random_model(proc, s);
      const Gradients grads = nll_gradients(model, proc);
      auto params = model.parameter_blocks();
      const double step = 1e-5;
      for (std::size_t b = 0; b < params.size(); ++b) {
        std::vector<double>& theta = *params[b].second;
        const std::vector<double>& g = grads.blocks[b].second;
        for (std::size_t j = 0; j < theta.size(); ++j) {
          const double keep = theta[j];
          theta[j] = keep + step;
          const double up = exact_losses(model, proc).l_ce;
          theta[j] = keep - step;
          const double down = exact_losses(model, proc).l_ce;
          theta[j] = keep;
          const double fd = (up - down) / (2.0 * step);
          const double rel =
              std::abs(g[j] - fd) / std::max({std::abs(g[j]), std::abs(fd), 1e-2});
          worst = std::max(worst, rel);
        }
      }
    }
    d << "max relative error " << worst << " across all blocks, 3 seeds";
    return worst <= 1e-5;
  });

  suite.run("armodel.align_unif_decomposition", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(19);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const DataProcess proc = build_markov_source(2 + rng.below(4), 1, 1.0, rng.next_u64());
      const ArModel model = small_random_model(proc, rng.next_u64());
      const Losses l = exact_losses(model, proc);
      const AlignUnif au = loss_align_unif(model, proc);
      worst = std::max(worst, std::abs(au.l_align + au.l_unif - l.l_ce));
    }
    d << "max |L_align + L_unif - L_CE| = " << worst;
    return worst <= 1e-10;
  });

  suite.run("armodel.training_deterministic_and_monotone", [&](std::ostringstream& d) {
    const DataProcess proc = build_markov_source(3, 1, 1.0, 5);
    TrainConfig config;
    config.learning_rate = 0.05;
    config.epochs = 200;
    config.log_every = 10;
    ArModel m1 = small_random_model(proc, 42);
    ArModel m2 = small_random_model(proc, 42);
    const ExperimentTrace t1 = train(m1, proc, config);
    const ExperimentTrace t2 = train(m2, proc, config);
    if (t1.to_csv() != t2.to_csv()) {
      d << "same seed produced different traces";
      return false;
    }
    for (std::size_t i = 1; i < t1.rows.size(); ++i) {
      if (t1.rows[i].l_ce > t1.rows[i - 1].l_ce + 1e-12) {
        d << "L_CE increased between logged epochs at small lr";
        return false;
      }
    }
    d << "bitwise-identical traces; L_CE non-increasing";
    return true;
  });

  suite.run("armodel.softmax_stable_at_large_inputs", [&](std::ostringstream& d) {
    const DataProcess proc = build_markov_source(4, 1, 1.0, 3);
    const ArModel model = small_random_model(proc, 8);
    std::vector<double> h(model.dims.d_model, 0.0);
    h[0] = 1e3;
    h[1] = -1e3;
    const Distribution p = head_distribution(model, h);
    double total = 0.0;
    for (double w : p.weights()) {
      if (!std::isfinite(w)) {
        d << "NaN probability";
        return false;
      }
      total += w;
    }
    d << "mass " << total << " at ||h|| = 1e3";
    return std::abs(total - 1.0) <= kNormTolerance;
  });

  suite.run("armodel.entropy_convergence_on_realizable_source", [&](std::ostringstream& d) {
    const DataProcess proc = build_markov_source(4, 1, 1.0, 2024);
    ModelDims dims;
    dims.order = 1;
    dims.d_emb = 2;
    dims.d_model = 6;
    dims.tabular = true;
    ArModel model = ArModel::init(proc.vocab(), dims, 9, 0.1);
    const Losses final_losses = train_to_target(model, proc, 0.5, 50000, 1e-7);
    const double gap =
        std::abs(average_model_entropy(model, proc) - conditional_entropy_data(proc));
    d << "final L_KL " << final_losses.l_kl << ", entropy gap " << gap;
    return final_losses.l_kl <= 1e-6 && gap <= 1e-3;
  });

  // ---- infogeo ----------------------------------------------------------
  suite.run("infogeo.pullback_psd_and_rank_bound", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(20);
    for (int i = 0; i < 60; ++i) {
      const bool narrow = rng.below(2) == 0;
      const DataProcess proc = build_markov_source(narrow ? 6 : 3, 1, 1.0, rng.next_u64());
      const ArModel model =
          small_random_model(proc, rng.next_u64(), false, narrow ? 3 : 6);
      std::vector<double> h(model.dims.d_model, 0.0);
      for (double& v : h) {
        v = rng.uniform(-2.0, 2.0);
      }
      const PullbackMetric g = pullback_metric(model, h);
      if (g.eigenvalues.back() < -1e-10) {
        d << "negative eigenvalue " << g.eigenvalues.back();
        return false;
      }
      const std::size_t bound =
          std::min(model.dims.d_model, model.dims.vocab_size - 1);
      if (g.rank > bound) {
        d << "rank " << g.rank << " above bound " << bound;
        return false;
      }
      double score_mean = 0.0;
      const Distribution p = head_distribution(model, h);
      for (std::size_t a = 0; a < model.dims.d_model; ++a) {
        double m = 0.0;
        for (std::size_t w = 0; w < p.size(); ++w) {
          m += p[w] * model.head(w, a);
        }
        double sum = 0.0;
        for (std::size_t w = 0; w < p.size(); ++w) {
          sum += p[w] * (model.head(w, a) - m);
        }
        score_mean = std::max(score_mean, std::abs(sum));
      }
      if (score_mean > 1e-12) {
        d << "score mean " << score_mean;
        return false;
      }
    }
    d << "PSD, rank bound, zero score mean on 60 draws";
    return true;
  });

  suite.run("infogeo.chart_score_consistency", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(21);
    double worst = 0.0;
    for (int i = 0; i < 40; ++i) {
      const DataProcess proc = build_markov_source(6, 1, 1.0, rng.next_u64());
      const ArModel model = small_random_model(proc, rng.next_u64(), false, 4);
      std::vector<double> h(model.dims.d_model, 0.0);
      for (double& v : h) {
        v = rng.uniform(-1.5, 1.5);
      }
      worst = std::max(worst, pullback_consistency(model, h));
    }
    d << "max |J'g_FR J - score form| = " << worst;
    return worst <= 1e-9;
  });

  suite.run("infogeo.jacobian_matches_finite_differences", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(22);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const DataProcess proc = build_markov_source(5, 1, 1.0, rng.next_u64());
      const ArModel model = small_random_model(proc, rng.next_u64(), false, 4);
      std::vector<double> h(model.dims.d_model, 0.0);
      for (double& v : h) {
        v = rng.uniform(-1.0, 1.0);
      }
      const Matrix jac = head_jacobian(model, h);
      const double step = 1e-5;
      for (std::size_t a = 0; a < model.dims.d_model; ++a) {
        std::vector<double> up(h), down(h);
        up[a] += step;
        down[a] -= step;
        const Distribution pu = head_distribution(model, up);
        const Distribution pd = head_distribution(model, down);
        for (std::size_t w = 0; w < model.dims.vocab_size; ++w) {
          const double fd = (pu[w] - pd[w]) / (2.0 * step);
          const double rel =
              std::abs(jac(w, a) - fd) / std::max({std::abs(jac(w, a)), std::abs(fd), 1e-3});
          worst = std::max(worst, rel);
        }
      }
    }
    d << "max relative error " << worst;
    return worst <= 1e-6;
  });

  suite.run("infogeo.expansion_third_order", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(23);
    double worst_slope = infinity_sentinel();
    for (int i = 0; i < 10; ++i) {
      const DataProcess proc = build_markov_source(4, 1, 1.0, rng.next_u64());
      const ArModel model = small_random_model(proc, rng.next_u64(), false, 4);
      std::vector<double> h(model.dims.d_model), v(model.dims.d_model);
      for (double& x : h) {
        x = rng.uniform(-1.0, 1.0);
      }
      for (double& x : v) {
        x = rng.uniform(-1.0, 1.0);
      }
      const ExpansionReport r = verify_local_expansion(model, h, v, {1e-2, 5e-3, 2.5e-3});
      worst_slope = std::min(worst_slope, r.loglog_slope);
    }
    d << "min log-log slope " << worst_slope;
    return worst_slope >= 2.7;
  });

  // ---- spectral ---------------------------------------------------------
  suite.run("spectral.kernels_symmetric_psd", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(24);
    for (int i = 0; i < 20; ++i) {
      const DataProcess proc = build_markov_source(4, 1, 1.0, rng.next_u64());
      for (const char* name : {"bc", "hellinger_gauss", "linear", "symkl"}) {
        const SimilarityMatrix sim =
            similarity_matrix(proc, SimilarityKindSpec::parse(name, 1.0));
        for (std::size_t a = 0; a < sim.entries.rows(); ++a) {
          for (std::size_t b = 0; b < sim.entries.cols(); ++b) {
            if (sim.entries(a, b) < 0.0 ||
                std::abs(sim.entries(a, b) - sim.entries(b, a)) > 1e-14) {
              d << name << " not symmetric nonnegative";
              return false;
            }
          }
          if ((std::string(name) == "bc" || std::string(name) == "hellinger_gauss") &&
              std::abs(sim.entries(a, a) - 1.0) > 1e-12) {
            d << name << " diagonal differs from 1";
            return false;
          }
        }
        if (std::string(name) != "symkl") {
          const SymmetricEigen eig = symmetric_eigen(sim.entries);
          if (eig.values.back() < -1e-10) {
            d << name << " has eigenvalue " << eig.values.back();
            return false;
          }
        }
      }
    }
    d << "bc/hellinger_gauss/linear PSD; all symmetric";
    return true;
  });

  suite.run("spectral.dirichlet_equals_laplacian_form", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(25);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const DataProcess proc = build_markov_source(5, 1, 1.0, rng.next_u64());
      const SimilarityMatrix sim = similarity_matrix(proc, SimilarityKindSpec{});
      const Distribution& mu = proc.context_dist();
      const std::size_t n = mu.size();
      std::vector<double> phi(n, 0.0);
      for (double& x : phi) {
        x = rng.uniform(-2.0, 2.0);
      }
      // Independent route: weighted graph Laplacian quadratic form.
      Matrix w(n, n);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          w(a, b) = sim.entries(a, b) * mu[a] * mu[b];
        }
      }
      double quad = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        double degree = 0.0;
        for (std::size_t b = 0; b < n; ++b) {
          degree += w(a, b);
        }
        quad += degree * phi[a] * phi[a];
        for (std::size_t b = 0; b < n; ++b) {
          quad -= w(a, b) * phi[a] * phi[b];
        }
      }
      worst = std::max(worst, std::abs(dirichlet_energy(sim, mu, phi) - quad));
    }
    d << "max |E_K - phi' L phi| = " << worst;
    return worst <= 1e-10;
  });

  suite.run("spectral.operator_spectrum_reference_cases", [&](std::ostringstream& d) {
    const auto X = Space::integer_range(5);
    const Distribution mu = Distribution::uniform(X);
    SimilarityKindSpec kind;
    Matrix eye(5, 5);
    for (std::size_t i = 0; i < 5; ++i) {
      eye(i, i) = 1.0;
    }
    const SymmetricEigen diag_eig =
        operator_spectrum(SimilarityMatrix{X, kind, eye}, mu);
    for (double v : diag_eig.values) {
      if (std::abs(v - 0.2) > 1e-12) {
        d << "identity-like kernel eigenvalue " << v << " != 1/n";
        return false;
      }
    }
    Matrix ones(5, 5, 1.0);
    const SymmetricEigen ones_eig =
        operator_spectrum(SimilarityMatrix{X, kind, ones}, mu);
    if (std::abs(ones_eig.values.front() - 1.0) > 1e-12) {
      d << "all-ones kernel top eigenvalue " << ones_eig.values.front();
      return false;
    }
    for (std::size_t i = 1; i < ones_eig.values.size(); ++i) {
      if (std::abs(ones_eig.values[i]) > 1e-12) {
        d << "all-ones kernel is not rank one";
        return false;
      }
    }
    d << "identity-like and all-ones spectra match";
    return true;
  });

  suite.run("spectral.alignment_bounds_and_reference_points", [&](std::ostringstream& d) {
    SplitRng rng = suite.rng().split(26);
    const DataProcess proc = build_markov_source(5, 1, 1.0, 77);
    const SimilarityMatrix sim = similarity_matrix(proc, SimilarityKindSpec{});
    const Distribution& mu = proc.context_dist();
    const std::size_t n = mu.size();

    std::vector<std::vector<double>> collapsed(n, std::vector<double>{1.0, 2.0});
    const AlignmentResult degen = gram_alignment(collapsed, sim, mu);
    if (!degen.degenerate || degen.score != 0.0) {
      d << "collapsed representations not flagged";
      return false;
    }

    // Eigenvector embedding of K reproduces K as its Gram matrix.
    const SymmetricEigen eig = symmetric_eigen(sim.entries);
    std::vector<std::vector<double>> embed(n, std::vector<double>(n, 0.0));
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t j = 0; j < n; ++j) {
        embed[x][j] = std::sqrt(std::max(eig.values[j], 0.0)) * eig.vectors(x, j);
      }
    }
    const AlignmentResult perfect = gram_alignment(embed, sim, mu);
    if (std::abs(perfect.score - 1.0) > 1e-9) {
      d << "eigenvector embedding scored " << perfect.score;
      return false;
    }

    for (int i = 0; i < 50; ++i) {
      std::vector<std::vector<double>> randoms(n, std::vector<double>(4, 0.0));
      for (auto& hv : randoms) {
        for (double& x : hv) {
          x = rng.normal();
        }
      }
      const AlignmentResult r = gram_alignment(randoms, sim, mu);
      if (r.score < -1.0 - 1e-12 || r.score > 1.0 + 1e-12) {
        d << "score outside [-1, 1]";
        return false;
      }
    }
    d << "degenerate flag, perfect embedding, bounded scores";
    return true;
  });

  suite.run("spectral.alignment_rises_with_training", [&](std::ostringstream& d) {
    const DataProcess proc = two_cluster_source(8, 0.05, 99);
    ModelDims dims;
    dims.order = 1;
    dims.d_emb = 2;
    dims.d_model = 8;
    dims.tabular = true;
    const ArModel initial = ArModel::init(proc.vocab(), dims, 31, 0.1);
    ArModel trained = initial;
    const Losses start = exact_losses(trained, proc);
    const Losses end = train_to_target(trained, proc, 0.5, 100000, 1e-7);
    if (end.l_kl > start.l_kl / 100.0) {
      d << "KL did not drop two orders of magnitude";
      return false;
    }
    const double before =
        gram_alignment(initial, proc, prototype_similarity(proc, initial)).score;
    const SimilarityMatrix final_kernel = prototype_similarity(proc, trained);
    const double after = gram_alignment(trained, proc, final_kernel).score;

    SplitRng rng = suite.rng().split(27);
    std::vector<double> baseline;
    const std::size_t n = proc.context_space()->size();
    for (int s = 0; s < 100; ++s) {
      std::vector<std::vector<double>> h(n, std::vector<double>(dims.d_model, 0.0));
      for (auto& row : h) {
        for (double& x : row) {
          x = rng.normal();
        }
      }
      baseline.push_back(gram_alignment(h, final_kernel, proc.context_dist()).score);
    }
    std::sort(baseline.begin(), baseline.end());
    const double p95 = baseline[94];
    d << "alignment " << before << " -> " << after << ", random-h p95 " << p95;
    return after > before && after > p95;
  });

  suite.run("spectral.separation_rank_correlation", [&](std::ostringstream& d) {
    const DataProcess proc = two_cluster_source(8, 0.05, 99);
    ModelDims dims;
    dims.order = 1;
    dims.d_emb = 2;
    dims.d_model = 8;
    dims.tabular = true;
    ArModel model = ArModel::init(proc.vocab(), dims, 31, 0.1);
    const Losses end = train_to_target(model, proc, 0.5, 100000, 1e-7);
    const Matrix avg = averaged_pullback_metric(model, proc);
    const std::size_t n = proc.context_space()->size();
    std::vector<std::vector<double>> h(n);
    for (std::size_t x = 0; x < n; ++x) {
      h[x] = encode_context(model, proc, x);
    }
    std::vector<double> data_dist, rep_dist;
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = x + 1; y < n; ++y) {
        data_dist.push_back(
            std::sqrt(hellinger_sq_normalized(proc.transition().row_distribution(x),
                                              proc.transition().row_distribution(y))));
        double quad = 0.0;
        for (std::size_t a = 0; a < h[x].size(); ++a) {
          for (std::size_t b = 0; b < h[x].size(); ++b) {
            quad += (h[x][a] - h[y][a]) * avg(a, b) * (h[x][b] - h[y][b]);
          }
        }
        rep_dist.push_back(std::sqrt(std::max(quad, 0.0)));
      }
    }
    const double rho = spearman_rank_correlation(data_dist, rep_dist);
    d << "final L_KL " << end.l_kl << ", Spearman rho " << rho;
    return end.l_kl <= 1e-6 && rho >= 0.5;
  });

  // ---- harness ----------------------------------------------------------
  suite.run("harness.run_deterministic_with_consistent_manifest", [&](std::ostringstream& d) {
    namespace fs = std::filesystem;
    const std::string config_text =
        "[source]\nvocab_size = 3\nseed = 5\n\n"
        "[train]\nepochs = 25\nlog_every = 5\n\n"
        "[probes]\nlosses = true\nsurplus = true\n";
    const fs::path dir1 = fs::temp_directory_path() / "stochlab_verify_run1";
    const fs::path dir2 = fs::temp_directory_path() / "stochlab_verify_run2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    RunConfig c1 = RunConfig::from_text(config_text);
    c1.output_dir = dir1.string();
    RunConfig c2 = RunConfig::from_text(config_text);
    c2.output_dir = dir2.string();
    const RunManifest m1 = run(c1);
    const RunManifest m2 = run(c2);
    bool ok = m1.files.size() == m2.files.size();
    for (std::size_t i = 0; ok && i < m1.files.size(); ++i) {
      ok = m1.files[i].checksum == m2.files[i].checksum;
      std::ifstream in(dir1 / m1.files[i].name, std::ios::binary);
      std::ostringstream bytes;
      bytes << in.rdbuf();
      ok = ok && fnv1a_hex(bytes.str()) == m1.files[i].checksum;
    }
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    d << m1.files.size() << " files, checksums stable across reruns and matching the manifest";
    return ok;
  });

  suite.run("harness.trace_identity_holds_along_training", [&](std::ostringstream& d) {
    const DataProcess proc = build_markov_source(3, 1, 1.0, 11);
    ArModel model = small_random_model(proc, 4);
    TrainConfig config;
    config.learning_rate = 0.2;
    config.epochs = 300;
    config.log_every = 25;
    const ExperimentTrace trace = train(model, proc, config);
    double worst = 0.0;
    for (const TraceRow& row : trace.rows) {
      worst = std::max(worst, std::abs(row.l_ce - (row.l_kl + row.h_data)));
    }
    d << "max identity residual along trace " << worst;
    return worst <= 1e-9;
  });

  return suite.take();
}

}  // namespace stochlab

#include "stochlab/infogeo.hpp"

#include <algorithm>
#include <cmath>

#include "stochlab/divergence.hpp"

namespace stochlab {

namespace {

void check_full_support(const Distribution& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < kSimplexFloor) {
      raise(Errc::boundary_simplex,
            "probability " + std::to_string(p[i]) + " below the simplex floor");
    }
  }
}

std::vector<double> normalized(const std::vector<double>& v) {
  double n2 = 0.0;
  for (double x : v) {
    n2 += x * x;
  }
  if (n2 <= 0.0) {
    raise(Errc::non_finite_input, "direction must be nonzero");
  }
  std::vector<double> out(v);
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : out) {
    x *= inv;
  }
  return out;
}

}  // namespace

Matrix fisher_rao_matrix(const Distribution& p) {
  check_full_support(p);
  const std::size_t n = p.size();
  if (n < 2) {
    raise(Errc::length_mismatch, "fisher_rao_matrix: need at least two outcomes");
  }
  Matrix g(n - 1, n - 1);
  const double last = 1.0 / p[n - 1];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = 0; j + 1 < n; ++j) {
      g(i, j) = (i == j ? 1.0 / p[i] : 0.0) + last;
    }
  }
  return g;
}

Matrix head_jacobian(const ArModel& model, const std::vector<double>& h) {
  const Distribution p = head_distribution(model, h);
  const std::size_t v = model.dims.vocab_size;
  const std::size_t d = model.dims.d_model;
  std::vector<double> mean(d, 0.0);
  for (std::size_t w = 0; w < v; ++w) {
    for (std::size_t a = 0; a < d; ++a) {
      mean[a] += p[w] * model.head(w, a);
    }
  }
  Matrix jac(v, d);
  for (std::size_t w = 0; w < v; ++w) {
    for (std::size_t a = 0; a < d; ++a) {
      jac(w, a) = p[w] * (model.head(w, a) - mean[a]);
    }
  }
  return jac;
}

PullbackMetric pullback_metric(const ArModel& model, const std::vector<double>& h) {
  const Distribution p = head_distribution(model, h);
  const std::size_t v = model.dims.vocab_size;
  const std::size_t d = model.dims.d_model;

  std::vector<double> mean(d, 0.0);
  for (std::size_t w = 0; w < v; ++w) {
    for (std::size_t a = 0; a < d; ++a) {
      mean[a] += p[w] * model.head(w, a);
    }
  }

  Matrix g(d, d);
  std::vector<double> score(d, 0.0);
  for (std::size_t w = 0; w < v; ++w) {
    if (p[w] == 0.0) {
      continue;
    }
    for (std::size_t a = 0; a < d; ++a) {
      score[a] = model.head(w, a) - mean[a];
    }
    for (std::size_t a = 0; a < d; ++a) {
      const double pa = p[w] * score[a];
      for (std::size_t b = a; b < d; ++b) {
        g(a, b) += pa * score[b];
      }
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      g(a, b) = g(b, a);
    }
  }

  PullbackMetric out;
  out.at = h;
  out.matrix = g;
  SymmetricEigen eig = symmetric_eigen(g);
  out.eigenvalues = std::move(eig.values);
  out.eigenvectors = std::move(eig.vectors);
  out.rank = numerical_rank(out.eigenvalues, kRankTolerance);
  return out;
}

ExpansionReport verify_local_expansion(const ArModel& model, const std::vector<double>& h,
                                       const std::vector<double>& direction,
                                       const std::vector<double>& epsilons) {
  const std::vector<double> v = normalized(direction);
  const Distribution base = head_distribution(model, h);
  const PullbackMetric metric = pullback_metric(model, h);

  double quad = 0.0;
  for (std::size_t a = 0; a < v.size(); ++a) {
    for (std::size_t b = 0; b < v.size(); ++b) {
      quad += v[a] * metric.matrix(a, b) * v[b];
    }
  }

  ExpansionReport report;
  report.quadratic_form = quad;
  for (double eps : epsilons) {
    std::vector<double> shifted(h);
    for (std::size_t a = 0; a < shifted.size(); ++a) {
      shifted[a] += eps * v[a];
    }
    const Distribution moved = head_distribution(model, shifted);
    const double kl = divergence(DivergenceKind::kl(), moved, base);
    const double residual = kl - 0.5 * eps * eps * quad;
    report.epsilons.push_back(eps);
    report.kl_values.push_back(kl);
    report.residuals.push_back(residual);
    report.residual_ratios.push_back(residual / (eps * eps * eps));
  }

  // Least-squares slope of log|r| against log eps, skipping residuals at the
  // arithmetic noise floor. All-floor residuals mean the expansion is exact
  // to round-off, which we report as an infinite slope.
  const double floor = 1e-15 * std::max(1.0, std::abs(quad));
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < report.epsilons.size(); ++i) {
    if (std::abs(report.residuals[i]) > floor) {
      lx.push_back(std::log(report.epsilons[i]));
      ly.push_back(std::log(std::abs(report.residuals[i])));
    }
  }
  if (lx.size() < 2) {
    report.loglog_slope = infinity_sentinel();
  } else {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      num += (lx[i] - mx) * (ly[i] - my);
      den += (lx[i] - mx) * (lx[i] - mx);
    }
    report.loglog_slope = num / den;
  }
  return report;
}

double pullback_consistency(const ArModel& model, const std::vector<double>& h) {
  const Distribution p = head_distribution(model, h);
  check_full_support(p);
  const std::size_t v = model.dims.vocab_size;
  const std::size_t d = model.dims.d_model;

  const Matrix jac_full = head_jacobian(model, h);
  Matrix jac_chart(v - 1, d);
  for (std::size_t i = 0; i + 1 < v; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      jac_chart(i, a) = jac_full(i, a);
    }
  }
  const Matrix g_fr = fisher_rao_matrix(p);
  const Matrix chart_form = matmul(transpose(jac_chart), matmul(g_fr, jac_chart));
  const Matrix score_form = pullback_metric(model, h).matrix;
  return max_abs_diff(chart_form, score_form);
}

Matrix averaged_pullback_metric(const ArModel& model, const DataProcess& proc) {
  const Distribution& pi = proc.context_dist();
  const std::size_t d = model.dims.d_model;
  Matrix avg(d, d);
  for (std::size_t x = 0; x < pi.size(); ++x) {
    if (pi[x] == 0.0) {
      continue;
    }
    const Matrix g = pullback_metric(model, encode_context(model, proc, x)).matrix;
    for (std::size_t i = 0; i < d * d; ++i) {
      avg.data()[i] += pi[x] * g.data()[i];
    }
  }
  return avg;
}

}  // namespace stochlab

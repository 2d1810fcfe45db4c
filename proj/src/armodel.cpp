#include "stochlab/armodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "stochlab/divergence.hpp"
#include "stochlab/rng.hpp"

namespace stochlab {

namespace {

void fill_uniform(std::vector<double>& v, SplitRng rng, double scale) {
  for (double& x : v) {
    x = rng.uniform(-scale, scale);
  }
}

void check_finite(const std::vector<double>& v, Errc code, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      raise(code, std::string(what) + ": non-finite value");
    }
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Softmax of z with max shift; writes probabilities and returns logsumexp.
double softmax_into(const std::vector<double>& z, std::vector<double>& p) {
  double m = z[0];
  for (double v : z) {
    m = std::max(m, v);
  }
  double total = 0.0;
  p.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - m);
    total += p[i];
  }
  for (double& v : p) {
    v /= total;
  }
  return m + std::log(total);
}

}  // namespace

ArModel ArModel::init(const SpacePtr& vocab, const ModelDims& dims_in, std::uint64_t seed,
                      double init_scale) {
  ModelDims dims = dims_in;
  dims.vocab_size = vocab->size();
  if (dims.d_emb < 1 || dims.d_model < 1) {
    raise(Errc::length_mismatch, "ArModel: dimensions must be positive");
  }
  if (dims.order < 1) {
    raise(Errc::length_mismatch, "ArModel: order must be >= 1");
  }
  if (dims.draft_horizon > kMaxDraftHorizon) {
    raise(Errc::horizon_too_large, "draft horizon above " + std::to_string(kMaxDraftHorizon));
  }
  if (dims.draft_horizon > 0 && dims.vocab_size > kMaxDraftVocab) {
    raise(Errc::length_mismatch, "draft head limited to vocabularies of size <= " +
                                     std::to_string(kMaxDraftVocab));
  }

  ArModel m;
  m.dims = dims;
  m.vocab = vocab;
  m.seed = seed;

  SplitRng root(seed, 0x6d6f64656cULL);
  m.embed = Matrix(dims.vocab_size, dims.d_emb);
  fill_uniform(m.embed.data(), root.split(1), init_scale);
  m.w1 = Matrix(dims.d_model, dims.order * dims.d_emb);
  fill_uniform(m.w1.data(), root.split(2), init_scale);
  m.b1.assign(dims.d_model, 0.0);
  fill_uniform(m.b1, root.split(3), init_scale);
  m.w2 = Matrix(dims.d_model, dims.d_model);
  fill_uniform(m.w2.data(), root.split(4), init_scale);
  m.b2.assign(dims.d_model, 0.0);
  fill_uniform(m.b2, root.split(5), init_scale);
  m.head = Matrix(dims.vocab_size, dims.d_model);
  fill_uniform(m.head.data(), root.split(6), init_scale);

  if (dims.tabular) {
    std::size_t n_ctx = 1;
    for (std::size_t i = 0; i < dims.order; ++i) {
      n_ctx *= dims.vocab_size;
    }
    m.table = Matrix(n_ctx, dims.d_model);
    fill_uniform(m.table.data(), root.split(7), init_scale);
  }
  if (dims.draft_horizon > 0) {
    std::size_t blocks = 1;
    for (std::size_t i = 0; i < dims.draft_horizon; ++i) {
      blocks *= dims.vocab_size;
    }
    m.draft = Matrix(blocks, dims.d_model);
    fill_uniform(m.draft->data(), root.split(8), init_scale);
  }
  return m;
}

std::size_t ArModel::context_count() const {
  std::size_t n = 1;
  for (std::size_t i = 0; i < dims.order; ++i) {
    n *= dims.vocab_size;
  }
  return n;
}

std::vector<std::pair<std::string, std::vector<double>*>> ArModel::parameter_blocks() {
  std::vector<std::pair<std::string, std::vector<double>*>> blocks;
  if (dims.tabular) {
    blocks.emplace_back("table", &table.data());
  } else {
    blocks.emplace_back("embed", &embed.data());
    blocks.emplace_back("w1", &w1.data());
    blocks.emplace_back("b1", &b1);
    blocks.emplace_back("w2", &w2.data());
    blocks.emplace_back("b2", &b2);
  }
  blocks.emplace_back("head", &head.data());
  return blocks;
}

std::vector<std::pair<std::string, const std::vector<double>*>> ArModel::parameter_blocks()
    const {
  std::vector<std::pair<std::string, const std::vector<double>*>> blocks;
  for (auto& [name, ptr] : const_cast<ArModel*>(this)->parameter_blocks()) {
    blocks.emplace_back(name, ptr);
  }
  return blocks;
}

std::vector<double> encode(const ArModel& model, const std::vector<std::size_t>& context) {
  if (context.size() != model.dims.order) {
    raise(Errc::length_mismatch, "encode: context length != model order");
  }
  for (std::size_t t : context) {
    if (t >= model.dims.vocab_size) {
      raise(Errc::unknown_element, "encode: token index out of range");
    }
  }
  if (model.dims.tabular) {
    std::size_t idx = 0;
    for (std::size_t t : context) {
      idx = idx * model.dims.vocab_size + t;
    }
    return model.table.row(idx);
  }

  const std::size_t d_emb = model.dims.d_emb;
  std::vector<double> e(model.dims.order * d_emb, 0.0);
  for (std::size_t i = 0; i < context.size(); ++i) {
    const double* row = model.embed.row_ptr(context[i]);
    std::copy(row, row + d_emb, e.begin() + static_cast<std::ptrdiff_t>(i * d_emb));
  }
  std::vector<double> u = matvec(model.w1, e);
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = std::tanh(u[i] + model.b1[i]);
  }
  std::vector<double> h = matvec(model.w2, u);
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] += model.b2[i];
  }
  return h;
}

std::vector<double> encode_context(const ArModel& model, const DataProcess& proc,
                                   std::size_t x) {
  return encode(model, context_tokens(proc.vocab()->size(), proc.order(), x));
}

Distribution head_distribution(const ArModel& model, const std::vector<double>& h) {
  check_finite(h, Errc::non_finite_input, "head_distribution");
  if (h.size() != model.dims.d_model) {
    raise(Errc::length_mismatch, "head_distribution: hidden size != d_model");
  }
  std::vector<double> z = matvec(model.head, h);
  std::vector<double> p;
  softmax_into(z, p);
  return Distribution(model.vocab, std::move(p));
}

Kernel generation_kernel(const ArModel& model, const DataProcess& proc) {
  if (!same_space(model.vocab, proc.vocab()) || model.dims.order != proc.order()) {
    raise(Errc::vocab_mismatch, "generation_kernel: model and source disagree");
  }
  const std::size_t n_ctx = proc.context_space()->size();
  Matrix rows(n_ctx, model.dims.vocab_size);
  for (std::size_t x = 0; x < n_ctx; ++x) {
    const Distribution p = head_distribution(model, encode_context(model, proc, x));
    for (std::size_t w = 0; w < p.size(); ++w) {
      rows(x, w) = p[w];
    }
  }
  return Kernel(proc.context_space(), model.vocab, std::move(rows));
}

namespace {

struct ForwardState {
  std::vector<double> e;       // concat embeddings (mlp only)
  std::vector<double> a;       // tanh activations (mlp only)
  std::vector<double> h;       // hidden state
  std::vector<double> logp;    // log probabilities
  std::vector<double> p;       // probabilities
};

ForwardState forward_context(const ArModel& model, std::size_t x) {
  ForwardState st;
  const std::size_t v = model.dims.vocab_size;
  const std::vector<std::size_t> tokens = context_tokens(v, model.dims.order, x);
  if (model.dims.tabular) {
    st.h = model.table.row(x);
  } else {
    const std::size_t d_emb = model.dims.d_emb;
    st.e.assign(model.dims.order * d_emb, 0.0);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const double* row = model.embed.row_ptr(tokens[i]);
      std::copy(row, row + d_emb, st.e.begin() + static_cast<std::ptrdiff_t>(i * d_emb));
    }
    std::vector<double> u = matvec(model.w1, st.e);
    st.a.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      st.a[i] = std::tanh(u[i] + model.b1[i]);
    }
    st.h = matvec(model.w2, st.a);
    for (std::size_t i = 0; i < st.h.size(); ++i) {
      st.h[i] += model.b2[i];
    }
  }
  std::vector<double> z = matvec(model.head, st.h);
  const double lse = softmax_into(z, st.p);
  st.logp.resize(z.size());
  for (std::size_t w = 0; w < z.size(); ++w) {
    st.logp[w] = z[w] - lse;
  }
  return st;
}

void check_compatible(const ArModel& model, const DataProcess& proc) {
  if (!same_space(model.vocab, proc.vocab())) {
    raise(Errc::vocab_mismatch, "model vocabulary != source vocabulary");
  }
  if (model.dims.order != proc.order()) {
    raise(Errc::vocab_mismatch, "model order != source order");
  }
}

}  // namespace

Losses exact_losses(const ArModel& model, const DataProcess& proc) {
  check_compatible(model, proc);
  const Distribution& pi = proc.context_dist();
  Losses out;
  for (std::size_t x = 0; x < pi.size(); ++x) {
    if (pi[x] == 0.0) {
      continue;
    }
    const ForwardState st = forward_context(model, x);
    const std::vector<double> px = proc.transition().rows().row(x);
    double ce = 0.0;
    double kl = 0.0;
    for (std::size_t w = 0; w < px.size(); ++w) {
      if (px[w] == 0.0) {
        continue;
      }
      ce -= px[w] * st.logp[w];
      kl += px[w] * (std::log(px[w]) - st.logp[w]);
    }
    out.l_ce += pi[x] * ce;
    out.l_kl += pi[x] * kl;
  }
  out.h_data = conditional_entropy_data(proc);
  return out;
}

const std::vector<double>& Gradients::block(const std::string& name) const {
  for (const auto& [n, g] : blocks) {
    if (n == name) {
      return g;
    }
  }
  raise(Errc::unknown_element, "no gradient block named '" + name + "'");
}

double Gradients::max_abs() const {
  double m = 0.0;
  for (const auto& [n, g] : blocks) {
    for (double v : g) {
      m = std::max(m, std::abs(v));
    }
  }
  return m;
}

Gradients nll_gradients(const ArModel& model, const DataProcess& proc) {
  check_compatible(model, proc);
  const Distribution& pi = proc.context_dist();
  const std::size_t v = model.dims.vocab_size;
  const std::size_t d = model.dims.d_model;
  const std::size_t d_emb = model.dims.d_emb;

  Matrix g_head(v, d);
  Matrix g_table;
  Matrix g_embed, g_w1, g_w2;
  std::vector<double> g_b1, g_b2;
  if (model.dims.tabular) {
    g_table = Matrix(model.table.rows(), d);
  } else {
    g_embed = Matrix(v, d_emb);
    g_w1 = Matrix(d, model.dims.order * d_emb);
    g_b1.assign(d, 0.0);
    g_w2 = Matrix(d, d);
    g_b2.assign(d, 0.0);
  }

  for (std::size_t x = 0; x < pi.size(); ++x) {
    const double weight = pi[x];
    if (weight == 0.0) {
      continue;
    }
    const ForwardState st = forward_context(model, x);
    const std::vector<double> px = proc.transition().rows().row(x);

    // d L / d logits
    std::vector<double> delta(v);
    for (std::size_t w = 0; w < v; ++w) {
      delta[w] = st.p[w] - px[w];
    }

    for (std::size_t w = 0; w < v; ++w) {
      const double dw = weight * delta[w];
      if (dw == 0.0) {
        continue;
      }
      for (std::size_t a = 0; a < d; ++a) {
        g_head(w, a) += dw * st.h[a];
      }
    }

    // back into the hidden state
    std::vector<double> v_h(d, 0.0);
    for (std::size_t w = 0; w < v; ++w) {
      const double dw = delta[w];
      if (dw == 0.0) {
        continue;
      }
      for (std::size_t a = 0; a < d; ++a) {
        v_h[a] += dw * model.head(w, a);
      }
    }

    if (model.dims.tabular) {
      for (std::size_t a = 0; a < d; ++a) {
        g_table(x, a) += weight * v_h[a];
      }
      continue;
    }

    for (std::size_t i = 0; i < d; ++i) {
      const double vi = weight * v_h[i];
      g_b2[i] += vi;
      for (std::size_t j = 0; j < d; ++j) {
        g_w2(i, j) += vi * st.a[j];
      }
    }
    std::vector<double> du(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      double da = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        da += model.w2(i, j) * v_h[i];
      }
      du[j] = da * (1.0 - st.a[j] * st.a[j]);
    }
    const std::vector<std::size_t> tokens = context_tokens(v, model.dims.order, x);
    for (std::size_t j = 0; j < d; ++j) {
      const double dj = weight * du[j];
      g_b1[j] += dj;
      for (std::size_t c = 0; c < st.e.size(); ++c) {
        g_w1(j, c) += dj * st.e[c];
      }
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      for (std::size_t c = 0; c < d_emb; ++c) {
        double de = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          de += model.w1(j, i * d_emb + c) * du[j];
        }
        g_embed(tokens[i], c) += weight * de;
      }
    }
  }

  Gradients out;
  if (model.dims.tabular) {
    out.blocks.emplace_back("table", std::move(g_table.data()));
  } else {
    out.blocks.emplace_back("embed", std::move(g_embed.data()));
    out.blocks.emplace_back("w1", std::move(g_w1.data()));
    out.blocks.emplace_back("b1", std::move(g_b1));
    out.blocks.emplace_back("w2", std::move(g_w2.data()));
    out.blocks.emplace_back("b2", std::move(g_b2));
  }
  out.blocks.emplace_back("head", std::move(g_head.data()));
  for (const auto& [name, g] : out.blocks) {
    check_finite(g, Errc::non_finite_gradient, name.c_str());
  }
  return out;
}

const char* ExperimentTrace::csv_header() {
  return "epoch,L_CE,L_KL,H_data,avg_cat_entropy_model,avg_cat_entropy_data,"
         "dirichlet_energy,alignment_score,L_align,L_unif";
}

std::string ExperimentTrace::to_csv() const {
  std::ostringstream os;
  os << csv_header() << '\n';
  for (const TraceRow& r : rows) {
    os << r.epoch << ',' << fmt17(r.l_ce) << ',' << fmt17(r.l_kl) << ',' << fmt17(r.h_data)
       << ',' << fmt17(r.avg_cat_entropy_model) << ',' << fmt17(r.avg_cat_entropy_data) << ','
       << fmt17(r.dirichlet_energy) << ',' << fmt17(r.alignment_score) << ','
       << fmt17(r.l_align) << ',' << fmt17(r.l_unif) << '\n';
  }
  return os.str();
}

double average_model_entropy(const ArModel& model, const DataProcess& proc) {
  check_compatible(model, proc);
  const Distribution& pi = proc.context_dist();
  double h = 0.0;
  for (std::size_t x = 0; x < pi.size(); ++x) {
    if (pi[x] == 0.0) {
      continue;
    }
    const ForwardState st = forward_context(model, x);
    h += pi[x] * shannon_entropy(st.p);
  }
  return h;
}

AlignUnif loss_align_unif(const ArModel& model, const DataProcess& proc) {
  check_compatible(model, proc);
  const Distribution& pi = proc.context_dist();
  AlignUnif out;
  for (std::size_t x = 0; x < pi.size(); ++x) {
    if (pi[x] == 0.0) {
      continue;
    }
    const std::vector<double> h = encode_context(model, proc, x);
    const std::vector<double> px = proc.transition().rows().row(x);
    // gbar = sum_w p_x(w) g(w); align term is -<gbar, h>
    std::vector<double> gbar(model.dims.d_model, 0.0);
    for (std::size_t w = 0; w < px.size(); ++w) {
      if (px[w] == 0.0) {
        continue;
      }
      for (std::size_t a = 0; a < gbar.size(); ++a) {
        gbar[a] += px[w] * model.head(w, a);
      }
    }
    std::vector<double> z = matvec(model.head, h);
    std::vector<double> scratch;
    const double lse = softmax_into(z, scratch);
    out.l_align -= pi[x] * dot(gbar, h);
    out.l_unif += pi[x] * lse;
  }
  return out;
}

namespace {

TraceRow make_row(std::size_t epoch, const ArModel& model, const DataProcess& proc,
                  const Losses& losses, const TraceProbe& probe) {
  TraceRow row;
  row.epoch = epoch;
  row.l_ce = losses.l_ce;
  row.l_kl = losses.l_kl;
  row.h_data = losses.h_data;
  row.avg_cat_entropy_model = average_model_entropy(model, proc);
  row.avg_cat_entropy_data = losses.h_data;
  const AlignUnif au = loss_align_unif(model, proc);
  row.l_align = au.l_align;
  row.l_unif = au.l_unif;
  if (probe) {
    probe(model, row);
  }
  return row;
}

}  // namespace

ExperimentTrace train(ArModel& model, const DataProcess& proc, const TrainConfig& config,
                      const TraceProbe& probe) {
  check_compatible(model, proc);
  if (!(config.learning_rate > 0.0)) {
    raise(Errc::config_invalid, "train: learning_rate must be positive");
  }
  const std::size_t log_every = std::max<std::size_t>(1, config.log_every);

  ExperimentTrace trace;
  Losses losses = exact_losses(model, proc);
  const double initial_ce = losses.l_ce;
  trace.rows.push_back(make_row(0, model, proc, losses, probe));

  std::vector<std::vector<double>> velocity;
  auto params = model.parameter_blocks();
  if (config.momentum) {
    velocity.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      velocity[i].assign(params[i].second->size(), 0.0);
    }
  }

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const Gradients grads = nll_gradients(model, proc);
    for (std::size_t i = 0; i < params.size(); ++i) {
      std::vector<double>& theta = *params[i].second;
      const std::vector<double>& g = grads.blocks[i].second;
      if (config.momentum) {
        std::vector<double>& vel = velocity[i];
        for (std::size_t j = 0; j < theta.size(); ++j) {
          vel[j] = config.momentum_beta * vel[j] + g[j];
          theta[j] -= config.learning_rate * vel[j];
        }
      } else {
        for (std::size_t j = 0; j < theta.size(); ++j) {
          theta[j] -= config.learning_rate * g[j];
        }
      }
    }

    losses = exact_losses(model, proc);
    // The 1e-6 floor keeps a fully converged model on a deterministic
    // source (initial loss ~ 0) from tripping the guard on round-off.
    if (!std::isfinite(losses.l_ce) || losses.l_ce > 10.0 * initial_ce + 1e-6) {
      raise(Errc::diverged_loss,
            "cross-entropy exceeded 10x its initial value at epoch " + std::to_string(epoch));
    }
    if (epoch % log_every == 0 || epoch == config.epochs) {
      trace.rows.push_back(make_row(epoch, model, proc, losses, probe));
    }
  }
  return trace;
}

Distribution draft_distribution(const ArModel& model, const std::vector<double>& h) {
  if (!model.has_draft()) {
    raise(Errc::no_draft_head, "model has no draft head");
  }
  check_finite(h, Errc::non_finite_input, "draft_distribution");
  std::vector<double> z = matvec(*model.draft, h);
  std::vector<double> p;
  softmax_into(z, p);
  return Distribution(power_space(model.vocab, model.dims.draft_horizon), std::move(p));
}

Kernel draft_kernel(const ArModel& model, const DataProcess& proc) {
  if (!model.has_draft()) {
    raise(Errc::no_draft_head, "model has no draft head");
  }
  check_compatible(model, proc);
  const std::size_t n_ctx = proc.context_space()->size();
  const std::size_t blocks = model.draft->rows();
  Matrix rows(n_ctx, blocks);
  for (std::size_t x = 0; x < n_ctx; ++x) {
    const Distribution p = draft_distribution(model, encode_context(model, proc, x));
    for (std::size_t b = 0; b < blocks; ++b) {
      rows(x, b) = p[b];
    }
  }
  return Kernel(proc.context_space(), power_space(model.vocab, model.dims.draft_horizon),
                std::move(rows));
}

double train_draft_head(ArModel& model, const DataProcess& proc, double learning_rate,
                        std::size_t epochs) {
  if (!model.has_draft()) {
    raise(Errc::no_draft_head, "model has no draft head");
  }
  check_compatible(model, proc);
  const std::size_t K = model.dims.draft_horizon;
  const Kernel& target = proc.horizon_conditional(K);
  const Distribution& pi = proc.context_dist();
  const std::size_t blocks = model.draft->rows();
  const std::size_t d = model.dims.d_model;

  // Frozen encoder: hidden states are fixed, only the draft matrix moves.
  std::vector<std::vector<double>> hs(pi.size());
  for (std::size_t x = 0; x < pi.size(); ++x) {
    hs[x] = encode_context(model, proc, x);
  }

  double loss = 0.0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    Matrix grad(blocks, d);
    loss = 0.0;
    for (std::size_t x = 0; x < pi.size(); ++x) {
      if (pi[x] == 0.0) {
        continue;
      }
      std::vector<double> z = matvec(*model.draft, hs[x]);
      std::vector<double> p;
      const double lse = softmax_into(z, p);
      for (std::size_t b = 0; b < blocks; ++b) {
        const double q = target(x, b);
        if (q > 0.0) {
          loss -= pi[x] * q * (z[b] - lse);
        }
        const double delta = pi[x] * (p[b] - q);
        if (delta == 0.0) {
          continue;
        }
        for (std::size_t a = 0; a < d; ++a) {
          grad(b, a) += delta * hs[x][a];
        }
      }
    }
    for (std::size_t i = 0; i < model.draft->data().size(); ++i) {
      model.draft->data()[i] -= learning_rate * grad.data()[i];
    }
  }
  return loss;
}

std::vector<std::string> hidden_labels(const ArModel& model, const DataProcess& proc) {
  check_compatible(model, proc);
  const std::size_t n_ctx = proc.context_space()->size();
  std::vector<std::vector<double>> seen;
  std::vector<std::string> labels(n_ctx);
  for (std::size_t x = 0; x < n_ctx; ++x) {
    const std::vector<double> h = encode_context(model, proc, x);
    std::size_t bin = seen.size();
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (seen[i].size() == h.size() &&
          std::memcmp(seen[i].data(), h.data(), h.size() * sizeof(double)) == 0) {
        bin = i;
        break;
      }
    }
    if (bin == seen.size()) {
      seen.push_back(h);
    }
    labels[x] = "h" + std::to_string(bin);
  }
  return labels;
}

}  // namespace stochlab

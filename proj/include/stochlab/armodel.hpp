#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stochlab/datagen.hpp"
#include "stochlab/finstoch.hpp"
#include "stochlab/linalg.hpp"

namespace stochlab {

inline constexpr std::size_t kMaxDraftHorizon = 3;
inline constexpr std::size_t kMaxDraftVocab = 8;

struct ModelDims {
  std::size_t vocab_size = 2;
  std::size_t order = 1;
  std::size_t d_emb = 4;
  std::size_t d_model = 8;
  bool tabular = false;        // one free hidden vector per context
  std::size_t draft_horizon = 0;  // 0 = no draft head
};

/// Toy trainable autoregressive model: token embeddings, a one-hidden-layer
/// tanh MLP over the concatenated context embeddings, and a linear-softmax
/// head whose rows are the token prototypes. In tabular mode the encoder is
/// a free hidden vector per context (the realizable model class). An
/// optional draft head predicts the next K tokens jointly.
class ArModel {
 public:
  ModelDims dims;
  SpacePtr vocab;
  std::uint64_t seed = 0;

  Matrix embed;       // vocab_size x d_emb
  Matrix w1;          // d_model x (order * d_emb)
  std::vector<double> b1;
  Matrix w2;          // d_model x d_model
  std::vector<double> b2;
  Matrix head;        // vocab_size x d_model; row w is the prototype g(w)
  Matrix table;       // tabular mode: n_contexts x d_model
  std::optional<Matrix> draft;  // vocab_size^K x d_model

  static ArModel init(const SpacePtr& vocab, const ModelDims& dims, std::uint64_t seed,
                      double init_scale);

  std::size_t context_count() const;
  bool has_draft() const noexcept { return draft.has_value(); }

  /// All trainable blocks, in a fixed order, as (name, pointer) pairs.
  /// The draft head is excluded: it trains against its own objective.
  std::vector<std::pair<std::string, std::vector<double>*>> parameter_blocks();
  std::vector<std::pair<std::string, const std::vector<double>*>> parameter_blocks() const;
};

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  bool momentum = false;
  double momentum_beta = 0.9;
  double weight_init_scale = 0.1;
  std::size_t log_every = 1;
};

struct Losses {
  double l_ce = 0.0;   // cross-entropy, nats
  double l_kl = 0.0;   // average KL(data || model), nats
  double h_data = 0.0; // conditional entropy of the source, nats
};

struct AlignUnif {
  double l_align = 0.0;
  double l_unif = 0.0;
};

struct TraceRow {
  std::size_t epoch = 0;
  double l_ce = 0.0;
  double l_kl = 0.0;
  double h_data = 0.0;
  double avg_cat_entropy_model = 0.0;
  double avg_cat_entropy_data = 0.0;
  double dirichlet_energy = 0.0;
  double alignment_score = 0.0;
  double l_align = 0.0;
  double l_unif = 0.0;
};

struct ExperimentTrace {
  std::vector<TraceRow> rows;

  static const char* csv_header();
  /// Fixed column order, floats with 17 significant digits.
  std::string to_csv() const;
};

/// Fills the dirichlet_energy and alignment_score columns of a trace row
/// from the current parameters; wired up by the harness (they need the
/// spectral module, which sits above this one).
using TraceProbe = std::function<void(const ArModel&, TraceRow&)>;

/// Deterministic encoder: hidden state for a context given as token indices.
std::vector<double> encode(const ArModel& model, const std::vector<std::size_t>& context_tokens);
/// Hidden state for context index x of the process's context space.
std::vector<double> encode_context(const ArModel& model, const DataProcess& proc, std::size_t x);

/// Softmax over head logits with max-shift; never NaN for finite h.
Distribution head_distribution(const ArModel& model, const std::vector<double>& h);

/// The model's generation kernel k(context -> next token), realized exactly
/// over the finite context space.
Kernel generation_kernel(const ArModel& model, const DataProcess& proc);

/// Exact full-population losses over the context distribution.
Losses exact_losses(const ArModel& model, const DataProcess& proc);

/// Gradient record matching the model's trainable blocks.
struct Gradients {
  std::vector<std::pair<std::string, std::vector<double>>> blocks;

  const std::vector<double>& block(const std::string& name) const;
  double max_abs() const;
};

/// Exact full-batch gradient of the cross-entropy loss.
Gradients nll_gradients(const ArModel& model, const DataProcess& proc);

/// Full-batch gradient descent. Deterministic given the model and config;
/// logs a row at epoch 0 and every log_every epochs plus the final epoch.
ExperimentTrace train(ArModel& model, const DataProcess& proc, const TrainConfig& config,
                      const TraceProbe& probe = nullptr);

/// Alignment/uniformity split of the cross-entropy under the log-linear
/// head: l_align + l_unif equals l_ce identically.
AlignUnif loss_align_unif(const ArModel& model, const DataProcess& proc);

/// Joint next-K distribution from the draft head.
Distribution draft_distribution(const ArModel& model, const std::vector<double>& h);
Kernel draft_kernel(const ArModel& model, const DataProcess& proc);

/// Trains only the draft head (frozen encoder) against the exact K-step
/// conditionals of the source. Returns the final draft cross-entropy.
double train_draft_head(ArModel& model, const DataProcess& proc, double learning_rate,
                        std::size_t epochs);

/// Hidden labels per context, binning bitwise-equal hidden vectors.
std::vector<std::string> hidden_labels(const ArModel& model, const DataProcess& proc);

/// Average categorical entropy (KL kind) of the model head under the
/// context distribution, i.e. the average Shannon entropy of p_theta(.|x).
double average_model_entropy(const ArModel& model, const DataProcess& proc);

}  // namespace stochlab

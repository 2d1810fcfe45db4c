#include "stochlab/harness.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stochlab/armodel.hpp"
#include "stochlab/catinfo.hpp"
#include "stochlab/infogeo.hpp"
#include "stochlab/serialize.hpp"
#include "stochlab/spectral.hpp"

namespace stochlab {

namespace fs = std::filesystem;

DataProcess build_source(const SourceSpec& spec) {
  if (spec.kind == "random") {
    return build_markov_source(spec.vocab_size, spec.order, spec.gamma, spec.seed);
  }
  if (spec.kind == "explicit") {
    if (!spec.transition.has_value()) {
      raise(Errc::config_invalid, "explicit source needs a transition matrix");
    }
    return build_markov_source(spec.vocab_size, spec.order, *spec.transition);
  }
  if (spec.kind == "surplus") {
    return surplus_process(spec.vocab_size, spec.seed);
  }
  if (spec.kind == "two_cluster") {
    return two_cluster_source(spec.vocab_size, spec.wobble, spec.seed);
  }
  raise(Errc::config_invalid, "unknown source kind '" + spec.kind + "'");
}

Losses train_to_target(ArModel& model, const DataProcess& proc, double learning_rate,
                       std::size_t max_epochs, double kl_target) {
  TrainConfig chunk;
  chunk.learning_rate = learning_rate;
  chunk.log_every = 1000000;  // only endpoint rows matter here
  Losses losses = exact_losses(model, proc);
  std::size_t spent = 0;
  while (losses.l_kl > kl_target && spent < max_epochs) {
    chunk.epochs = std::min<std::size_t>(500, max_epochs - spent);
    train(model, proc, chunk);
    spent += chunk.epochs;
    losses = exact_losses(model, proc);
  }
  return losses;
}

std::string RunManifest::to_json_text() const {
  Json files_json = Json::array();
  for (const ManifestEntry& e : files) {
    files_json.push_back(Json{{"name", e.name}, {"checksum", e.checksum}});
  }
  return dump_json(Json{{"config_hash", config_hash},
                        {"version", version},
                        {"wall_seconds", wall_seconds},
                        {"files", std::move(files_json)}});
}

namespace {

class Emitter {
 public:
  explicit Emitter(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) {
      raise(Errc::io_failure, "cannot create output directory '" + dir_.string() + "'");
    }
  }

  void write(const std::string& name, const std::string& bytes) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) {
      raise(Errc::io_failure, "cannot open '" + (dir_ / name).string() + "' for writing");
    }
    out << bytes;
    if (!out) {
      raise(Errc::io_failure, "short write to '" + name + "'");
    }
    entries_.push_back({name, fnv1a_hex(bytes)});
  }

  const std::vector<ManifestEntry>& entries() const { return entries_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<ManifestEntry> entries_;
};

Json losses_to_json(const Losses& l) {
  return Json{{"L_CE", l.l_ce},
              {"L_KL", l.l_kl},
              {"H_data", l.h_data},
              {"identity_residual", l.l_ce - (l.l_kl + l.h_data)},
              {"unit", "nats"}};
}

Json trace_to_json(const ExperimentTrace& trace) {
  Json rows = Json::array();
  for (const TraceRow& r : trace.rows) {
    rows.push_back(Json{{"epoch", r.epoch},
                        {"L_CE", r.l_ce},
                        {"L_KL", r.l_kl},
                        {"H_data", r.h_data},
                        {"avg_cat_entropy_model", r.avg_cat_entropy_model},
                        {"avg_cat_entropy_data", r.avg_cat_entropy_data},
                        {"dirichlet_energy", r.dirichlet_energy},
                        {"alignment_score", r.alignment_score},
                        {"L_align", r.l_align},
                        {"L_unif", r.l_unif}});
  }
  return Json{{"unit", "nats"}, {"rows", std::move(rows)}};
}

std::string similarity_csv(const SimilarityMatrix& sim) {
  std::ostringstream os;
  os << "context";
  for (const auto& label : sim.contexts->labels()) {
    os << ',' << label;
  }
  os << '\n';
  for (std::size_t i = 0; i < sim.entries.rows(); ++i) {
    os << sim.contexts->label(i);
    for (std::size_t j = 0; j < sim.entries.cols(); ++j) {
      os << ',' << format_double(sim.entries(i, j));
    }
    os << '\n';
  }
  return os.str();
}

Json geometry_probe(const ArModel& model, const DataProcess& proc) {
  Json metrics = Json::array();
  const std::size_t n_show = std::min<std::size_t>(4, proc.context_space()->size());
  for (std::size_t x = 0; x < n_show; ++x) {
    Json entry = to_json(pullback_metric(model, encode_context(model, proc, x)));
    entry["context"] = proc.context_space()->label(x);
    metrics.push_back(std::move(entry));
  }

  double worst_consistency = 0.0;
  for (std::size_t x = 0; x < proc.context_space()->size(); ++x) {
    worst_consistency = std::max(
        worst_consistency, pullback_consistency(model, encode_context(model, proc, x)));
  }

  const std::vector<double> h0 = encode_context(model, proc, 0);
  const PullbackMetric pm = pullback_metric(model, h0);
  std::vector<double> direction(h0.size(), 0.0);
  for (std::size_t i = 0; i < h0.size(); ++i) {
    direction[i] = pm.eigenvectors(i, 0);
  }
  const ExpansionReport expansion =
      verify_local_expansion(model, h0, direction, {1e-2, 5e-3, 2.5e-3});

  Json expansion_json{{"epsilons", expansion.epsilons},
                      {"kl_values", expansion.kl_values},
                      {"residuals", expansion.residuals},
                      {"residual_over_eps3", expansion.residual_ratios},
                      {"quadratic_form", expansion.quadratic_form},
                      {"loglog_slope", std::isfinite(expansion.loglog_slope)
                                           ? Json(expansion.loglog_slope)
                                           : Json("exact")}};
  return Json{{"metrics", std::move(metrics)},
              {"max_consistency_discrepancy", worst_consistency},
              {"local_expansion", std::move(expansion_json)}};
}

}  // namespace

RunManifest run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Emitter emit(config.output_dir);

  const bool want_json =
      std::find(config.formats.begin(), config.formats.end(), "json") != config.formats.end();
  const bool want_csv =
      std::find(config.formats.begin(), config.formats.end(), "csv") != config.formats.end();

  const DataProcess proc = build_source(config.source);
  ModelDims dims;
  dims.order = proc.order();
  dims.d_emb = config.model.d_emb;
  dims.d_model = config.model.d_model;
  dims.tabular = config.model.tabular;
  dims.draft_horizon = config.model.draft_horizon;
  ArModel model =
      ArModel::init(proc.vocab(), dims, config.train.seed, config.train.weight_init_scale);

  const std::string config_hash = fnv1a_hex(config.text);
  if (want_json) {
    emit.write("source.json", dump_json(to_json(proc)));
    Json init_json = to_json(model);
    init_json["config_hash"] = config_hash;
    emit.write("model_init.json", dump_json(init_json));
  }

  const Losses initial = exact_losses(model, proc);
  const double initial_model_entropy = average_model_entropy(model, proc);
  const SimilarityMatrix sim = similarity_matrix(proc, config.spectral_kind);
  const TraceProbe probe = [&proc, &sim](const ArModel& m, TraceRow& row) {
    const AlignmentResult a = gram_alignment(m, proc, prototype_similarity(proc, m));
    row.alignment_score = a.score;
    const DirectionEnergy de = sensitive_direction_energy(m, proc, sim, 1);
    row.dirichlet_energy = de.energies.count(0) != 0 ? de.energies.at(0) : 0.0;
  };

  const ExperimentTrace trace = train(model, proc, config.train, probe);
  if (model.has_draft()) {
    train_draft_head(model, proc, config.train.learning_rate, config.train.epochs);
  }
  const Losses final_losses = exact_losses(model, proc);

  if (want_csv) {
    emit.write("trace.csv", trace.to_csv());
  }
  if (want_json) {
    emit.write("trace.json", dump_json(trace_to_json(trace)));
    Json final_json = to_json(model);
    final_json["config_hash"] = config_hash;
    emit.write("model_final.json", dump_json(final_json));
  }

  if (config.probes.losses && want_json) {
    emit.write("losses.json", dump_json(Json{{"initial", losses_to_json(initial)},
                                             {"final", losses_to_json(final_losses)}}));
  }

  if (config.probes.entropy && want_json) {
    const DivergenceKind kl = DivergenceKind::kl();
    const EntropyReport model_report =
        average_categorical_entropy(generation_kernel(model, proc), proc.context_dist(), kl);
    const EntropyReport data_report =
        average_categorical_entropy(proc.transition(), proc.context_dist(), kl);
    Json j{{"model_head", to_json(model_report)},
           {"model_head_initial_average", initial_model_entropy},
           {"data_head", to_json(data_report)},
           {"conditional_entropy_data", conditional_entropy_data(proc)}};
    if (model.has_draft()) {
      // Draft vs verify comparison; reported side by side, no asserted order.
      const EntropyReport draft_report =
          average_categorical_entropy(draft_kernel(model, proc), proc.context_dist(), kl);
      j["draft_head"] = to_json(draft_report);
      j["verify_head_average"] = model_report.average;
      j["draft_head_average"] = draft_report.average;
    }
    emit.write("entropy.json", dump_json(j));
  }

  if (config.probes.surplus && want_json) {
    const DivergenceKind kl = DivergenceKind::kl();
    const std::size_t horizon = config.surplus_horizon;
    const SurplusReport data_side = information_surplus(
        joint_hidden_future(proc, injective_encoder(proc), horizon), proc.vocab(), horizon, kl);
    const SurplusReport model_side = information_surplus(
        joint_hidden_future(proc, hidden_labels(model, proc), horizon), proc.vocab(), horizon,
        kl);
    emit.write("surplus.json", dump_json(Json{{"injective_encoder", to_json(data_side)},
                                              {"model_encoder", to_json(model_side)}}));
  }

  if (config.probes.geometry && want_json) {
    emit.write("geometry.json", dump_json(geometry_probe(model, proc)));
  }

  if (config.probes.spectral) {
    if (want_json) {
      const SpectralReport report = spectral_report(model, proc, config.spectral_kind);
      emit.write("spectral.json",
                 dump_json(Json{{"report", to_json(report)}, {"kernel", to_json(sim)}}));
    }
    if (want_csv) {
      emit.write("similarity.csv", similarity_csv(sim));
    }
  }

  if (config.probes.verify && want_json) {
    const std::vector<CheckResult> checks = verify_suite(config.train.seed);
    Json list = Json::array();
    bool all = true;
    for (const CheckResult& c : checks) {
      all = all && c.passed;
      list.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    emit.write("verify.json", dump_json(Json{{"all_passed", all}, {"checks", std::move(list)}}));
  }

  RunManifest manifest;
  manifest.config_hash = config_hash;
  manifest.version = kVersion;
  manifest.files = emit.entries();
  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  {
    std::ofstream out(fs::path(config.output_dir) / "manifest.json",
                      std::ios::binary | std::ios::trunc);
    if (!out) {
      raise(Errc::io_failure, "cannot write manifest");
    }
    out << manifest.to_json_text();
  }
  return manifest;
}

}  // namespace stochlab

#include "stochlab/serialize.hpp"

#include <cstdio>

namespace stochlab {

namespace {

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) {
    raise(Errc::config_invalid, "expected a nonempty array of rows");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j.at(0).size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j.at(i).size() != cols) {
      raise(Errc::config_invalid, "ragged matrix rows");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(i, c) = j.at(i).at(c).get<double>();
    }
  }
  return m;
}

Json vector_to_json(const std::vector<double>& v) {
  return Json(v);
}

}  // namespace

Json to_json(const Distribution& p) {
  return Json{{"space", p.space()->labels()}, {"weights", p.weights()}};
}

Distribution distribution_from_json(const Json& j) {
  auto space = std::make_shared<Space>(j.at("space").get<std::vector<std::string>>());
  return Distribution(space, j.at("weights").get<std::vector<double>>());
}

Json to_json(const Kernel& k) {
  return Json{{"source", k.source()->labels()},
              {"target", k.target()->labels()},
              {"rows", matrix_to_json(k.rows())}};
}

Kernel kernel_from_json(const Json& j) {
  auto source = std::make_shared<Space>(j.at("source").get<std::vector<std::string>>());
  auto target = std::make_shared<Space>(j.at("target").get<std::vector<std::string>>());
  return Kernel(source, target, matrix_from_json(j.at("rows")));
}

Json to_json(const DataProcess& proc) {
  return Json{{"vocab", proc.vocab()->labels()},
              {"order", proc.order()},
              {"transition", matrix_to_json(proc.transition().rows())},
              {"context_dist", proc.context_dist().weights()},
              {"seed", proc.seed()},
              {"gamma", proc.gamma()},
              {"kind", proc.kind()}};
}

DataProcess process_from_json(const Json& j) {
  auto vocab = std::make_shared<Space>(j.at("vocab").get<std::vector<std::string>>());
  const std::size_t order = j.at("order").get<std::size_t>();
  Matrix table = matrix_from_json(j.at("transition"));
  const std::uint64_t seed = j.value("seed", std::uint64_t{0});
  const double gamma = j.value("gamma", 0.0);
  const std::string kind = j.value("kind", "explicit");
  if (j.contains("context_dist")) {
    SpacePtr contexts = power_space(vocab, order);
    Distribution ctx(contexts, j.at("context_dist").get<std::vector<double>>());
    return DataProcess::with_context_dist(vocab, order, std::move(table), std::move(ctx), seed,
                                          gamma, kind);
  }
  return DataProcess::from_transition(vocab, order, std::move(table), seed, gamma, kind);
}

Json to_json(const ArModel& model) {
  Json j{{"vocab", model.vocab->labels()},
         {"order", model.dims.order},
         {"d_emb", model.dims.d_emb},
         {"d_model", model.dims.d_model},
         {"tabular", model.dims.tabular},
         {"draft_horizon", model.dims.draft_horizon},
         {"seed", model.seed},
         {"head", vector_to_json(model.head.data())}};
  if (model.dims.tabular) {
    j["table"] = vector_to_json(model.table.data());
  } else {
    j["embed"] = vector_to_json(model.embed.data());
    j["w1"] = vector_to_json(model.w1.data());
    j["b1"] = vector_to_json(model.b1);
    j["w2"] = vector_to_json(model.w2.data());
    j["b2"] = vector_to_json(model.b2);
  }
  if (model.draft.has_value()) {
    j["draft"] = vector_to_json(model.draft->data());
  }
  return j;
}

ArModel model_from_json(const Json& j) {
  auto vocab = std::make_shared<Space>(j.at("vocab").get<std::vector<std::string>>());
  ModelDims dims;
  dims.order = j.at("order").get<std::size_t>();
  dims.d_emb = j.at("d_emb").get<std::size_t>();
  dims.d_model = j.at("d_model").get<std::size_t>();
  dims.tabular = j.at("tabular").get<bool>();
  dims.draft_horizon = j.at("draft_horizon").get<std::size_t>();
  ArModel model = ArModel::init(vocab, dims, j.value("seed", std::uint64_t{0}), 0.0);

  auto load = [&j](const char* key, std::vector<double>& into) {
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != into.size()) {
      raise(Errc::length_mismatch, std::string("checkpoint block '") + key + "' has wrong size");
    }
    into = v;
  };
  load("head", model.head.data());
  if (dims.tabular) {
    load("table", model.table.data());
  } else {
    load("embed", model.embed.data());
    load("w1", model.w1.data());
    load("b1", model.b1);
    load("w2", model.w2.data());
    load("b2", model.b2);
  }
  if (model.draft.has_value()) {
    load("draft", model.draft->data());
  }
  return model;
}

Json to_json(const EntropyReport& report) {
  Json per_point = Json::object();
  for (const auto& [label, value] : report.per_point) {
    per_point[label] = value;
  }
  return Json{{"kind", report.kind.name()},
              {"unit", "nats"},
              {"average", report.average},
              {"per_point", std::move(per_point)},
              {"weighting", report.weighting.weights()}};
}

Json to_json(const SurplusReport& report) {
  return Json{{"unit", "nats"},
              {"mi_full", report.mi_full},
              {"mi_single", report.mi_single},
              {"surplus", report.surplus},
              {"horizon", report.horizon}};
}

Json to_json(const PullbackMetric& metric) {
  return Json{{"h", metric.at},
              {"matrix", matrix_to_json(metric.matrix)},
              {"eigenvalues", metric.eigenvalues},
              {"numerical_rank", metric.rank}};
}

Json to_json(const SimilarityMatrix& sim) {
  return Json{{"contexts", sim.contexts->labels()},
              {"kind", sim.kind.name()},
              {"beta", sim.kind.beta},
              {"entries", matrix_to_json(sim.entries)}};
}

Json to_json(const SpectralReport& report) {
  Json energies = Json::object();
  for (const auto& [idx, value] : report.dirichlet_energies) {
    energies[std::to_string(idx)] = value;
  }
  return Json{{"operator_eigenvalues", report.operator_eigenvalues},
              {"leading_eigenvectors", matrix_to_json(report.leading_eigenvectors)},
              {"dirichlet_energies", std::move(energies)},
              {"alignment_score", report.alignment_score},
              {"degenerate_gram", report.degenerate_gram}};
}

std::string dump_json(const Json& j) {
  return j.dump(2) + "\n";
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace stochlab

#include "stochlab.h"

#include <cstring>
#include <new>
#include <string>

#include "stochlab/armodel.hpp"
#include "stochlab/catinfo.hpp"
#include "stochlab/config.hpp"
#include "stochlab/datagen.hpp"
#include "stochlab/harness.hpp"
#include "stochlab/serialize.hpp"

using namespace stochlab;

struct stochlab_source {
  DataProcess process;
};

struct stochlab_model {
  ArModel model;
};

namespace {

thread_local std::string g_last_error = "no error";

int status_of(const Error& e) {
  switch (e.code()) {
    case Errc::config_invalid:
      return STOCHLAB_E_CONFIG;
    case Errc::io_failure:
      return STOCHLAB_E_IO;
    case Errc::non_finite_input:
    case Errc::non_finite_gradient:
    case Errc::diverged_loss:
    case Errc::infinite_average:
      return STOCHLAB_E_NUMERIC;
    case Errc::internal:
      return STOCHLAB_E_INTERNAL;
    default:
      return STOCHLAB_E_DOMAIN;
  }
}

char* copy_string(const std::string& s) {
  char* out = new (std::nothrow) char[s.size() + 1];
  if (out != nullptr) {
    std::memcpy(out, s.c_str(), s.size() + 1);
  }
  return out;
}

template <class Fn>
stochlab_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return STOCHLAB_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return STOCHLAB_E_INTERNAL;
  }
}

stochlab_status require(bool ok, const char* message) {
  if (!ok) {
    g_last_error = message;
    return STOCHLAB_E_INVALID_ARGUMENT;
  }
  return STOCHLAB_OK;
}

}  // namespace

extern "C" {

const char* stochlab_version(void) { return kVersion; }

const char* stochlab_last_error(void) { return g_last_error.c_str(); }

void stochlab_string_free(char* s) { delete[] s; }

stochlab_status stochlab_source_random(int vocab_size, int order, double gamma, uint64_t seed,
                                       stochlab_source** out) {
  if (stochlab_status s = require(out != nullptr && vocab_size >= 2 && order >= 1,
                                  "source_random: bad arguments")) {
    return s;
  }
  return guarded([&] {
    *out = new stochlab_source{build_markov_source(static_cast<std::size_t>(vocab_size),
                                                   static_cast<std::size_t>(order), gamma,
                                                   seed)};
    return STOCHLAB_OK;
  });
}

stochlab_status stochlab_source_surplus(int num_classes, uint64_t seed, stochlab_source** out) {
  if (stochlab_status s =
          require(out != nullptr && num_classes >= 2, "source_surplus: bad arguments")) {
    return s;
  }
  return guarded([&] {
    *out = new stochlab_source{surplus_process(static_cast<std::size_t>(num_classes), seed)};
    return STOCHLAB_OK;
  });
}

stochlab_status stochlab_source_two_cluster(int vocab_size, double wobble, uint64_t seed,
                                            stochlab_source** out) {
  if (stochlab_status s =
          require(out != nullptr && vocab_size >= 4, "source_two_cluster: bad arguments")) {
    return s;
  }
  return guarded([&] {
    *out = new stochlab_source{
        two_cluster_source(static_cast<std::size_t>(vocab_size), wobble, seed)};
    return STOCHLAB_OK;
  });
}

stochlab_status stochlab_source_from_json(const char* json, stochlab_source** out) {
  if (stochlab_status s =
          require(json != nullptr && out != nullptr, "source_from_json: bad arguments")) {
    return s;
  }
  return guarded([&] {
    *out = new stochlab_source{process_from_json(Json::parse(json))};
    return STOCHLAB_OK;
  });
}

stochlab_status stochlab_source_to_json(const stochlab_source* source, char** out_json) {
  if (stochlab_status s = require(source != nullptr && out_json != nullptr,
                                  "source_to_json: bad arguments")) {
    return s;
  }
  return guarded([&] {
    *out_json = copy_string(dump_json(to_json(source->process)));
    return *out_json != nullptr ? STOCHLAB_OK : STOCHLAB_E_INTERNAL;
  });
}

stochlab_status stochlab_source_conditional_entropy(const stochlab_source* source,
                                                    double* out_nats) {
  if (stochlab_status s = require(source != nullptr && out_nats != nullptr,
                                  "source_conditional_entropy: bad arguments")) {
    return s;
  }
  return guarded([&] {
    *out_nats = conditional_entropy_data(source->process);
    return STOCHLAB_OK;
  });
}

stochlab_status stochlab_source_surplus_report(const stochlab_source* source, int horizon,
                                               char** out_json) {
  if (stochlab_status s = require(source != nullptr && out_json != nullptr && horizon >= 1,
                                  "source_surplus_report: bad arguments")) {
    return s;
  }
  return guarded([&] {
    const auto& proc = source->process;
    const SurplusReport report = information_surplus(
        joint_hidden_future(proc, injective_encoder(proc), static_cast<std::size_t>(horizon)),
        proc.vocab(), static_cast<std::size_t>(horizon), DivergenceKind::kl());
    *out_json = copy_string(dump_json(to_json(report)));
    return *out_json != nullptr ? STOCHLAB_OK : STOCHLAB_E_INTERNAL;
  });
}

void stochlab_source_free(stochlab_source* source) { delete source; }

stochlab_status stochlab_model_create(const stochlab_source* source, int d_emb, int d_model,
                                      int tabular, int draft_horizon, uint64_t seed,
                                      double init_scale, stochlab_model** out) {
  if (stochlab_status s = require(source != nullptr && out != nullptr && d_emb >= 1 &&
                                      d_model >= 1 && draft_horizon >= 0,
                                  "model_create: bad arguments")) {
    return s;
  }
  return guarded([&] {
    ModelDims dims;
    dims.order = source->process.order();
    dims.d_emb = static_cast<std::size_t>(d_emb);
    dims.d_model = static_cast<std::size_t>(d_model);
    dims.tabular = tabular != 0;
    dims.draft_horizon = static_cast<std::size_t>(draft_horizon);
    *out = new stochlab_model{
        ArModel::init(source->process.vocab(), dims, seed, init_scale)};
    return STOCHLAB_OK;
  });
}

stochlab_status stochlab_model_from_json(const char* json, stochlab_model** out) {
  if (stochlab_status s =
          require(json != nullptr && out != nullptr, "model_from_json: bad arguments")) {
    return s;
  }
  return guarded([&] {
    *out = new stochlab_model{model_from_json(Json::parse(json))};
    return STOCHLAB_OK;
  });
}

stochlab_status stochlab_model_to_json(const stochlab_model* model, char** out_json) {
  if (stochlab_status s =
          require(model != nullptr && out_json != nullptr, "model_to_json: bad arguments")) {
    return s;
  }
  return guarded([&] {
    *out_json = copy_string(dump_json(to_json(model->model)));
    return *out_json != nullptr ? STOCHLAB_OK : STOCHLAB_E_INTERNAL;
  });
}

stochlab_status stochlab_model_losses(const stochlab_model* model, const stochlab_source* source,
                                      double out[3]) {
  if (stochlab_status s = require(model != nullptr && source != nullptr && out != nullptr,
                                  "model_losses: bad arguments")) {
    return s;
  }
  return guarded([&] {
    const Losses l = exact_losses(model->model, source->process);
    out[0] = l.l_ce;
    out[1] = l.l_kl;
    out[2] = l.h_data;
    return STOCHLAB_OK;
  });
}

stochlab_status stochlab_model_train(stochlab_model* model, const stochlab_source* source,
                                     double learning_rate, long epochs, long log_every,
                                     char** out_trace_csv) {
  if (stochlab_status s = require(model != nullptr && source != nullptr && epochs >= 0 &&
                                      log_every >= 1 && learning_rate > 0.0,
                                  "model_train: bad arguments")) {
    return s;
  }
  return guarded([&] {
    TrainConfig config;
    config.learning_rate = learning_rate;
    config.epochs = static_cast<std::size_t>(epochs);
    config.log_every = static_cast<std::size_t>(log_every);
    const ExperimentTrace trace = train(model->model, source->process, config);
    if (out_trace_csv != nullptr) {
      *out_trace_csv = copy_string(trace.to_csv());
      if (*out_trace_csv == nullptr) {
        return STOCHLAB_E_INTERNAL;
      }
    }
    return STOCHLAB_OK;
  });
}

void stochlab_model_free(stochlab_model* model) { delete model; }

namespace {

stochlab_status run_config(RunConfig config, const char* probe_override,
                           const char* out_dir_override, long seed_override,
                           const char* format_override, char** out_manifest_json) {
  if (probe_override != nullptr) {
    const std::string probe = probe_override;
    config.probes = ProbeSpec{};
    if (probe == "losses") {
      config.probes.losses = true;
    } else if (probe == "entropy") {
      config.probes.entropy = true;
    } else if (probe == "surplus") {
      config.probes.surplus = true;
    } else if (probe == "geometry") {
      config.probes.geometry = true;
    } else if (probe == "spectral") {
      config.probes.spectral = true;
    } else if (probe == "verify") {
      config.probes.verify = true;
    } else {
      raise(Errc::config_invalid, "unknown probe '" + probe + "'");
    }
  }
  if (out_dir_override != nullptr) {
    config.output_dir = out_dir_override;
  }
  if (seed_override >= 0) {
    config.source.seed = static_cast<std::uint64_t>(seed_override);
    config.train.seed = static_cast<std::uint64_t>(seed_override);
  }
  if (format_override != nullptr) {
    const std::string formats = format_override;
    config.formats.clear();
    if (formats.find("csv") != std::string::npos) {
      config.formats.push_back("csv");
    }
    if (formats.find("json") != std::string::npos) {
      config.formats.push_back("json");
    }
    if (config.formats.empty()) {
      raise(Errc::config_invalid, "format override must mention csv or json");
    }
  }
  const RunManifest manifest = run(config);
  if (out_manifest_json != nullptr) {
    *out_manifest_json = copy_string(manifest.to_json_text());
    if (*out_manifest_json == nullptr) {
      return STOCHLAB_E_INTERNAL;
    }
  }
  return STOCHLAB_OK;
}

}  // namespace

stochlab_status stochlab_run_file(const char* config_path, const char* probe_override,
                                  const char* out_dir_override, long seed_override,
                                  const char* format_override, char** out_manifest_json) {
  if (stochlab_status s = require(config_path != nullptr, "run_file: bad arguments")) {
    return s;
  }
  return guarded([&] {
    return run_config(RunConfig::from_file(config_path), probe_override, out_dir_override,
                      seed_override, format_override, out_manifest_json);
  });
}

stochlab_status stochlab_run_text(const char* config_text, const char* probe_override,
                                  const char* out_dir_override, long seed_override,
                                  const char* format_override, char** out_manifest_json) {
  if (stochlab_status s = require(config_text != nullptr, "run_text: bad arguments")) {
    return s;
  }
  return guarded([&] {
    return run_config(RunConfig::from_text(config_text), probe_override, out_dir_override,
                      seed_override, format_override, out_manifest_json);
  });
}

stochlab_status stochlab_verify(uint64_t seed, char** out_report_json) {
  return guarded([&] {
    const std::vector<CheckResult> checks = verify_suite(seed);
    bool all = true;
    Json list = Json::array();
    for (const CheckResult& c : checks) {
      all = all && c.passed;
      list.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    if (out_report_json != nullptr) {
      *out_report_json =
          copy_string(dump_json(Json{{"all_passed", all}, {"checks", std::move(list)}}));
      if (*out_report_json == nullptr) {
        return STOCHLAB_E_INTERNAL;
      }
    }
    return all ? STOCHLAB_OK : STOCHLAB_E_VERIFY_FAILED;
  });
}

}  // extern "C"

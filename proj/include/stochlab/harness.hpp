#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stochlab/config.hpp"
#include "stochlab/datagen.hpp"

namespace stochlab {

inline constexpr const char* kVersion = "0.1.0";

struct ManifestEntry {
  std::string name;
  std::string checksum;  // fnv1a over file bytes
};

struct RunManifest {
  std::string config_hash;
  std::string version;
  double wall_seconds = 0.0;  // run metadata; excluded from determinism checks
  std::vector<ManifestEntry> files;

  std::string to_json_text() const;
};

/// Builds the configured source and model, runs the requested probes pre-
/// and post-training, and writes every report plus a manifest into the
/// output directory. Fully deterministic per (config, seed): every emitted
/// file except the manifest (which records wall-clock time) is byte-stable.
RunManifest run(const RunConfig& config);

/// Source construction shared by run() and the CLI.
DataProcess build_source(const SourceSpec& spec);

/// Gradient descent in chunks until the average KL reaches `kl_target` or
/// `max_epochs` is spent. Returns the final losses.
Losses train_to_target(ArModel& model, const DataProcess& proc, double learning_rate,
                       std::size_t max_epochs, double kl_target);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// The full invariant suite: every module's documented invariants, executed
/// on seeded randomized instances. All randomness derives from `seed`.
std::vector<CheckResult> verify_suite(std::uint64_t seed);

}  // namespace stochlab

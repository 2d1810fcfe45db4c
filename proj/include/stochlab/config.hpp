#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stochlab/armodel.hpp"
#include "stochlab/linalg.hpp"
#include "stochlab/spectral.hpp"

namespace stochlab {

/// Parsed value of one config key: scalar, array, or matrix.
struct ConfigValue {
  enum class Type { boolean, integer, real, string, array, matrix } type = Type::string;
  bool b = false;
  long long i = 0;
  double d = 0.0;
  std::string s;
  std::vector<double> array;
  Matrix matrix;
};

/// Strict key/value-with-sections parser for the run-config format:
/// `[section]` headers, `key = value` lines, `#` comments. Values are
/// booleans, integers, reals, quoted strings, arrays `[1, 2]`, string arrays
/// `["csv"]`, or matrices `[[0.9, 0.1], [0.5, 0.5]]`. Unknown sections or
/// keys are errors, not warnings.
std::map<std::string, std::map<std::string, ConfigValue>> parse_config_text(
    const std::string& text);

struct SourceSpec {
  std::string kind = "random";  // random | explicit | surplus | two_cluster
  std::size_t vocab_size = 4;
  std::size_t order = 1;
  double gamma = 1.0;
  double wobble = 0.05;  // two_cluster only
  std::uint64_t seed = 0;
  std::optional<Matrix> transition;  // explicit only
};

struct ModelSpec {
  std::size_t d_emb = 4;
  std::size_t d_model = 8;
  bool tabular = false;
  std::size_t draft_horizon = 0;
};

struct ProbeSpec {
  bool losses = false;
  bool entropy = false;
  bool surplus = false;
  bool geometry = false;
  bool spectral = false;
  bool verify = false;
};

struct RunConfig {
  SourceSpec source;
  ModelSpec model;
  TrainConfig train;
  ProbeSpec probes;
  SimilarityKindSpec spectral_kind;
  std::size_t surplus_horizon = 2;
  std::string output_dir = "out";
  std::vector<std::string> formats = {"csv", "json"};

  /// Raw config text, kept for hashing.
  std::string text;

  static RunConfig from_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
};

}  // namespace stochlab

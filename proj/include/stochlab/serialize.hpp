#pragma once

#include <string>

#include <json.hpp>

#include "stochlab/armodel.hpp"
#include "stochlab/catinfo.hpp"
#include "stochlab/datagen.hpp"
#include "stochlab/finstoch.hpp"
#include "stochlab/infogeo.hpp"
#include "stochlab/spectral.hpp"

namespace stochlab {

using Json = nlohmann::json;

Json to_json(const Distribution& p);
Distribution distribution_from_json(const Json& j);

Json to_json(const Kernel& k);
Kernel kernel_from_json(const Json& j);

Json to_json(const DataProcess& proc);
DataProcess process_from_json(const Json& j);

Json to_json(const ArModel& model);
ArModel model_from_json(const Json& j);

Json to_json(const EntropyReport& report);
Json to_json(const SurplusReport& report);
Json to_json(const PullbackMetric& metric);
Json to_json(const SimilarityMatrix& sim);
Json to_json(const SpectralReport& report);

/// Deterministic serialization used for all emitted files: sorted keys,
/// round-trip-exact doubles, two-space indent, trailing newline.
std::string dump_json(const Json& j);

/// FNV-1a 64-bit over bytes, hex-encoded; used for config hashes and file
/// checksums in run manifests.
std::string fnv1a_hex(const std::string& bytes);

/// Fixed 17-significant-digit float formatting for CSV cells.
std::string format_double(double v);

}  // namespace stochlab

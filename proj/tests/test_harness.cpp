#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stochlab/config.hpp"
#include "stochlab/harness.hpp"
#include "stochlab/serialize.hpp"

using namespace stochlab;
namespace fs = std::filesystem;

namespace {

const char* kTinyConfig = R"(# tiny deterministic run
[source]
kind = "random"
vocab_size = 3
order = 1
gamma = 1.0
seed = 7

[model]
d_emb = 2
d_model = 4

[train]
learning_rate = 0.2
epochs = 40
log_every = 10
seed = 3

[probes]
losses = true
entropy = true
surplus = true
geometry = true
spectral = true

[spectral]
kind = "bc"
beta = 1.0

[surplus]
horizon = 2

[output]
directory = "OUTDIR"
formats = ["csv", "json"]
)";

std::string tiny_config(const std::string& out_dir) {
  std::string text = kTinyConfig;
  const std::string key = "OUTDIR";
  text.replace(text.find(key), key.size(), out_dir);
  return text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config parser handles sections, arrays, matrices") {
  const auto sections = parse_config_text(
      "[a]\n"
      "x = 3\n"
      "y = 2.5  # trailing comment\n"
      "name = \"hi # there\"\n"
      "flag = true\n"
      "arr = [1, 2, 3]\n"
      "mat = [[0.5, 0.5],\n"
      "       [0.25, 0.75]]\n");
  const auto& a = sections.at("a");
  CHECK(a.at("x").i == 3);
  CHECK(a.at("y").d == 2.5);
  CHECK(a.at("name").s == "hi # there");
  CHECK(a.at("flag").b);
  CHECK(a.at("arr").array == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(a.at("mat").matrix(1, 0) == 0.25);
}

TEST_CASE("config parser rejects malformed input") {
  CHECK_THROWS_AS((void)parse_config_text("x = 1\n"), Error);              // key before section
  CHECK_THROWS_AS((void)parse_config_text("[a]\nx 1\n"), Error);           // missing '='
  CHECK_THROWS_AS((void)parse_config_text("[a]\nx = 1\nx = 2\n"), Error);  // duplicate key
  CHECK_THROWS_AS((void)parse_config_text("[a]\n[a]\n"), Error);           // duplicate section
  CHECK_THROWS_AS((void)parse_config_text("[a]\nx = 1e\n"), Error);        // bad number
  CHECK_THROWS_AS((void)parse_config_text("[a]\nx = hello\n"), Error);     // unquoted string
  CHECK_THROWS_AS((void)parse_config_text("[a]\nx = [1, 2\n"), Error);     // unterminated
}

TEST_CASE("run config validates strictly") {
  CHECK_THROWS_AS((void)RunConfig::from_text("[source]\nbogus_key = 1\n"), Error);
  CHECK_THROWS_AS((void)RunConfig::from_text("[nonsense]\nx = 1\n"), Error);
  CHECK_THROWS_AS((void)RunConfig::from_text("[train]\nepochs = 0\n"), Error);
  CHECK_THROWS_AS((void)RunConfig::from_text("[train]\nlearning_rate = -0.5\n"), Error);
  CHECK_THROWS_AS((void)RunConfig::from_text("[source]\nkind = \"explicit\"\n"), Error);
  CHECK_THROWS_AS((void)RunConfig::from_text("[output]\nformats = [\"yaml\"]\n"), Error);

  const RunConfig defaults = RunConfig::from_text("");
  CHECK(defaults.source.vocab_size == 4);
  CHECK(defaults.train.epochs == 500);
  CHECK(defaults.formats.size() == 2);

  const RunConfig explicit_table = RunConfig::from_text(
      "[source]\nkind = \"explicit\"\nvocab_size = 2\n"
      "transition = [[0.9, 0.1], [0.5, 0.5]]\n");
  REQUIRE(explicit_table.source.transition.has_value());
  CHECK((*explicit_table.source.transition)(0, 0) == 0.9);
}

TEST_CASE("serialization round-trips are bit-exact") {
  const DataProcess proc = build_markov_source(4, 2, 1.0, 99);
  const Json j = to_json(proc);
  const DataProcess back = process_from_json(Json::parse(dump_json(j)));
  CHECK(back.transition().rows() == proc.transition().rows());
  CHECK(back.context_dist().weights() == proc.context_dist().weights());
  CHECK(back.vocab()->labels() == proc.vocab()->labels());

  ModelDims dims;
  dims.order = 2;
  dims.d_emb = 3;
  dims.d_model = 4;
  dims.draft_horizon = 2;
  const ArModel model = ArModel::init(proc.vocab(), dims, 12, 0.2);
  const ArModel mback = model_from_json(Json::parse(dump_json(to_json(model))));
  CHECK(mback.head.data() == model.head.data());
  CHECK(mback.embed.data() == model.embed.data());
  CHECK(mback.draft->data() == model.draft->data());

  const Distribution p = make_distribution(Space::integer_range(3), {0.2, 0.5, 0.3});
  const Distribution pback = distribution_from_json(Json::parse(dump_json(to_json(p))));
  CHECK(pback.weights() == p.weights());

  const Kernel kback = kernel_from_json(Json::parse(dump_json(to_json(proc.transition()))));
  CHECK(kback.rows() == proc.transition().rows());
}

TEST_CASE("run emits a consistent, reproducible bundle") {
  const fs::path dir1 = fs::temp_directory_path() / "stochlab_run_a";
  const fs::path dir2 = fs::temp_directory_path() / "stochlab_run_b";
  fs::remove_all(dir1);
  fs::remove_all(dir2);

  // same config text for both runs; only the output directory differs
  RunConfig c1 = RunConfig::from_text(tiny_config("unused"));
  c1.output_dir = dir1.string();
  RunConfig c2 = RunConfig::from_text(tiny_config("unused"));
  c2.output_dir = dir2.string();
  const RunManifest m1 = run(c1);
  const RunManifest m2 = run(c2);

  // every probe file landed
  for (const char* name : {"source.json", "model_init.json", "model_final.json", "trace.csv", "trace.json",
                           "losses.json", "entropy.json", "surplus.json", "geometry.json",
                           "spectral.json", "similarity.csv", "manifest.json"}) {
    CHECK(fs::exists(dir1 / name));
  }

  // manifest checksums match the bytes on disk
  for (const ManifestEntry& e : m1.files) {
    CHECK(fnv1a_hex(slurp(dir1 / e.name)) == e.checksum);
  }

  // two runs of the same config: identical data files (the manifest's
  // wall-clock field is run metadata, so compare its checksum list instead)
  REQUIRE(m1.files.size() == m2.files.size());
  for (std::size_t i = 0; i < m1.files.size(); ++i) {
    CHECK(m1.files[i].name == m2.files[i].name);
    CHECK(m1.files[i].checksum == m2.files[i].checksum);
    CHECK(slurp(dir1 / m1.files[i].name) == slurp(dir2 / m2.files[i].name));
  }
  CHECK(m1.config_hash == m2.config_hash);

  // different seed, different trace
  RunConfig c3 = RunConfig::from_text(tiny_config(dir2.string()));
  c3.train.seed = 1234;
  const RunManifest m3 = run(c3);
  bool any_differs = false;
  for (std::size_t i = 0; i < m3.files.size(); ++i) {
    if (m3.files[i].name == "trace.csv" && m3.files[i].checksum != m1.files[i].checksum) {
      any_differs = true;
    }
  }
  CHECK(any_differs);

  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("trace csv format is stable") {
  ExperimentTrace trace;
  TraceRow row;
  row.epoch = 3;
  row.l_ce = 1.0 / 3.0;
  trace.rows.push_back(row);
  const std::string csv = trace.to_csv();
  CHECK(csv.find("epoch,L_CE,L_KL,H_data,avg_cat_entropy_model,avg_cat_entropy_data,"
                 "dirichlet_energy,alignment_score,L_align,L_unif") == 0);
  CHECK(csv.find("0.33333333333333331") != std::string::npos);  // 17 significant digits
}

TEST_CASE("verify suite passes end to end") {
  const std::vector<CheckResult> checks = verify_suite(0);
  CHECK(checks.size() >= 25);
  for (const CheckResult& c : checks) {
    INFO(c.name, ": ", c.detail);
    CHECK(c.passed);
  }
}

}  // TEST_SUITE

// stochlab command-line front end. Talks to the core exclusively through the
// C API in stochlab.h; JSON is only used locally for pretty-printing.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stochlab.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;

struct RunOptions {
  std::string config_path;
  long seed = -1;
  std::string out_dir;
  std::string format;
};

std::string take_string(char* owned) {
  std::string s = owned != nullptr ? owned : "";
  stochlab_string_free(owned);
  return s;
}

int do_run(const RunOptions& opts, const char* probe) {
  char* manifest = nullptr;
  const stochlab_status status = stochlab_run_file(
      opts.config_path.c_str(), probe, opts.out_dir.empty() ? nullptr : opts.out_dir.c_str(),
      opts.seed, opts.format.empty() ? nullptr : opts.format.c_str(), &manifest);
  if (status != STOCHLAB_OK) {
    std::cerr << "error: " << stochlab_last_error() << "\n";
    return status == STOCHLAB_E_CONFIG ? kExitUsage : kExitVerifyFailed;
  }
  std::cout << take_string(manifest);
  return kExitOk;
}

int do_verify(long seed, const std::string& out_path) {
  char* report_text = nullptr;
  const stochlab_status status =
      stochlab_verify(seed < 0 ? 0 : static_cast<uint64_t>(seed), &report_text);
  if (status != STOCHLAB_OK && status != STOCHLAB_E_VERIFY_FAILED) {
    std::cerr << "error: " << stochlab_last_error() << "\n";
    return kExitVerifyFailed;
  }
  const std::string text = take_string(report_text);
  const auto report = nlohmann::json::parse(text);
  std::size_t passed = 0;
  for (const auto& check : report.at("checks")) {
    const bool ok = check.at("passed").get<bool>();
    passed += ok ? 1 : 0;
    std::cout << (ok ? "PASS" : "FAIL") << "  " << check.at("name").get<std::string>();
    const std::string detail = check.at("detail").get<std::string>();
    if (!detail.empty()) {
      std::cout << "  (" << detail << ")";
    }
    std::cout << "\n";
  }
  std::cout << passed << "/" << report.at("checks").size() << " checks passed\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    out << text;
  }
  return status == STOCHLAB_OK ? kExitOk : kExitVerifyFailed;
}

int do_show(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open '" << path << "'\n";
    return kExitUsage;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    try {
      std::cout << nlohmann::json::parse(text).dump(2) << "\n";
      return kExitOk;
    } catch (const std::exception& e) {
      std::cerr << "error: not valid JSON: " << e.what() << "\n";
      return kExitVerifyFailed;
    }
  }
  // CSV and anything else: echo with aligned columns for the header line.
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::cout << line << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochlab: exact kernel-composition diagnostics for toy autoregressive models"};
  app.set_version_flag("--version", std::string(stochlab_version()));
  app.require_subcommand(1);

  long verify_seed = 0;
  std::string verify_out;
  CLI::App* verify = app.add_subcommand("verify", "run the full invariant suite");
  verify->add_option("--seed", verify_seed, "seed for the randomized checks");
  verify->add_option("--out", verify_out, "also write the JSON report to this file");

  RunOptions opts;
  auto add_run_opts = [&opts](CLI::App* cmd) {
    cmd->add_option("config", opts.config_path, "run-config file")->required();
    cmd->add_option("--seed", opts.seed, "override the config seeds");
    cmd->add_option("--out", opts.out_dir, "override the output directory");
    cmd->add_option("--format", opts.format, "override output formats (csv, json, csv,json)");
  };
  CLI::App* train = app.add_subcommand("train", "train a model and emit the trace");
  add_run_opts(train);
  CLI::App* surplus = app.add_subcommand("surplus", "information-surplus report");
  add_run_opts(surplus);
  CLI::App* geometry = app.add_subcommand("geometry", "pullback-metric report");
  add_run_opts(geometry);
  CLI::App* spectral = app.add_subcommand("spectral", "similarity-operator report");
  add_run_opts(spectral);

  std::string show_path;
  CLI::App* show = app.add_subcommand("show", "pretty-print an emitted report");
  show->add_option("file", show_path, "report file (.json or .csv)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (verify->parsed()) {
    return do_verify(verify_seed, verify_out);
  }
  if (train->parsed()) {
    return do_run(opts, nullptr);
  }
  if (surplus->parsed()) {
    return do_run(opts, "surplus");
  }
  if (geometry->parsed()) {
    return do_run(opts, "geometry");
  }
  if (spectral->parsed()) {
    return do_run(opts, "spectral");
  }
  if (show->parsed()) {
    return do_show(show_path);
  }
  return kExitUsage;
}

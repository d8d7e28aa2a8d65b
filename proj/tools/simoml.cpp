// simoml: Monte Carlo and validation front end for the joint ML SIMO detector.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "simoml/cli_io.hpp"
#include "simoml/experiments.hpp"

namespace fs = std::filesystem;
using namespace simoml;

namespace {

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv("SIMOML_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long s = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return s;
  } catch (const std::exception&) {
    throw InvalidInput(std::string("SIMOML_SEED is not an unsigned integer: '") + v + "'");
  }
}

void write_run_manifest(const std::string& command, const fs::path& config_path,
                        const fs::path& out, std::vector<fs::path> emitted, double wall_time) {
  const fs::path manifest = out / "run_manifest.json";
  emitted.push_back(manifest);
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_path"] = config_path.string();
  j["output_dir"] = out.string();
  j["emitted_files"] = nlohmann::json::array();
  for (const auto& p : emitted) j["emitted_files"].push_back(p.filename().string());
  j["wall_time"] = wall_time;
  std::ofstream f(manifest, std::ios::binary | std::ios::trunc);
  f << j.dump(2) << "\n";
  for (const auto& p : emitted) std::cout << p.string() << "\n";
}

ExperimentConfig load_config(const fs::path& path) {
  ExperimentConfig config = parse_config(path);
  if (auto s = seed_from_env()) config.seed = *s;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint ML channel estimation and data detection for SIMO block fading"};
  app.require_subcommand(1);

  fs::path config_path, out_dir;
  std::size_t parallelism = 1;

  auto* simulate = app.add_subcommand("simulate", "SER-vs-SNR sweep for every configured detector");
  simulate->add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", out_dir, "output directory")->required();
  simulate->add_option("--parallelism", parallelism, "worker threads")->check(CLI::PositiveNumber);

  auto* complexity = app.add_subcommand("complexity", "visited-node profile of the sphere decoder");
  complexity->add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
  complexity->add_option("--out", out_dir, "output directory")->required();
  complexity->add_option("--parallelism", parallelism, "worker threads")->check(CLI::PositiveNumber);

  long T = 8;
  double noise_var = 0.5;
  std::string constellation = "4-QAM";
  std::uint64_t seed = 0;
  long antennas = 10000;
  std::size_t blocks = 400;
  auto* validate = app.add_subcommand("validate", "large-antenna structure checks");
  validate->add_option("--T", T, "block length")->required();
  validate->add_option("--noise-var", noise_var, "noise variance per complex entry")->required();
  validate->add_option("--constellation", constellation, "BPSK or 4-QAM");
  validate->add_option("--seed", seed, "random seed");
  validate->add_option("--antennas", antennas, "antennas per block for the concentration check");
  validate->add_option("--blocks", blocks, "blocks for the concentration check");

  std::size_t trials = 500;
  auto* oracle = app.add_subcommand("oracle-check", "sphere decoder against exhaustive search");
  oracle->add_option("--trials", trials, "number of seeded blocks")->required();
  oracle->add_option("--seed", seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto start = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    if (simulate->parsed()) {
      const ExperimentConfig config = load_config(config_path);
      const SerTable table = run_ser_sweep(config, parallelism);
      write_run_manifest("simulate", config_path, out_dir, emit_results(table, config, out_dir),
                         elapsed());
      return 0;
    }
    if (complexity->parsed()) {
      const ExperimentConfig config = load_config(config_path);
      const ComplexityTable table = run_complexity(config, parallelism);
      write_run_manifest("complexity", config_path, out_dir, emit_results(table, config, out_dir),
                         elapsed());
      return 0;
    }
    if (auto s = seed_from_env()) seed = *s;
    if (validate->parsed()) {
      const AsymptoticsReport report =
          validate_asymptotics(T, noise_var, Constellation::by_name(constellation), seed,
                               {antennas, blocks});
      for (const CheckResult& c : report.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
      }
      return report.all_passed() ? 0 : 1;
    }
    if (oracle->parsed()) {
      const OracleCheckSummary s = run_oracle_check(trials, seed);
      for (const std::string& f : s.failures) std::cout << "FAIL " << f << "\n";
      std::cout << (s.passed() ? "PASS" : "FAIL") << " sphere-vs-exhaustive: " << s.blocks
                << " blocks, " << s.metric_mismatches << " metric mismatches, "
                << s.sequence_mismatches << " sequence mismatches, " << s.ties
                << " tied minimizers, worst metric gap " << s.worst_metric_gap << "\n";
      return s.passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

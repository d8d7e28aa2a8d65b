#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simoml/baselines.hpp"
#include "simoml/decoder.hpp"
#include "simoml/model.hpp"

namespace simoml {

enum class Detector { ML, LsNonIter, LsIter, MmseNonIter, MmseIter, ExhaustiveOracle };

std::string_view to_string(Detector d);
Detector detector_from_string(std::string_view s);
const std::vector<Detector>& all_detectors();

struct ExperimentConfig {
  Index T = 8;
  std::vector<Index> N_list{10, 50, 100, 500};
  std::vector<double> snr_db_list{-10, -8, -6, -4, -2, 0, 2, 4, 6, 8, 10};
  std::size_t trials = 2858;
  std::string constellation = "4-QAM";
  double radius_r_squared = 1.0;
  FailurePolicy failure_policy = FailurePolicy::SetInfinite;
  std::vector<Detector> detectors{Detector::ML, Detector::LsNonIter, Detector::LsIter,
                                  Detector::MmseNonIter, Detector::MmseIter};
  std::uint64_t seed = 0;
  bool strict_iterations = false;

  /// Defaults for block length T: r^2 = T/8 and enough trials for 2e4
  /// non-pilot symbols per sweep point.
  static ExperimentConfig defaults_for(Index T);

  bool operator==(const ExperimentConfig&) const = default;
};

/// ceil(2e4 / (T - 1))
std::size_t default_trials(Index T);

/// Throws InvalidInput for unusable configurations.
void validate_config(const ExperimentConfig& config);
/// Non-fatal rule violations (currently: r^2 >= T/2).
std::vector<std::string> config_warnings(const ExperimentConfig& config);

struct SerRow {
  Detector detector = Detector::ML;
  Index N = 0;
  double snr_db = 0.0;
  std::uint64_t symbols_tested = 0;
  std::uint64_t symbol_errors = 0;
  double ser = 0.0;
  double std_error = 0.0;

  bool operator==(const SerRow&) const = default;
};

struct SerTable {
  Index T = 0;
  std::vector<SerRow> rows;

  bool operator==(const SerTable&) const = default;
};

struct ComplexityRow {
  Index N = 0;
  double snr_db = 0.0;
  Index layer = 0;  // 1-based, layer T is the pilot
  double mean_visited = 0.0;
  std::uint64_t max_visited = 0;
  double restart_rate = 0.0;
  double var_visited = 0.0;

  bool operator==(const ComplexityRow&) const = default;
};

struct ComplexityTable {
  Index T = 0;
  std::vector<ComplexityRow> rows;

  bool operator==(const ComplexityTable&) const = default;
};

/// Seed of one Monte Carlo trial.
std::uint64_t trial_seed(std::uint64_t seed, Index N, std::size_t snr_index, std::size_t trial);

/// The block every detector of one trial consumes.
ObservationBlock trial_block(const ExperimentConfig& config, const Constellation& constellation,
                             Index N, std::size_t snr_index, std::size_t trial);

/// Symbol-error counts for every configured detector over every (N, SNR),
/// with all detectors of a trial run on the same block. `parallelism` only
/// affects wall time.
SerTable run_ser_sweep(const ExperimentConfig& config, std::size_t parallelism = 1);

/// Per-layer visited-node statistics of the sphere decoder.
ComplexityTable run_complexity(const ExperimentConfig& config, std::size_t parallelism = 1);

/// SNR at which the detector's SER curve (for antenna count N) first crosses
/// `target`, by linear interpolation of log10(SER) between adjacent sweep
/// points. A zero SER is floored at 0.5 / symbols_tested.
std::optional<double> snr_at_ser(const SerTable& table, Detector detector, Index N, double target);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct AsymptoticsReport {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  const CheckResult* find(std::string_view name) const;
};

struct AsymptoticsOptions {
  Index antennas = 10000;
  std::size_t blocks = 400;
};

/// Checks the large-antenna structure of the ideal Gram matrix
/// s s^H + noise_var I: its largest eigenvalue, the closed-form Cholesky
/// factor of T I - s s^H, the zero metric of the transmitted sequence and
/// the metric of single-symbol errors; then estimates the mean and variance
/// of the sample Gram entries over independent blocks.
AsymptoticsReport validate_asymptotics(Index T, double noise_var, const Constellation& constellation,
                                       std::uint64_t seed, const AsymptoticsOptions& options = {});

struct OracleCheckSummary {
  std::size_t blocks = 0;
  std::size_t metric_mismatches = 0;
  /// Blocks with a unique minimizer where the two searches returned different
  /// sequences.
  std::size_t sequence_mismatches = 0;
  /// Blocks whose best and second-best metrics are within 1e-9.
  std::size_t ties = 0;
  double worst_metric_gap = 0.0;
  std::vector<std::string> failures;

  bool passed() const { return metric_mismatches == 0 && sequence_mismatches == 0; }
};

/// Sphere search against exhaustive search on `blocks` seeded blocks cycling
/// through T in 4..8, N in {4, 16, 64}, BPSK and 4-QAM, SNR in {-2, 6, 14} dB.
/// Both searches use the same factor R; metrics must agree within `tol`.
OracleCheckSummary run_oracle_check(std::size_t blocks, std::uint64_t seed, double tol = 1e-9);

/// E[X^H X]/N = s s^H + noise_var I.
HermitianMatrix ideal_gram(const ComplexVector& s, double noise_var);

/// sqrt(T - T / (T - i)) for 0-based row i.
double ideal_cholesky_diagonal(Index T, Index i);

}  // namespace simoml

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "simoml/errors.hpp"
#include "simoml/experiments.hpp"

namespace simoml {

/// Malformed configuration text; carries the 1-based line number (0 when the
/// problem is not tied to one line).
class ConfigError : public InvalidInput {
 public:
  ConfigError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Parses the flat `key = value` format. `#` starts a comment; lists are
/// comma separated. Recognized keys:
///
///   T                  integer >= 2                      (default 8)
///   N_list             integers                          (10, 50, 100, 500)
///   snr_db_list        reals, `inf` for noiseless        (-10, -8, ..., 10)
///   trials             integer >= 1                      (ceil(2e4 / (T-1)))
///   constellation      BPSK | 4-QAM | QPSK               (4-QAM)
///   radius_r_squared   real > 0                          (T / 8)
///   failure_policy     SetInfinite | Double              (SetInfinite)
///   detectors          ML, LS-NonIter, LS-Iter, MMSE-NonIter, MMSE-Iter,
///                      ExhaustiveOracle                  (all but the oracle)
///   seed               unsigned integer                  (0)
///   strict_iterations  true | false                      (false)
///
/// Rule violations that are not fatal (r^2 >= T/2) are reported through
/// `warn`.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Inverse of parse_config_text; reals are written with 17 significant digits.
std::string serialize_config(const ExperimentConfig& config);

inline constexpr std::string_view kArtifactVersion = "0.1.0";

inline constexpr std::string_view kSerHeader =
    "detector,N,snr_db,symbols_tested,symbol_errors,ser,stderr";
inline constexpr std::string_view kComplexityHeader =
    "N,snr_db,layer,mean_visited,max_visited,restart_rate";

std::string ser_csv(const SerTable& table);
std::string complexity_csv(const ComplexityTable& table);

/// Writes `<stem>.csv` and a `<stem>.manifest.json` sidecar (config echo,
/// seed, artifact version) into `output_dir`, creating it if needed.
/// Returns the written paths.
std::vector<std::filesystem::path> emit_results(const SerTable& table,
                                                const ExperimentConfig& config,
                                                const std::filesystem::path& output_dir,
                                                std::string_view stem = "ser");
std::vector<std::filesystem::path> emit_results(const ComplexityTable& table,
                                                const ExperimentConfig& config,
                                                const std::filesystem::path& output_dir,
                                                std::string_view stem = "complexity");

/// Number formatting used by every CSV field: 10 significant digits, `inf`
/// for infinities.
std::string format_real(double v);

}  // namespace simoml

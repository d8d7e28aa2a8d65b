#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "simoml/model.hpp"
#include "simoml/numerics.hpp"

namespace simoml {

enum class Estimator { LS, MMSE };
enum class BaselineMode { NonIterative, Iterative };

inline constexpr std::size_t kDefaultIterations = 100;

struct BaselineKind {
  Estimator estimator = Estimator::LS;
  BaselineMode mode = BaselineMode::NonIterative;
  std::size_t iterations = kDefaultIterations;
};

/// Channel estimate from the single pilot column x_p = conj(p) h + w.
///
/// LS:   h = p x_p
/// MMSE: h = p x_p / (1 + noise_var)   (unit-variance channel prior)
ComplexVector pilot_estimate(const ComplexVector& x_pilot, Complex pilot_symbol, double noise_var,
                             Estimator estimator);

/// Per-symbol ML detection given a channel estimate: for each data column,
/// the point s minimizing ||x_k - conj(s) h||^2. The pilot position keeps the
/// pilot symbol.
std::vector<std::size_t> coherent_detect_index(const ComplexMatrix& x, const ComplexVector& h_hat,
                                               const Constellation& constellation, Index pilot_index,
                                               Complex pilot_symbol);
ComplexVector coherent_detect(const ComplexMatrix& x, const ComplexVector& h_hat,
                              const Constellation& constellation, Index pilot_index,
                              Complex pilot_symbol);

struct IterativeOptions {
  std::size_t iterations = kDefaultIterations;
  /// Run every iteration even after the detected sequence stops changing.
  bool strict_iterations = false;
};

struct IterativeResult {
  std::vector<std::size_t> sequence_index;
  ComplexVector sequence;
  std::size_t iterations_run = 0;
};

/// Alternates coherent detection with a data-aided channel update:
/// LS h = X s / ||s||^2, MMSE h = X s / (||s||^2 + noise_var). The first
/// detection uses the pilot-only estimate; the pilot stays fixed throughout.
IterativeResult iterative_detect(const ComplexMatrix& x, Index pilot_index, Complex pilot_symbol,
                                 const Constellation& constellation, double noise_var,
                                 Estimator estimator, const IterativeOptions& options = {});

/// Dispatches on `kind`: the non-iterative mode is a single coherent
/// detection from the pilot estimate.
std::vector<std::size_t> run_baseline(const ComplexMatrix& x, Index pilot_index,
                                      Complex pilot_symbol, const Constellation& constellation,
                                      double noise_var, const BaselineKind& kind,
                                      bool strict_iterations = false);

}  // namespace simoml

#include "simoml/baselines.hpp"

#include <cmath>

#include "simoml/errors.hpp"

namespace simoml {

namespace {

ComplexVector to_symbols(const std::vector<std::size_t>& idx, const Constellation& constellation) {
  ComplexVector s(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) s[static_cast<Index>(i)] = constellation[idx[i]];
  return s;
}

}  // namespace

ComplexVector pilot_estimate(const ComplexVector& x_pilot, Complex pilot_symbol, double noise_var,
                             Estimator estimator) {
  if (std::abs(std::abs(pilot_symbol) - 1.0) > 1e-12) {
    throw InvalidInput("pilot_estimate: pilot symbol must have unit modulus");
  }
  if (!(noise_var >= 0.0)) throw InvalidInput("pilot_estimate: negative noise variance");
  ComplexVector h = x_pilot * pilot_symbol;
  if (estimator == Estimator::MMSE) h /= (1.0 + noise_var);
  return h;
}

std::vector<std::size_t> coherent_detect_index(const ComplexMatrix& x, const ComplexVector& h_hat,
                                               const Constellation& constellation, Index pilot_index,
                                               Complex pilot_symbol) {
  if (h_hat.size() != x.rows()) throw InvalidInput("coherent_detect: channel length mismatch");
  if (pilot_index < 0 || pilot_index >= x.cols()) {
    throw InvalidInput("coherent_detect: pilot index out of range");
  }
  const auto pilot_idx = constellation.index_of(pilot_symbol);
  if (!pilot_idx) throw InvalidInput("coherent_detect: pilot symbol is not a constellation point");
  const double energy = h_hat.squaredNorm();
  if (!(energy > 0.0)) throw InvalidInput("coherent_detect: zero channel estimate");

  // h^H x_k / ||h||^2 estimates conj(s_k).
  const Eigen::RowVectorXcd matched = h_hat.adjoint() * x / energy;
  std::vector<std::size_t> out(static_cast<std::size_t>(x.cols()));
  for (Index k = 0; k < x.cols(); ++k) {
    out[static_cast<std::size_t>(k)] =
        k == pilot_index ? *pilot_idx : quantize_index(std::conj(matched[k]), constellation);
  }
  return out;
}

ComplexVector coherent_detect(const ComplexMatrix& x, const ComplexVector& h_hat,
                              const Constellation& constellation, Index pilot_index,
                              Complex pilot_symbol) {
  return to_symbols(coherent_detect_index(x, h_hat, constellation, pilot_index, pilot_symbol),
                    constellation);
}

IterativeResult iterative_detect(const ComplexMatrix& x, Index pilot_index, Complex pilot_symbol,
                                 const Constellation& constellation, double noise_var,
                                 Estimator estimator, const IterativeOptions& options) {
  if (options.iterations < 1) throw InvalidInput("iterative_detect: iterations must be >= 1");
  if (pilot_index < 0 || pilot_index >= x.cols()) {
    throw InvalidInput("iterative_detect: pilot index out of range");
  }
  ComplexVector h = pilot_estimate(x.col(pilot_index), pilot_symbol, noise_var, estimator);

  IterativeResult result;
  for (std::size_t it = 1; it <= options.iterations; ++it) {
    std::vector<std::size_t> idx =
        coherent_detect_index(x, h, constellation, pilot_index, pilot_symbol);
    result.iterations_run = it;
    const bool repeated = it > 1 && idx == result.sequence_index;
    result.sequence_index = std::move(idx);
    if (repeated && !options.strict_iterations) break;
    if (it == options.iterations) break;

    const ComplexVector s = to_symbols(result.sequence_index, constellation);
    const double denom = s.squaredNorm() + (estimator == Estimator::MMSE ? noise_var : 0.0);
    h = x * s / denom;
  }
  result.sequence = to_symbols(result.sequence_index, constellation);
  return result;
}

std::vector<std::size_t> run_baseline(const ComplexMatrix& x, Index pilot_index,
                                      Complex pilot_symbol, const Constellation& constellation,
                                      double noise_var, const BaselineKind& kind,
                                      bool strict_iterations) {
  if (kind.mode == BaselineMode::NonIterative) {
    const ComplexVector h = pilot_estimate(x.col(pilot_index), pilot_symbol, noise_var, kind.estimator);
    return coherent_detect_index(x, h, constellation, pilot_index, pilot_symbol);
  }
  return iterative_detect(x, pilot_index, pilot_symbol, constellation, noise_var, kind.estimator,
                          {kind.iterations, strict_iterations})
      .sequence_index;
}

}  // namespace simoml

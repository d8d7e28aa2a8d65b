#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string_view>
#include <vector>

#include "simoml/model.hpp"
#include "simoml/numerics.hpp"

namespace simoml {

/// rho I - X^H X / N and its upper Cholesky factor.
struct SearchMatrix {
  double rho = 0.0;
  double lambda_max = 0.0;
  double jitter = 0.0;  // rho - lambda_max
  UpperTriangular r;

  Index dim() const noexcept { return r.dim(); }
};

inline constexpr double kDefaultJitterRel = 1e-6;

/// rho = lambda_max (1 + jitter_rel), R = chol(rho I - gram(X)).
SearchMatrix build_search_matrix(const ComplexMatrix& x, double jitter_rel = kDefaultJitterRel);

/// Same construction from an already formed Gram matrix (e.g. the ideal
/// expectation E[X^H X]/N).
SearchMatrix build_search_matrix(const HermitianMatrix& g, double jitter_rel = kDefaultJitterRel);

/// Metric of the partial sequence occupying positions `layer`..T-1 (0-based):
/// |sum_{k >= layer} R(layer,k) s_k|^2 + child_metric. Entries of `s` below
/// `layer` are ignored.
double partial_metric(const UpperTriangular& r, Index layer, const ComplexVector& s,
                      double child_metric);

/// ||R s||^2 computed directly.
double full_metric(const UpperTriangular& r, const ComplexVector& s);

enum class FailurePolicy { SetInfinite, Double };

std::string_view to_string(FailurePolicy p);
FailurePolicy failure_policy_from_string(std::string_view s);

struct RadiusPolicy {
  double initial_r_squared = 1.0;
  FailurePolicy on_failure = FailurePolicy::SetInfinite;

  /// r^2 = T/8 with the infinite-radius fallback.
  static RadiusPolicy default_for(Index T) { return {static_cast<double>(T) / 8.0, FailurePolicy::SetInfinite}; }
};

struct DecodeResult {
  ComplexVector sequence;
  std::vector<std::size_t> sequence_index;
  double metric = 0.0;
  ComplexVector channel_estimate;
  /// visited_per_layer[i] counts metric evaluations at 0-based layer i.
  std::vector<std::uint64_t> visited_per_layer;
  std::size_t restarts = 0;
  /// Metrics stored at the leaf layer during the final pass, in order.
  std::vector<double> radius_updates;
  /// Second-smallest metric seen (exhaustive search only; NaN otherwise).
  double runner_up_metric = std::numeric_limits<double>::quiet_NaN();
};

/// Depth-first sphere search over sequences with the last symbol fixed to the
/// pilot. Returns the exact minimizer of ||R s||^2.
///
/// Children are tried in constellation order. A node is pruned when its
/// metric exceeds r^2; a leaf that improves on the stored metric replaces it
/// and tightens r^2. If a pass stores nothing, the radius is enlarged
/// according to the policy and the search restarts. The pilot-layer metric is
/// evaluated once per call.
DecodeResult sphere_search(const UpperTriangular& r, const Constellation& constellation,
                           Complex pilot_symbol, const RadiusPolicy& policy);

/// Builds the search matrix from X, runs sphere_search and attaches the
/// least-squares channel estimate for the detected sequence.
DecodeResult sphere_decode(const ComplexMatrix& x, const Constellation& constellation,
                           Complex pilot_symbol, const RadiusPolicy& policy,
                           double jitter_rel = kDefaultJitterRel);

inline constexpr std::uint64_t kDefaultExhaustiveCap = std::uint64_t{1} << 20;

/// Number of pilot-constrained candidates |Omega|^(T-1), saturating at
/// UINT64_MAX.
std::uint64_t candidate_count(std::size_t constellation_size, Index T);

/// Evaluates every pilot-constrained sequence. Ties keep the first sequence in
/// the same order the sphere search enumerates.
DecodeResult exhaustive_search(const UpperTriangular& r, const Constellation& constellation,
                               Complex pilot_symbol, std::uint64_t cap = kDefaultExhaustiveCap);

DecodeResult exhaustive_ml(const ComplexMatrix& x, const Constellation& constellation,
                           Complex pilot_symbol, std::uint64_t cap = kDefaultExhaustiveCap,
                           double jitter_rel = kDefaultJitterRel);

/// h = X s / ||s||^2, the least-squares channel for a fixed sequence.
ComplexVector estimate_channel(const ComplexMatrix& x, const ComplexVector& s);

/// Receives non-fatal diagnostics (e.g. radius-rule violations). Defaults to
/// writing to stderr.
using WarningHandler = std::function<void(std::string_view)>;
void set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace simoml

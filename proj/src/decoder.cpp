#include "simoml/decoder.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>

#include "simoml/errors.hpp"

namespace simoml {

namespace {

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& warning_handler() {
  static WarningHandler h = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return h;
}

std::size_t require_pilot(const Constellation& constellation, Complex pilot_symbol) {
  const auto idx = constellation.index_of(pilot_symbol);
  if (!idx) throw InvalidInput("pilot symbol is not a constellation point");
  return *idx;
}

ComplexVector sequence_from_indices(const Constellation& constellation,
                                    const std::vector<std::size_t>& idx) {
  ComplexVector s(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) s[static_cast<Index>(i)] = constellation[idx[i]];
  return s;
}

std::uint64_t require_within_cap(std::size_t M, Index T, std::uint64_t cap) {
  const std::uint64_t total = candidate_count(M, T);
  if (total > cap) {
    std::ostringstream os;
    os << "exhaustive search over " << M << "^" << (T - 1) << " candidates exceeds the cap of "
       << cap;
    throw CapExceeded(os.str());
  }
  return total;
}

}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex());
  warning_handler() = std::move(handler);
}

void warn(std::string_view message) {
  std::lock_guard lock(warning_mutex());
  if (warning_handler()) warning_handler()(message);
}

std::string_view to_string(FailurePolicy p) {
  switch (p) {
    case FailurePolicy::SetInfinite: return "SetInfinite";
    case FailurePolicy::Double: return "Double";
  }
  return "?";
}

FailurePolicy failure_policy_from_string(std::string_view s) {
  if (s == "SetInfinite") return FailurePolicy::SetInfinite;
  if (s == "Double") return FailurePolicy::Double;
  throw InvalidInput("unknown failure policy '" + std::string(s) + "'");
}

SearchMatrix build_search_matrix(const HermitianMatrix& g, double jitter_rel) {
  if (!(jitter_rel > 0.0) || !std::isfinite(jitter_rel)) {
    throw InvalidInput("build_search_matrix: jitter_rel must be positive");
  }
  const double lambda = max_eigenvalue(g);
  const double scale = lambda > 0.0 ? lambda : 1.0;
  const double rho = lambda + jitter_rel * scale;

  ComplexMatrix shifted = -g.matrix();
  shifted.diagonal().array() += rho;
  const HermitianMatrix a = HermitianMatrix::from_upper(std::move(shifted));
  return SearchMatrix{rho, lambda, rho - lambda, cholesky_psd(a)};
}

SearchMatrix build_search_matrix(const ComplexMatrix& x, double jitter_rel) {
  return build_search_matrix(gram(x), jitter_rel);
}

double partial_metric(const UpperTriangular& r, Index layer, const ComplexVector& s,
                      double child_metric) {
  const Index T = r.dim();
  if (layer < 0 || layer >= T || s.size() != T) {
    throw InvalidInput("partial_metric: layer or sequence length out of range");
  }
  Complex acc(0.0);
  for (Index k = layer; k < T; ++k) acc += r(layer, k) * s[k];
  return std::norm(acc) + child_metric;
}

double full_metric(const UpperTriangular& r, const ComplexVector& s) {
  if (s.size() != r.dim()) throw InvalidInput("full_metric: sequence length mismatch");
  double total = 0.0;
  for (Index i = r.dim() - 1; i >= 0; --i) total = partial_metric(r, i, s, total);
  return total;
}

DecodeResult sphere_search(const UpperTriangular& r, const Constellation& constellation,
                           Complex pilot_symbol, const RadiusPolicy& policy) {
  const Index T = r.dim();
  if (T < 1) throw InvalidInput("sphere_search: empty search matrix");
  if (!(policy.initial_r_squared > 0.0)) {
    throw InvalidInput("sphere_search: initial radius must be positive");
  }
  const std::size_t pilot_idx = require_pilot(constellation, pilot_symbol);
  const ComplexMatrix& rm = r.matrix();
  const std::vector<Complex>& pts = constellation.points();
  const std::size_t M = pts.size();
  const auto T_sz = static_cast<std::size_t>(T);

  DecodeResult result;
  result.visited_per_layer.assign(T_sz, 0);

  std::vector<std::size_t> idx(T_sz, 0);
  idx[T_sz - 1] = pilot_idx;
  ComplexVector s(T);
  s[T - 1] = pts[pilot_idx];
  // metric[i]: metric of the partial sequence s_{i..T-1}; base[i]: the part of
  // row i contributed by s_{i+1..T-1}.
  std::vector<double> metric(T_sz + 1, 0.0);
  std::vector<Complex> base(T_sz, Complex(0.0));

  const double pilot_metric = std::norm(rm(T - 1, T - 1) * s[T - 1]);
  metric[T_sz - 1] = pilot_metric;
  result.visited_per_layer[T_sz - 1] = 1;

  const auto compute_base = [&](Index i) {
    Complex acc(0.0);
    for (Index k = i + 1; k < T; ++k) acc += rm(i, k) * s[k];
    base[static_cast<std::size_t>(i)] = acc;
  };

  std::vector<std::size_t> best_idx;
  double best_metric = std::numeric_limits<double>::infinity();
  double r_squared = policy.initial_r_squared;

  for (;;) {
    bool stored = false;
    double bound = r_squared;
    result.radius_updates.clear();

    if (pilot_metric <= bound) {
      if (T == 1) {
        best_idx = idx;
        best_metric = pilot_metric;
        result.radius_updates.push_back(pilot_metric);
        stored = true;
      } else {
        Index i = T - 2;
        compute_base(i);
        idx[static_cast<std::size_t>(i)] = 0;
        for (;;) {
          const auto iu = static_cast<std::size_t>(i);
          const Complex v = base[iu] + rm(i, i) * pts[idx[iu]];
          const double m = std::norm(v) + metric[iu + 1];
          ++result.visited_per_layer[iu];
          if (m <= bound) {
            if (i == 0) {
              if (!stored || m < best_metric) {
                best_idx = idx;
                best_metric = m;
                bound = m;
                stored = true;
                result.radius_updates.push_back(m);
              }
            } else {
              metric[iu] = m;
              s[i] = pts[idx[iu]];
              --i;
              compute_base(i);
              idx[static_cast<std::size_t>(i)] = 0;
              continue;
            }
          }
          // Next sibling, climbing past exhausted layers. The pilot layer has
          // a single admissible symbol and is never advanced.
          while (i < T - 1 && idx[static_cast<std::size_t>(i)] + 1 == M) ++i;
          if (i == T - 1) break;
          ++idx[static_cast<std::size_t>(i)];
        }
      }
    }

    if (stored) break;
    ++result.restarts;
    if (policy.on_failure == FailurePolicy::Double && std::isfinite(r_squared)) {
      r_squared *= 4.0;  // r doubles
    } else {
      r_squared = std::numeric_limits<double>::infinity();
    }
  }

  result.sequence_index = best_idx;
  result.sequence = sequence_from_indices(constellation, best_idx);
  result.metric = full_metric(r, result.sequence);
  return result;
}

DecodeResult sphere_decode(const ComplexMatrix& x, const Constellation& constellation,
                           Complex pilot_symbol, const RadiusPolicy& policy, double jitter_rel) {
  const SearchMatrix sm = build_search_matrix(x, jitter_rel);
  const double shift = sm.jitter * static_cast<double>(x.cols());
  if (std::isfinite(policy.initial_r_squared) && shift > 0.01 * policy.initial_r_squared) {
    std::ostringstream os;
    os << "uniform metric shift " << shift << " exceeds 1% of r^2 = " << policy.initial_r_squared;
    warn(os.str());
  }
  DecodeResult result = sphere_search(sm.r, constellation, pilot_symbol, policy);
  result.channel_estimate = estimate_channel(x, result.sequence);
  return result;
}

std::uint64_t candidate_count(std::size_t constellation_size, Index T) {
  std::uint64_t count = 1;
  for (Index i = 0; i + 1 < T; ++i) {
    if (count > std::numeric_limits<std::uint64_t>::max() / constellation_size) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    count *= constellation_size;
  }
  return count;
}

DecodeResult exhaustive_search(const UpperTriangular& r, const Constellation& constellation,
                               Complex pilot_symbol, std::uint64_t cap) {
  const Index T = r.dim();
  if (T < 1) throw InvalidInput("exhaustive_search: empty search matrix");
  const std::size_t pilot_idx = require_pilot(constellation, pilot_symbol);
  const std::size_t M = constellation.size();
  const std::uint64_t total = require_within_cap(M, T, cap);
  const auto T_sz = static_cast<std::size_t>(T);

  DecodeResult result;
  result.visited_per_layer.assign(T_sz, 1);
  for (std::size_t i = T_sz - 1; i-- > 0;) {
    result.visited_per_layer[i] = result.visited_per_layer[i + 1] * M;
  }

  std::vector<std::size_t> idx(T_sz, 0);
  idx[T_sz - 1] = pilot_idx;
  ComplexVector s = sequence_from_indices(constellation, idx);

  std::vector<std::size_t> best_idx = idx;
  double best = std::numeric_limits<double>::infinity();
  double runner_up = std::numeric_limits<double>::infinity();
  for (std::uint64_t n = 0; n < total; ++n) {
    const double m = full_metric(r, s);
    if (m < best) {
      runner_up = best;
      best = m;
      best_idx = idx;
    } else if (m < runner_up) {
      runner_up = m;
    }
    // Odometer with layer 0 as the fastest digit, matching the depth-first
    // leaf order of sphere_search.
    for (std::size_t i = 0; i + 1 < T_sz; ++i) {
      if (++idx[i] < M) {
        s[static_cast<Index>(i)] = constellation[idx[i]];
        break;
      }
      idx[i] = 0;
      s[static_cast<Index>(i)] = constellation[0];
    }
  }

  result.sequence_index = best_idx;
  result.sequence = sequence_from_indices(constellation, best_idx);
  result.metric = full_metric(r, result.sequence);
  result.runner_up_metric = runner_up;
  return result;
}

DecodeResult exhaustive_ml(const ComplexMatrix& x, const Constellation& constellation,
                           Complex pilot_symbol, std::uint64_t cap, double jitter_rel) {
  require_within_cap(constellation.size(), x.cols(), cap);
  const SearchMatrix sm = build_search_matrix(x, jitter_rel);
  DecodeResult result = exhaustive_search(sm.r, constellation, pilot_symbol, cap);
  result.channel_estimate = estimate_channel(x, result.sequence);
  return result;
}

ComplexVector estimate_channel(const ComplexMatrix& x, const ComplexVector& s) {
  if (s.size() != x.cols()) throw InvalidInput("estimate_channel: sequence length mismatch");
  const double energy = s.squaredNorm();
  if (!(energy > 0.0)) throw InvalidInput("estimate_channel: zero sequence");
  return x * s / energy;
}

}  // namespace simoml

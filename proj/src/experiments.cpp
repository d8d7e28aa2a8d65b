#include "simoml/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "simoml/errors.hpp"

namespace simoml {

namespace {

// Runs body(i) for i in [0, n) on `workers` threads. Results must be written
// to per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

bool is_baseline(Detector d) { return d != Detector::ML && d != Detector::ExhaustiveOracle; }

BaselineKind baseline_kind(Detector d) {
  switch (d) {
    case Detector::LsNonIter: return {Estimator::LS, BaselineMode::NonIterative};
    case Detector::LsIter: return {Estimator::LS, BaselineMode::Iterative};
    case Detector::MmseNonIter: return {Estimator::MMSE, BaselineMode::NonIterative};
    case Detector::MmseIter: return {Estimator::MMSE, BaselineMode::Iterative};
    default: throw InvalidInput("not a baseline detector");
  }
}

std::uint64_t count_errors(const std::vector<std::size_t>& detected, const ObservationBlock& block) {
  std::uint64_t errors = 0;
  for (std::size_t k = 0; k < detected.size(); ++k) {
    if (static_cast<Index>(k) == block.pilot_index) continue;
    if (detected[k] != block.s_index[k]) ++errors;
  }
  return errors;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

std::string_view to_string(Detector d) {
  switch (d) {
    case Detector::ML: return "ML";
    case Detector::LsNonIter: return "LS-NonIter";
    case Detector::LsIter: return "LS-Iter";
    case Detector::MmseNonIter: return "MMSE-NonIter";
    case Detector::MmseIter: return "MMSE-Iter";
    case Detector::ExhaustiveOracle: return "ExhaustiveOracle";
  }
  return "?";
}

const std::vector<Detector>& all_detectors() {
  static const std::vector<Detector> all{Detector::ML,          Detector::LsNonIter,
                                         Detector::LsIter,      Detector::MmseNonIter,
                                         Detector::MmseIter,    Detector::ExhaustiveOracle};
  return all;
}

Detector detector_from_string(std::string_view s) {
  for (Detector d : all_detectors()) {
    if (to_string(d) == s) return d;
  }
  throw InvalidInput("unknown detector '" + std::string(s) + "'");
}

std::size_t default_trials(Index T) {
  if (T < 2) return 1;
  const auto data = static_cast<std::size_t>(T - 1);
  return (20000 + data - 1) / data;
}

ExperimentConfig ExperimentConfig::defaults_for(Index T) {
  ExperimentConfig c;
  c.T = T;
  c.trials = default_trials(T);
  c.radius_r_squared = static_cast<double>(T) / 8.0;
  return c;
}

void validate_config(const ExperimentConfig& c) {
  if (c.T < 2) throw InvalidInput("T must be at least 2");
  if (c.trials < 1) throw InvalidInput("trials must be at least 1");
  if (c.N_list.empty()) throw InvalidInput("N_list must not be empty");
  for (Index n : c.N_list) {
    if (n < 1) throw InvalidInput("every N must be at least 1");
  }
  if (c.snr_db_list.empty()) throw InvalidInput("snr_db_list must not be empty");
  for (double snr : c.snr_db_list) {
    if (std::isnan(snr) || (std::isinf(snr) && snr < 0)) {
      throw InvalidInput("snr_db values must be finite or +inf");
    }
  }
  if (!(c.radius_r_squared > 0.0)) throw InvalidInput("radius_r_squared must be positive");
  if (c.detectors.empty()) throw InvalidInput("at least one detector is required");
  (void)Constellation::by_name(c.constellation);
}

std::vector<std::string> config_warnings(const ExperimentConfig& c) {
  std::vector<std::string> out;
  const double half = static_cast<double>(c.T) / 2.0;
  if (std::isfinite(c.radius_r_squared) && c.radius_r_squared >= half) {
    out.push_back("radius_r_squared = " + fmt_double(c.radius_r_squared) +
                  " is not below T/2 = " + fmt_double(half) +
                  "; the large-antenna radius rule requires r^2 < T/2");
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t seed, Index N, std::size_t snr_index, std::size_t trial) {
  return derive_seed(seed, {static_cast<std::uint64_t>(N), snr_index, trial});
}

ObservationBlock trial_block(const ExperimentConfig& config, const Constellation& constellation,
                             Index N, std::size_t snr_index, std::size_t trial) {
  Rng rng(trial_seed(config.seed, N, snr_index, trial));
  return generate_block(config.T, N, constellation, snr_to_noise_var(config.snr_db_list[snr_index]),
                        constellation[0], rng);
}

SerTable run_ser_sweep(const ExperimentConfig& config, std::size_t parallelism) {
  validate_config(config);
  const Constellation constellation = Constellation::by_name(config.constellation);
  const std::vector<Detector>& dets = config.detectors;
  const bool want_oracle =
      std::find(dets.begin(), dets.end(), Detector::ExhaustiveOracle) != dets.end();
  if (want_oracle && candidate_count(constellation.size(), config.T) > kDefaultExhaustiveCap) {
    throw CapExceeded("ExhaustiveOracle selected but " + constellation.name() + " with T = " +
                      std::to_string(config.T) + " exceeds the exhaustive-search cap");
  }
  const RadiusPolicy policy{config.radius_r_squared, config.failure_policy};
  const std::size_t D = dets.size();

  SerTable table;
  table.T = config.T;
  std::vector<std::uint64_t> errors(config.trials * D);

  for (Index N : config.N_list) {
    for (std::size_t j = 0; j < config.snr_db_list.size(); ++j) {
      parallel_for(config.trials, parallelism, [&](std::size_t t) {
        const ObservationBlock block = trial_block(config, constellation, N, j, t);
        std::optional<SearchMatrix> sm;
        for (std::size_t d = 0; d < D; ++d) {
          std::vector<std::size_t> detected;
          if (is_baseline(dets[d])) {
            detected = run_baseline(block.x, block.pilot_index, block.pilot_symbol, constellation,
                                    block.noise_var, baseline_kind(dets[d]),
                                    config.strict_iterations);
          } else {
            if (!sm) sm = build_search_matrix(block.x);
            detected = dets[d] == Detector::ML
                           ? sphere_search(sm->r, constellation, block.pilot_symbol, policy)
                                 .sequence_index
                           : exhaustive_search(sm->r, constellation, block.pilot_symbol)
                                 .sequence_index;
          }
          errors[t * D + d] = count_errors(detected, block);
        }
      });

      for (std::size_t d = 0; d < D; ++d) {
        SerRow row;
        row.detector = dets[d];
        row.N = N;
        row.snr_db = config.snr_db_list[j];
        row.symbols_tested = config.trials * static_cast<std::uint64_t>(config.T - 1);
        for (std::size_t t = 0; t < config.trials; ++t) row.symbol_errors += errors[t * D + d];
        row.ser = static_cast<double>(row.symbol_errors) / static_cast<double>(row.symbols_tested);
        row.std_error = std::sqrt(row.ser * (1.0 - row.ser) / static_cast<double>(row.symbols_tested));
        table.rows.push_back(row);
      }
    }
  }
  return table;
}

ComplexityTable run_complexity(const ExperimentConfig& config, std::size_t parallelism) {
  validate_config(config);
  if (std::find(config.detectors.begin(), config.detectors.end(), Detector::ML) ==
      config.detectors.end()) {
    throw InvalidInput("run_complexity requires the ML detector");
  }
  const Constellation constellation = Constellation::by_name(config.constellation);
  const RadiusPolicy policy{config.radius_r_squared, config.failure_policy};
  const auto T = static_cast<std::size_t>(config.T);

  ComplexityTable table;
  table.T = config.T;
  std::vector<std::uint64_t> visited(config.trials * T);
  std::vector<std::size_t> restarts(config.trials);

  for (Index N : config.N_list) {
    for (std::size_t j = 0; j < config.snr_db_list.size(); ++j) {
      parallel_for(config.trials, parallelism, [&](std::size_t t) {
        const ObservationBlock block = trial_block(config, constellation, N, j, t);
        const SearchMatrix sm = build_search_matrix(block.x);
        const DecodeResult r = sphere_search(sm.r, constellation, block.pilot_symbol, policy);
        std::copy(r.visited_per_layer.begin(), r.visited_per_layer.end(),
                  visited.begin() + static_cast<std::ptrdiff_t>(t * T));
        restarts[t] = r.restarts;
      });

      std::size_t restarted = 0;
      for (std::size_t t = 0; t < config.trials; ++t) restarted += restarts[t] > 0 ? 1 : 0;
      const double trials = static_cast<double>(config.trials);
      for (std::size_t layer = 0; layer < T; ++layer) {
        std::uint64_t sum = 0;
        std::uint64_t max = 0;
        for (std::size_t t = 0; t < config.trials; ++t) {
          const std::uint64_t v = visited[t * T + layer];
          sum += v;
          max = std::max(max, v);
        }
        const double mean = static_cast<double>(sum) / trials;
        double sq = 0.0;
        for (std::size_t t = 0; t < config.trials; ++t) {
          const double dv = static_cast<double>(visited[t * T + layer]) - mean;
          sq += dv * dv;
        }
        ComplexityRow row;
        row.N = N;
        row.snr_db = config.snr_db_list[j];
        row.layer = static_cast<Index>(layer + 1);
        row.mean_visited = mean;
        row.max_visited = max;
        row.restart_rate = static_cast<double>(restarted) / trials;
        row.var_visited = config.trials > 1 ? sq / (trials - 1.0) : 0.0;
        table.rows.push_back(row);
      }
    }
  }
  return table;
}

std::optional<double> snr_at_ser(const SerTable& table, Detector detector, Index N, double target) {
  std::vector<SerRow> curve;
  for (const SerRow& row : table.rows) {
    if (row.detector == detector && row.N == N && std::isfinite(row.snr_db)) curve.push_back(row);
  }
  std::sort(curve.begin(), curve.end(),
            [](const SerRow& a, const SerRow& b) { return a.snr_db < b.snr_db; });
  const auto floored = [](const SerRow& r) {
    return r.symbol_errors > 0 ? r.ser : 0.5 / static_cast<double>(r.symbols_tested);
  };
  for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
    const double a = floored(curve[k]);
    const double b = floored(curve[k + 1]);
    if (a >= target && b < target) {
      const double la = std::log10(a);
      const double lb = std::log10(b);
      const double frac = (std::log10(target) - la) / (lb - la);
      return curve[k].snr_db + frac * (curve[k + 1].snr_db - curve[k].snr_db);
    }
  }
  return std::nullopt;
}

bool AsymptoticsReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* AsymptoticsReport::find(std::string_view name) const {
  for (const CheckResult& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

HermitianMatrix ideal_gram(const ComplexVector& s, double noise_var) {
  ComplexMatrix g = s * s.adjoint();
  g.diagonal().array() += noise_var;
  return HermitianMatrix::from_upper(std::move(g));
}

double ideal_cholesky_diagonal(Index T, Index i) {
  const double t = static_cast<double>(T);
  const double v = t - t / (t - static_cast<double>(i));
  return std::sqrt(std::max(0.0, v));
}

namespace {

struct EntryStats {
  double worst_mean_z = 0.0;
  double worst_var_z = 0.0;
  double mean_of_var_n = 0.0;  // average of N * sample variance over the group
};

}  // namespace

AsymptoticsReport validate_asymptotics(Index T, double noise_var, const Constellation& constellation,
                                       std::uint64_t seed, const AsymptoticsOptions& options) {
  if (T < 3) throw InvalidInput("validate_asymptotics: T must be at least 3");
  if (!(noise_var >= 0.0)) throw InvalidInput("validate_asymptotics: negative noise variance");
  if (options.antennas < 1 || options.blocks < 2) {
    throw InvalidInput("validate_asymptotics: need at least one antenna and two blocks");
  }

  AsymptoticsReport report;
  const auto add = [&](std::string name, bool passed, std::string detail) {
    report.checks.push_back({std::move(name), passed, std::move(detail)});
  };

  Rng rng(derive_seed(seed, {0x5eedULL, static_cast<std::uint64_t>(T)}));
  const ObservationBlock reference = generate_block(T, 1, constellation, 0.0, constellation[0], rng);
  const ComplexVector& s = reference.s_true;
  const double t = static_cast<double>(T);

  // Largest eigenvalue of the ideal Gram matrix.
  {
    const double lambda = max_eigenvalue(ideal_gram(s, noise_var));
    const double expected = t + noise_var;
    const double rel = std::abs(lambda - expected) / expected;
    add("ideal-gram-max-eigenvalue", rel <= 1e-10,
        "lambda_max = " + fmt_double(lambda) + ", expected T + noise_var = " + fmt_double(expected));
  }

  // Closed-form factor of T I - s s^H.
  const HermitianMatrix a = [&] {
    ComplexMatrix m = -(s * s.adjoint());
    m.diagonal().array() += t;
    return HermitianMatrix::from_upper(std::move(m));
  }();
  const UpperTriangular r = cholesky_psd(a);
  {
    double worst = 0.0;
    for (Index i = 0; i < T; ++i) {
      worst = std::max(worst, std::abs(r(i, i).real() - ideal_cholesky_diagonal(T, i)));
    }
    const double last = std::abs(r(T - 1, T - 1));
    add("ideal-cholesky-diagonal", worst <= 1e-9 && last <= 1e-9,
        "max |L_ii - sqrt(T - T/(T-i+1))| = " + fmt_double(worst) +
            ", |L_TT| = " + fmt_double(last));
  }

  // Transmitted sequence has zero metric; single-symbol errors cost
  // |L_ii|^2 |s~_i - s_i|^2 at their layer.
  {
    const double m = full_metric(r, s);
    add("transmitted-sequence-zero-metric", std::abs(m) <= 1e-9,
        "metric of the transmitted sequence = " + fmt_double(m));
  }
  {
    double worst_dev = 0.0;
    double smallest = std::numeric_limits<double>::infinity();
    for (Index i = 0; i + 1 < T; ++i) {
      for (std::size_t p = 0; p < constellation.size(); ++p) {
        if (constellation[p] == s[i]) continue;
        ComplexVector wrong = s;
        wrong[i] = constellation[p];
        double child = 0.0;
        for (Index k = T - 1; k > i; --k) child = partial_metric(r, k, wrong, child);
        const double layer_metric = partial_metric(r, i, wrong, child);
        const double expected = std::norm(r(i, i)) * std::norm(constellation[p] - s[i]);
        worst_dev = std::max(worst_dev, std::abs(layer_metric - expected));
        smallest = std::min(smallest, layer_metric);
      }
    }
    add("single-error-layer-metric", worst_dev <= 1e-9 && smallest > 1e-9,
        "max deviation from |L_ii|^2 |s~_i - s_i|^2 = " + fmt_double(worst_dev) +
            ", smallest metric = " + fmt_double(smallest));
  }
  {
    // Every other pilot-consistent sequence has a strictly positive metric.
    double smallest = std::numeric_limits<double>::infinity();
    const std::uint64_t total = candidate_count(constellation.size(), T);
    const auto visit = [&](const ComplexVector& cand) {
      if ((cand - s).cwiseAbs().maxCoeff() < 1e-12) return;
      smallest = std::min(smallest, full_metric(r, cand));
    };
    ComplexVector cand = s;
    if (total <= (std::uint64_t{1} << 16)) {
      std::vector<std::size_t> idx(static_cast<std::size_t>(T - 1), 0);
      for (Index k = 0; k + 1 < T; ++k) cand[k] = constellation[0];
      for (std::uint64_t n = 0; n < total; ++n) {
        visit(cand);
        for (std::size_t k = 0; k < idx.size(); ++k) {
          if (++idx[k] < constellation.size()) {
            cand[static_cast<Index>(k)] = constellation[idx[k]];
            break;
          }
          idx[k] = 0;
          cand[static_cast<Index>(k)] = constellation[0];
        }
      }
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, constellation.size() - 1);
      for (int n = 0; n < 4096; ++n) {
        for (Index k = 0; k + 1 < T; ++k) cand[k] = constellation[pick(rng)];
        visit(cand);
      }
    }
    add("other-sequences-positive-metric", smallest > 1e-9,
        "smallest metric over other sequences = " + fmt_double(smallest));
  }

  // Sample Gram entries over independent blocks with the sequence fixed.
  {
    const Index N = options.antennas;
    const std::size_t B = options.blocks;
    const auto TT = static_cast<std::size_t>(T * T);
    std::vector<Complex> sum(TT, Complex(0.0));
    std::vector<std::vector<Complex>> samples(TT, std::vector<Complex>(B));
    std::normal_distribution<double> unit(0.0, 1.0);
    const double w_scale = std::sqrt(noise_var / 2.0);
    const double h_scale = std::sqrt(0.5);
    ComplexMatrix x(N, T);
    for (std::size_t b = 0; b < B; ++b) {
      for (Index k = 0; k < N; ++k) {
        const double hr = unit(rng);
        const double hi = unit(rng);
        const Complex h(h_scale * hr, h_scale * hi);
        for (Index c = 0; c < T; ++c) {
          const double wr = unit(rng);
          const double wi = unit(rng);
          x(k, c) = std::conj(s[c]) * h + Complex(w_scale * wr, w_scale * wi);
        }
      }
      const HermitianMatrix g = gram(x);
      for (Index i = 0; i < T; ++i) {
        for (Index j = 0; j < T; ++j) samples[static_cast<std::size_t>(i * T + j)][b] = g(i, j);
      }
    }

    const double bd = static_cast<double>(B);
    const double nd = static_cast<double>(N);
    const double diag_var = (1.0 + 2.0 * noise_var + noise_var * noise_var) / nd;
    const double off_var = (2.0 + 2.0 * noise_var + noise_var * noise_var) / nd;
    EntryStats diag, off;
    for (Index i = 0; i < T; ++i) {
      for (Index j = 0; j < T; ++j) {
        const std::vector<Complex>& z = samples[static_cast<std::size_t>(i * T + j)];
        Complex mean(0.0);
        for (const Complex& v : z) mean += v;
        mean /= bd;
        double m2 = 0.0, m4 = 0.0;
        for (const Complex& v : z) {
          const double d2 = std::norm(v - mean);
          m2 += d2;
          m4 += d2 * d2;
        }
        const double var = m2 / (bd - 1.0);
        m4 /= bd;
        const Complex expected_mean = i == j ? Complex(1.0 + noise_var) : s[i] * std::conj(s[j]);
        const double mean_z = std::abs(mean - expected_mean) / std::sqrt(var / bd);
        const double var_se = std::sqrt(std::max(m4 - var * var, 0.0) / bd);
        const double expected_var = i == j ? diag_var : off_var;
        const double var_z = std::abs(var - expected_var) / var_se;
        EntryStats& group = i == j ? diag : off;
        group.worst_mean_z = std::max(group.worst_mean_z, mean_z);
        group.worst_var_z = std::max(group.worst_var_z, var_z);
        group.mean_of_var_n += var * nd;
      }
    }
    diag.mean_of_var_n /= t;
    off.mean_of_var_n /= t * (t - 1.0);

    add("gram-diagonal-mean", diag.worst_mean_z <= 5.0,
        "worst |mean - (1 + noise_var)| in standard errors = " + fmt_double(diag.worst_mean_z));
    add("gram-offdiagonal-mean", off.worst_mean_z <= 5.0,
        "worst |mean - s_i conj(s_j)| in standard errors = " + fmt_double(off.worst_mean_z));
    add("gram-diagonal-variance", diag.worst_var_z <= 5.0,
        "N * variance averages " + fmt_double(diag.mean_of_var_n) + ", expected " +
            fmt_double(diag_var * nd) + "; worst deviation = " + fmt_double(diag.worst_var_z) +
            " standard errors");
    add("gram-offdiagonal-variance", off.worst_var_z <= 5.0,
        "N * variance averages " + fmt_double(off.mean_of_var_n) + ", expected " +
            fmt_double(off_var * nd) + "; worst deviation = " + fmt_double(off.worst_var_z) +
            " standard errors (circular Gaussian channel and noise give (1 + noise_var)^2 = " +
            fmt_double((1.0 + noise_var) * (1.0 + noise_var)) + ")");
  }
  return report;
}

OracleCheckSummary run_oracle_check(std::size_t blocks, std::uint64_t seed, double tol) {
  const std::vector<Index> lengths{4, 5, 6, 7, 8};
  const std::vector<Index> antennas{4, 16, 64};
  const std::vector<Constellation> constellations{Constellation::bpsk(), Constellation::qam4()};
  const std::vector<double> snrs{-2.0, 6.0, 14.0};
  const std::size_t grid = lengths.size() * antennas.size() * constellations.size() * snrs.size();

  OracleCheckSummary summary;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t cell = b % grid;
    const double snr = snrs[cell % snrs.size()];
    cell /= snrs.size();
    const Constellation& cons = constellations[cell % constellations.size()];
    cell /= constellations.size();
    const Index N = antennas[cell % antennas.size()];
    cell /= antennas.size();
    const Index T = lengths[cell];

    Rng rng(derive_seed(seed, {0x0c0ffeeULL, b}));
    const ObservationBlock block = generate_block(T, N, cons, snr_to_noise_var(snr), cons[0], rng);
    const SearchMatrix sm = build_search_matrix(block.x);
    const DecodeResult fast = sphere_search(sm.r, cons, cons[0], RadiusPolicy::default_for(T));
    const DecodeResult full = exhaustive_search(sm.r, cons, cons[0]);

    ++summary.blocks;
    const double gap = std::abs(fast.metric - full.metric);
    summary.worst_metric_gap = std::max(summary.worst_metric_gap, gap);
    const bool tie = full.runner_up_metric - full.metric <= tol;
    if (tie) ++summary.ties;
    std::ostringstream where;
    where << "block " << b << " (T=" << T << ", N=" << N << ", " << cons.name() << ", " << snr
          << " dB)";
    if (gap > tol) {
      ++summary.metric_mismatches;
      summary.failures.push_back(where.str() + ": sphere metric " + fmt_double(fast.metric) +
                                 " vs exhaustive " + fmt_double(full.metric));
    } else if (!tie && fast.sequence_index != full.sequence_index) {
      ++summary.sequence_mismatches;
      summary.failures.push_back(where.str() + ": unique minimizer but sequences differ");
    }
  }
  return summary;
}

}  // namespace simoml

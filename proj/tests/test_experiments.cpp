#include <doctest.h>

#include <cmath>

#include "simoml/errors.hpp"
#include "simoml/experiments.hpp"

using namespace simoml;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c = ExperimentConfig::defaults_for(6);
  c.N_list = {4, 16};
  c.snr_db_list = {-4, 4};
  c.trials = 40;
  c.detectors = all_detectors();
  c.seed = 17;
  return c;
}

}  // namespace

TEST_CASE("default trial counts") {
  CHECK(default_trials(8) == 2858);
  CHECK(default_trials(20) == 1053);
  CHECK(ExperimentConfig::defaults_for(16).radius_r_squared == 2.0);
}

TEST_CASE("detector names round-trip") {
  for (Detector d : all_detectors()) CHECK(detector_from_string(to_string(d)) == d);
  CHECK_THROWS_AS(detector_from_string("ZF"), InvalidInput);
}

TEST_CASE("sweep is reproducible and independent of the thread count") {
  const ExperimentConfig c = small_config();
  const SerTable a = run_ser_sweep(c, 1);
  const SerTable b = run_ser_sweep(c, 1);
  const SerTable p = run_ser_sweep(c, 3);
  CHECK(a == b);
  CHECK(a == p);
  CHECK(a.rows.size() == 2 * 2 * all_detectors().size());
}

TEST_CASE("sweep rows are consistent") {
  const SerTable t = run_ser_sweep(small_config());
  for (const SerRow& r : t.rows) {
    CHECK(r.symbols_tested == 40 * 5);
    CHECK(r.symbol_errors <= r.symbols_tested);
    CHECK(r.ser == doctest::Approx(static_cast<double>(r.symbol_errors) / 200.0));
    CHECK(r.std_error == doctest::Approx(std::sqrt(r.ser * (1 - r.ser) / 200.0)));
  }
}

TEST_CASE("ML and the exhaustive oracle agree in every sweep cell") {
  const SerTable t = run_ser_sweep(small_config());
  for (const SerRow& r : t.rows) {
    if (r.detector != Detector::ML) continue;
    for (const SerRow& o : t.rows) {
      if (o.detector == Detector::ExhaustiveOracle && o.N == r.N && o.snr_db == r.snr_db)
        CHECK(o.symbol_errors == r.symbol_errors);
    }
  }
}

TEST_CASE("LS and MMSE rows coincide") {
  const SerTable t = run_ser_sweep(small_config());
  const auto errors_of = [&](Detector d, Index N, double snr) {
    for (const SerRow& r : t.rows)
      if (r.detector == d && r.N == N && r.snr_db == snr) return r.symbol_errors;
    return std::uint64_t{~0ull};
  };
  for (Index N : {4, 16})
    for (double snr : {-4.0, 4.0}) {
      CHECK(errors_of(Detector::LsIter, N, snr) == errors_of(Detector::MmseIter, N, snr));
      CHECK(errors_of(Detector::LsNonIter, N, snr) == errors_of(Detector::MmseNonIter, N, snr));
    }
}

TEST_CASE("noiseless sweep has no errors for ML") {
  ExperimentConfig c = small_config();
  c.snr_db_list = {std::numeric_limits<double>::infinity()};
  const SerTable t = run_ser_sweep(c);
  for (const SerRow& r : t.rows) CHECK(r.symbol_errors == 0);
}

TEST_CASE("ML needs fewer errors than the pilot-only baselines on average") {
  ExperimentConfig c = small_config();
  c.T = 8;
  c.N_list = {50};
  c.snr_db_list = {-6};
  c.trials = 200;
  c.detectors = {Detector::ML, Detector::LsNonIter};
  const SerTable t = run_ser_sweep(c);
  CHECK(t.rows[0].symbol_errors < t.rows[1].symbol_errors);
}

TEST_CASE("oracle detector refuses blocks beyond the exhaustive cap") {
  ExperimentConfig c = small_config();
  c.T = 14;
  CHECK_THROWS_AS(run_ser_sweep(c), CapExceeded);
}

TEST_CASE("complexity table shape and pilot count") {
  ExperimentConfig c = small_config();
  c.detectors = {Detector::ML};
  const ComplexityTable t = run_complexity(c, 2);
  CHECK(t.rows.size() == 2 * 2 * 6);
  for (const ComplexityRow& r : t.rows) {
    if (r.layer == 6) {
      CHECK(r.mean_visited == 1.0);
      CHECK(r.max_visited == 1);
    }
    CHECK(r.mean_visited <= static_cast<double>(r.max_visited));
    CHECK(r.restart_rate >= 0.0);
    CHECK(r.restart_rate <= 1.0);
  }
  CHECK(t == run_complexity(c, 1));
  c.detectors = {Detector::LsIter};
  CHECK_THROWS_AS(run_complexity(c), InvalidInput);
}

TEST_CASE("snr_at_ser interpolates log SER") {
  SerTable t;
  t.rows.push_back({Detector::ML, 10, 0.0, 1000, 100, 0.1, 0.0});
  t.rows.push_back({Detector::ML, 10, 2.0, 1000, 1, 0.001, 0.0});
  // log10 goes -1 to -3 over 2 dB, so 1e-2 is crossed at 1 dB.
  CHECK(*snr_at_ser(t, Detector::ML, 10, 1e-2) == doctest::Approx(1.0));
  CHECK_FALSE(snr_at_ser(t, Detector::ML, 10, 1e-4).has_value());
  CHECK_FALSE(snr_at_ser(t, Detector::LsIter, 10, 1e-2).has_value());
  t.rows[1] = {Detector::ML, 10, 2.0, 1000, 0, 0.0, 0.0};
  // Zero errors floor at 5e-4.
  const double expected = 2.0 * (1.0) / (std::log10(0.1) - std::log10(5e-4));
  CHECK(*snr_at_ser(t, Detector::ML, 10, 1e-2) == doctest::Approx(expected));
}

TEST_CASE("validate_config rejects unusable settings") {
  ExperimentConfig c;
  c.N_list = {};
  CHECK_THROWS_AS(validate_config(c), InvalidInput);
  c = ExperimentConfig{};
  c.snr_db_list = {-std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(validate_config(c), InvalidInput);
  c = ExperimentConfig{};
  c.constellation = "8-PSK";
  CHECK_THROWS_AS(validate_config(c), InvalidInput);
  c = ExperimentConfig{};
  c.radius_r_squared = 4.0;
  CHECK(config_warnings(c).size() == 1);
  c.radius_r_squared = 3.9;
  CHECK(config_warnings(c).empty());
}

TEST_CASE("ideal structure helpers") {
  CHECK(ideal_cholesky_diagonal(4, 0) == doctest::Approx(1.7320508).epsilon(1e-7));
  CHECK(ideal_cholesky_diagonal(4, 3) == 0.0);
  const Constellation q = Constellation::qam4();
  ComplexVector s(3);
  s << q[0], q[1], q[2];
  const HermitianMatrix g = ideal_gram(s, 0.5);
  CHECK(g(0, 0).real() == doctest::Approx(1.5));
  CHECK(std::abs(g(0, 1) - s[0] * std::conj(s[1])) < 1e-15);
}

TEST_CASE("oracle check on a short run") {
  const OracleCheckSummary s = run_oracle_check(40, 3);
  CHECK(s.blocks == 40);
  CHECK(s.passed());
  CHECK(s.failures.empty());
}

TEST_CASE("asymptotic checks at moderate size") {
  const AsymptoticsReport r =
      validate_asymptotics(6, 0.5, Constellation::qam4(), 1, {2000, 100});
  for (const char* name : {"ideal-gram-max-eigenvalue", "ideal-cholesky-diagonal",
                           "transmitted-sequence-zero-metric", "single-error-layer-metric",
                           "other-sequences-positive-metric", "gram-diagonal-mean",
                           "gram-offdiagonal-mean"}) {
    const CheckResult* c = r.find(name);
    REQUIRE(c != nullptr);
    CHECK_MESSAGE(c->passed, name << ": " << c->detail);
  }
  CHECK(r.find("missing") == nullptr);
}

TEST_CASE("SER does not increase with SNR beyond two standard errors") {
  ExperimentConfig c = ExperimentConfig::defaults_for(8);
  c.N_list = {20};
  c.snr_db_list = {-8, -4, 0, 4};
  c.trials = 150;
  c.seed = 8;
  const SerTable t = run_ser_sweep(c);
  for (Detector d : c.detectors) {
    std::vector<SerRow> curve;
    for (const SerRow& r : t.rows)
      if (r.detector == d) curve.push_back(r);
    for (std::size_t k = 1; k < curve.size(); ++k) {
      const double se = std::hypot(curve[k].std_error, curve[k - 1].std_error);
      CHECK(curve[k].ser <= curve[k - 1].ser + 2.0 * se);
    }
  }
}

TEST_CASE("visited-count variance shrinks as antennas grow") {
  ExperimentConfig c = ExperimentConfig::defaults_for(12);
  c.N_list = {50, 100, 500};
  c.snr_db_list = {0};
  c.trials = 150;
  c.detectors = {Detector::ML};
  c.seed = 4;
  const ComplexityTable t = run_complexity(c);
  const auto total_var = [&](Index N) {
    double v = 0.0;
    for (const ComplexityRow& r : t.rows)
      if (r.N == N) v += r.var_visited;
    return v;
  };
  CHECK(total_var(50) > total_var(100));
  CHECK(total_var(100) > total_var(500));
}

TEST_CASE("iterative baselines are no worse than non-iterative ones") {
  ExperimentConfig c = ExperimentConfig::defaults_for(8);
  c.N_list = {100};
  c.snr_db_list = {0, 2, 4, 6, 8, 10};
  c.trials = 150;
  c.detectors = {Detector::MmseIter, Detector::MmseNonIter};
  c.seed = 21;
  const SerTable t = run_ser_sweep(c);
  for (std::size_t k = 0; k + 1 < t.rows.size(); k += 2) {
    const SerRow& it = t.rows[k];
    const SerRow& non = t.rows[k + 1];
    CHECK(it.ser <= non.ser + 2.0 * std::hypot(it.std_error, non.std_error));
  }
}

TEST_CASE("paired ML and oracle rows match at T = 4") {
  ExperimentConfig c = ExperimentConfig::defaults_for(4);
  c.N_list = {8};
  c.snr_db_list = {-6, 0, 6};
  c.trials = 200;
  c.detectors = {Detector::ML, Detector::ExhaustiveOracle};
  const SerTable t = run_ser_sweep(c);
  for (std::size_t k = 0; k < t.rows.size(); k += 2)
    CHECK(t.rows[k].symbol_errors == t.rows[k + 1].symbol_errors);
}

TEST_CASE("printed concentration formulas") {
  const AsymptoticsReport r = validate_asymptotics(4, 0.5, Constellation::qam4(), 2, {200, 20});
  const CheckResult* dv = r.find("gram-diagonal-variance");
  const CheckResult* ov = r.find("gram-offdiagonal-variance");
  REQUIRE(dv);
  REQUIRE(ov);
  CHECK(dv->detail.find("expected 2.25") != std::string::npos);
  CHECK(ov->detail.find("expected 3.25") != std::string::npos);
}

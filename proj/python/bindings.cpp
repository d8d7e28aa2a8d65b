#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "simoml/cli_io.hpp"
#include "simoml/experiments.hpp"

namespace py = pybind11;
using namespace simoml;

namespace {

ObservationBlock block_from_seed(Index T, Index N, const Constellation& c, double noise_var,
                                 std::optional<Complex> pilot, std::uint64_t seed) {
  Rng rng(seed);
  return generate_block(T, N, c, noise_var, pilot.value_or(c[0]), rng);
}

py::list ser_rows(const SerTable& t) {
  py::list out;
  for (const SerRow& r : t.rows) {
    py::dict d;
    d["detector"] = std::string(to_string(r.detector));
    d["N"] = r.N;
    d["snr_db"] = r.snr_db;
    d["symbols_tested"] = r.symbols_tested;
    d["symbol_errors"] = r.symbol_errors;
    d["ser"] = r.ser;
    d["stderr"] = r.std_error;
    out.append(d);
  }
  return out;
}

py::list complexity_rows(const ComplexityTable& t) {
  py::list out;
  for (const ComplexityRow& r : t.rows) {
    py::dict d;
    d["N"] = r.N;
    d["snr_db"] = r.snr_db;
    d["layer"] = r.layer;
    d["mean_visited"] = r.mean_visited;
    d["max_visited"] = r.max_visited;
    d["restart_rate"] = r.restart_rate;
    d["var_visited"] = r.var_visited;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_simoml, m) {
  m.doc() = "Joint ML channel estimation and data detection for SIMO block fading";

  py::register_exception<CapExceeded>(m, "CapExceeded", PyExc_ValueError);
  py::register_exception<NotPositiveSemidefinite>(m, "NotPositiveSemidefinite", PyExc_ArithmeticError);

  py::class_<Constellation>(m, "Constellation")
      .def(py::init<std::string, std::vector<Complex>>(), py::arg("name"), py::arg("points"))
      .def_static("bpsk", &Constellation::bpsk)
      .def_static("qam4", &Constellation::qam4)
      .def_static("by_name", &Constellation::by_name)
      .def_property_readonly("name", &Constellation::name)
      .def_property_readonly("points", &Constellation::points)
      .def("__len__", &Constellation::size)
      .def("__repr__", [](const Constellation& c) { return "<Constellation " + c.name() + ">"; });

  py::class_<ObservationBlock>(m, "ObservationBlock")
      .def_readonly("x", &ObservationBlock::x)
      .def_readonly("h_true", &ObservationBlock::h_true)
      .def_readonly("s_true", &ObservationBlock::s_true)
      .def_readonly("s_index", &ObservationBlock::s_index)
      .def_readonly("noise_var", &ObservationBlock::noise_var)
      .def_readonly("pilot_index", &ObservationBlock::pilot_index)
      .def_readonly("pilot_symbol", &ObservationBlock::pilot_symbol);

  m.def("snr_to_noise_var", &snr_to_noise_var, py::arg("snr_db"));
  m.def("generate_block", &block_from_seed, py::arg("T"), py::arg("N"), py::arg("constellation"),
        py::arg("noise_var"), py::arg("pilot") = py::none(), py::arg("seed") = 0);
  m.def("quantize", &quantize, py::arg("y"), py::arg("constellation"));

  m.def("gram", [](const ComplexMatrix& x) { return gram(x).matrix(); }, py::arg("x"));
  m.def("max_eigenvalue", [](const ComplexMatrix& g) { return max_eigenvalue(HermitianMatrix(g)); },
        py::arg("g"));
  m.def("cholesky_psd", [](const ComplexMatrix& a) { return cholesky_psd(HermitianMatrix(a)).matrix(); },
        py::arg("a"));

  py::class_<SearchMatrix>(m, "SearchMatrix")
      .def_readonly("rho", &SearchMatrix::rho)
      .def_readonly("lambda_max", &SearchMatrix::lambda_max)
      .def_readonly("jitter", &SearchMatrix::jitter)
      .def_property_readonly("r", [](const SearchMatrix& s) { return s.r.matrix(); });
  m.def("build_search_matrix",
        py::overload_cast<const ComplexMatrix&, double>(&build_search_matrix), py::arg("x"),
        py::arg("jitter_rel") = kDefaultJitterRel);

  py::class_<DecodeResult>(m, "DecodeResult")
      .def_readonly("sequence", &DecodeResult::sequence)
      .def_readonly("sequence_index", &DecodeResult::sequence_index)
      .def_readonly("metric", &DecodeResult::metric)
      .def_readonly("channel_estimate", &DecodeResult::channel_estimate)
      .def_readonly("visited_per_layer", &DecodeResult::visited_per_layer)
      .def_readonly("restarts", &DecodeResult::restarts)
      .def_readonly("radius_updates", &DecodeResult::radius_updates)
      .def_readonly("runner_up_metric", &DecodeResult::runner_up_metric);

  m.def(
      "sphere_decode",
      [](const ComplexMatrix& x, const Constellation& c, std::optional<Complex> pilot,
         std::optional<double> r_squared, const std::string& on_failure, double jitter_rel) {
        const RadiusPolicy p{r_squared.value_or(static_cast<double>(x.cols()) / 8.0),
                             failure_policy_from_string(on_failure)};
        return sphere_decode(x, c, pilot.value_or(c[0]), p, jitter_rel);
      },
      py::arg("x"), py::arg("constellation"), py::arg("pilot") = py::none(),
      py::arg("r_squared") = py::none(), py::arg("on_failure") = "SetInfinite",
      py::arg("jitter_rel") = kDefaultJitterRel);
  m.def(
      "exhaustive_ml",
      [](const ComplexMatrix& x, const Constellation& c, std::optional<Complex> pilot,
         std::uint64_t cap) { return exhaustive_ml(x, c, pilot.value_or(c[0]), cap); },
      py::arg("x"), py::arg("constellation"), py::arg("pilot") = py::none(),
      py::arg("cap") = kDefaultExhaustiveCap);
  m.def("estimate_channel", &estimate_channel, py::arg("x"), py::arg("s"));

  py::enum_<Estimator>(m, "Estimator").value("LS", Estimator::LS).value("MMSE", Estimator::MMSE);
  m.def("pilot_estimate", &pilot_estimate, py::arg("x_pilot"), py::arg("pilot"),
        py::arg("noise_var"), py::arg("estimator"));
  m.def("coherent_detect", &coherent_detect, py::arg("x"), py::arg("h_hat"),
        py::arg("constellation"), py::arg("pilot_index"), py::arg("pilot"));
  m.def(
      "iterative_detect",
      [](const ComplexMatrix& x, Index pilot_index, Complex pilot, const Constellation& c,
         double noise_var, Estimator e, std::size_t iterations, bool strict) {
        const IterativeResult r = iterative_detect(x, pilot_index, pilot, c, noise_var, e,
                                                   {iterations, strict});
        return py::make_tuple(r.sequence, r.iterations_run);
      },
      py::arg("x"), py::arg("pilot_index"), py::arg("pilot"), py::arg("constellation"),
      py::arg("noise_var"), py::arg("estimator"), py::arg("iterations") = kDefaultIterations,
      py::arg("strict_iterations") = false);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_static("defaults_for", &ExperimentConfig::defaults_for, py::arg("T"))
      .def_static("parse", &parse_config_text, py::arg("text"))
      .def("serialize", &serialize_config)
      .def_readwrite("T", &ExperimentConfig::T)
      .def_readwrite("N_list", &ExperimentConfig::N_list)
      .def_readwrite("snr_db_list", &ExperimentConfig::snr_db_list)
      .def_readwrite("trials", &ExperimentConfig::trials)
      .def_readwrite("constellation", &ExperimentConfig::constellation)
      .def_readwrite("radius_r_squared", &ExperimentConfig::radius_r_squared)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("strict_iterations", &ExperimentConfig::strict_iterations)
      .def_property(
          "detectors",
          [](const ExperimentConfig& c) {
            std::vector<std::string> out;
            for (Detector d : c.detectors) out.emplace_back(to_string(d));
            return out;
          },
          [](ExperimentConfig& c, const std::vector<std::string>& names) {
            c.detectors.clear();
            for (const auto& n : names) c.detectors.push_back(detector_from_string(n));
          })
      .def(py::self == py::self);

  m.def(
      "run_ser_sweep",
      [](const ExperimentConfig& c, std::size_t parallelism) {
        SerTable t;
        {
          py::gil_scoped_release release;
          t = run_ser_sweep(c, parallelism);
        }
        return py::make_tuple(ser_rows(t), ser_csv(t));
      },
      py::arg("config"), py::arg("parallelism") = 1,
      "Returns (rows, csv_text).");
  m.def(
      "run_complexity",
      [](const ExperimentConfig& c, std::size_t parallelism) {
        ComplexityTable t;
        {
          py::gil_scoped_release release;
          t = run_complexity(c, parallelism);
        }
        return py::make_tuple(complexity_rows(t), complexity_csv(t));
      },
      py::arg("config"), py::arg("parallelism") = 1,
      "Returns (rows, csv_text).");

  m.def(
      "validate_asymptotics",
      [](Index T, double noise_var, const Constellation& c, std::uint64_t seed, Index antennas,
         std::size_t blocks) {
        const AsymptoticsReport r = validate_asymptotics(T, noise_var, c, seed, {antennas, blocks});
        py::list out;
        for (const CheckResult& k : r.checks) out.append(py::make_tuple(k.name, k.passed, k.detail));
        return out;
      },
      py::arg("T"), py::arg("noise_var"), py::arg("constellation"), py::arg("seed") = 0,
      py::arg("antennas") = 10000, py::arg("blocks") = 400);
  m.def(
      "run_oracle_check",
      [](std::size_t blocks, std::uint64_t seed) {
        const OracleCheckSummary s = run_oracle_check(blocks, seed);
        py::dict d;
        d["blocks"] = s.blocks;
        d["metric_mismatches"] = s.metric_mismatches;
        d["sequence_mismatches"] = s.sequence_mismatches;
        d["ties"] = s.ties;
        d["worst_metric_gap"] = s.worst_metric_gap;
        d["passed"] = s.passed();
        return d;
      },
      py::arg("blocks"), py::arg("seed") = 0);
}

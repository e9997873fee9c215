#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "zoprox/benchmark.hpp"
#include "zoprox/error.hpp"
#include "zoprox/estimators.hpp"
#include "zoprox/problems.hpp"
#include "zoprox/prox.hpp"
#include "zoprox/solvers.hpp"

namespace py = pybind11;
using namespace zoprox;

namespace {

Reporting make_reporting(std::size_t grad_map_every, std::optional<std::uint64_t> budget,
                         std::function<Vector(const Vector&)> true_gradient) {
  Reporting r;
  r.grad_map_every = grad_map_every;
  r.query_budget = budget;
  r.true_gradient = std::move(true_gradient);
  return r;
}

}  // namespace

PYBIND11_MODULE(_zoprox, m) {
  m.doc() = "Zeroth-order proximal stochastic solvers";

  auto base = py::register_exception<Error>(m, "ZOProxError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NonFiniteValue>(m, "NonFiniteValue", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<LabelError>(m, "LabelError", base.ptr());
  py::register_exception<OracleUnavailable>(m, "OracleUnavailable", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::enum_<EstimatorKind>(m, "EstimatorKind")
      .value("CooSGE", EstimatorKind::CooSGE)
      .value("GauSGE", EstimatorKind::GauSGE);

  py::enum_<Algorithm>(m, "Algorithm")
      .value("ProxGD", Algorithm::ProxGD)
      .value("RSPGF", Algorithm::RSPGF)
      .value("ProxSVRG", Algorithm::ProxSVRG)
      .value("ProxSAGA", Algorithm::ProxSAGA);

  py::enum_<OutputPolicy>(m, "OutputPolicy")
      .value("LastIterate", OutputPolicy::LastIterate)
      .value("UniformRandomIterate", OutputPolicy::UniformRandomIterate);

  py::class_<Regularizer>(m, "Regularizer")
      .def_static("none", &Regularizer::none)
      .def_static("l1", &Regularizer::l1, py::arg("lambda1"))
      .def_static("squared_l2", &Regularizer::squared_l2, py::arg("lambda2"))
      .def_static("elastic_net", &Regularizer::elastic_net, py::arg("lambda1"), py::arg("lambda2"))
      .def_property_readonly("lambda1", &Regularizer::lambda1)
      .def_property_readonly("lambda2", &Regularizer::lambda2)
      .def("value", &Regularizer::value, py::arg("x"))
      .def("prox", &Regularizer::prox, py::arg("eta"), py::arg("x"))
      .def("__repr__", &Regularizer::describe);

  m.def("soft_threshold",
        [](const Vector& x, double threshold) {
          Vector out(x.size());
          for (Eigen::Index j = 0; j < x.size(); ++j) out[j] = soft_threshold(x[j], threshold);
          return out;
        },
        py::arg("x"), py::arg("threshold"));
  m.def("gradient_mapping", &gradient_mapping, py::arg("reg"), py::arg("eta"), py::arg("x"),
        py::arg("grad"));

  py::class_<SmoothingSchedule>(m, "SmoothingSchedule")
      .def_static("constant", &SmoothingSchedule::constant, py::arg("mu"))
      .def_static("coo_decay", &SmoothingSchedule::coo_decay, py::arg("c") = 1.0)
      .def_static("gau_decay", &SmoothingSchedule::gau_decay, py::arg("c") = 1.0)
      .def_static("default_for", &SmoothingSchedule::default_for, py::arg("kind"))
      .def("at", &SmoothingSchedule::at, py::arg("t"), py::arg("dim"))
      .def("__repr__", &SmoothingSchedule::describe);

  py::class_<ComponentOracle, std::shared_ptr<ComponentOracle>>(m, "ComponentOracle")
      .def_property_readonly("n", &ComponentOracle::size)
      .def_property_readonly("dim", &ComponentOracle::dimension)
      .def("__call__", &ComponentOracle::eval, py::arg("i"), py::arg("x"));

  py::class_<FunctionOracle, ComponentOracle, std::shared_ptr<FunctionOracle>>(m, "FunctionOracle")
      .def(py::init<std::size_t, std::size_t, FunctionOracle::Fn>(), py::arg("n"), py::arg("dim"),
           py::arg("fn"),
           "Wraps fn(i, x) -> float; fn must be deterministic in (i, x).");

  m.def(
      "estimate_gradient",
      [](const ComponentOracle& oracle, EstimatorKind kind, const Vector& x, double mu,
         std::uint64_t seed) {
        QueryCounter counter;
        CountingOracle counted(oracle, counter);
        Vector g = estimate_full(counted, kind, x, mu, RandomSource(seed));
        return py::make_tuple(g, counter.total());
      },
      py::arg("oracle"), py::arg("kind"), py::arg("x"), py::arg("mu"), py::arg("seed") = 0,
      "Full-batch gradient estimate; returns (estimate, queries).");

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("eta", &SolverConfig::eta)
      .def_readwrite("batch", &SolverConfig::batch)
      .def_readwrite("epochs", &SolverConfig::epochs)
      .def_readwrite("inner", &SolverConfig::inner)
      .def_readwrite("total_iters", &SolverConfig::total_iters)
      .def_readwrite("seed", &SolverConfig::seed)
      .def_readwrite("output_policy", &SolverConfig::output_policy)
      .def_readwrite("rho", &SolverConfig::rho)
      .def_readwrite("lipschitz", &SolverConfig::lipschitz)
      .def_property(
          "estimator", [](const SolverConfig& c) { return c.estimator.kind; },
          [](SolverConfig& c, EstimatorKind k) { c.estimator.kind = k; })
      .def_property(
          "mu", [](const SolverConfig& c) { return c.estimator.mu; },
          [](SolverConfig& c, const SmoothingSchedule& s) { c.estimator.mu = s; })
      .def_property(
          "share_directions", [](const SolverConfig& c) { return c.estimator.share_directions; },
          [](SolverConfig& c, bool v) { c.estimator.share_directions = v; });

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("iter", &TraceRecord::iter)
      .def_readonly("epoch", &TraceRecord::epoch)
      .def_readonly("objective", &TraceRecord::objective)
      .def_readonly("queries", &TraceRecord::queries)
      .def_readonly("grad_map_sq", &TraceRecord::grad_map_sq)
      .def_readonly("test_loss", &TraceRecord::test_loss);

  py::class_<Trace>(m, "Trace")
      .def_readonly("algorithm", &Trace::algorithm)
      .def_readonly("estimator", &Trace::estimator)
      .def_readonly("eta", &Trace::eta)
      .def_readonly("initial", &Trace::initial)
      .def_readonly("records", &Trace::records)
      .def_readonly("final_x", &Trace::final_x)
      .def_readonly("last_x", &Trace::last_x)
      .def_readonly("total_queries", &Trace::total_queries)
      .def_readonly("truncated", &Trace::truncated)
      .def("to_csv", [](const Trace& t) {
        std::ostringstream os;
        write_trace_csv(os, t, false);
        return os.str();
      });

  m.def(
      "solve",
      [](Algorithm algorithm, const ComponentOracle& oracle, const Regularizer& reg,
         const Vector& x0, const SolverConfig& cfg, std::size_t grad_map_every,
         std::optional<std::uint64_t> budget, std::function<Vector(const Vector&)> gradient) {
        auto solver = make_solver(algorithm, oracle, reg, cfg, x0);
        return run(*solver, make_reporting(grad_map_every, budget, std::move(gradient)));
      },
      py::arg("algorithm"), py::arg("oracle"), py::arg("reg"), py::arg("x0"), py::arg("config"),
      py::arg("grad_map_every") = 10, py::arg("budget") = py::none(),
      py::arg("true_gradient") = py::none());

  m.def(
      "recipe",
      [](std::size_t n, std::size_t dim, double lipschitz, Algorithm algorithm,
         EstimatorKind kind) {
        const Recipe r = recipe_hyperparams(n, dim, lipschitz, kind, algorithm);
        py::dict out;
        out["b"] = r.batch;
        out["m"] = r.inner;
        out["rho"] = r.rho;
        out["eta"] = r.eta;
        out["mu_schedule"] = SmoothingSchedule::default_for(kind).describe();
        return out;
      },
      py::arg("n"), py::arg("dim"), py::arg("lipschitz"), py::arg("algorithm"), py::arg("kind"));

  py::class_<Dataset, std::shared_ptr<Dataset>>(m, "Dataset")
      .def_property_readonly("n", &Dataset::size)
      .def_readonly("dim", &Dataset::dim)
      .def_property_readonly("nnz", &Dataset::nnz)
      .def_property_readonly("mapping", [](const Dataset& d) { return to_string(d.mapping); })
      .def_property_readonly("labels",
                             [](const Dataset& d) {
                               Vector out(static_cast<Eigen::Index>(d.size()));
                               for (std::size_t i = 0; i < d.size(); ++i) {
                                 out[static_cast<Eigen::Index>(i)] = d.rows[i].label;
                               }
                               return out;
                             })
      .def("to_dense", [](const Dataset& d) {
        Matrix out = Matrix::Zero(static_cast<Eigen::Index>(d.size()),
                                  static_cast<Eigen::Index>(d.dim));
        for (std::size_t i = 0; i < d.size(); ++i) {
          for (const Feature& f : d.rows[i].features) {
            out(static_cast<Eigen::Index>(i), f.index - 1) = f.value;
          }
        }
        return out;
      });

  m.def(
      "load_libsvm",
      [](const std::filesystem::path& path, bool binary_labels) {
        ParseOptions opts;
        opts.binary_labels = binary_labels;
        return std::make_shared<Dataset>(load_libsvm(path, opts));
      },
      py::arg("path"), py::arg("binary_labels") = true);
  m.def(
      "parse_libsvm",
      [](const std::string& text, bool binary_labels) {
        ParseOptions opts;
        opts.binary_labels = binary_labels;
        std::istringstream in(text);
        return std::make_shared<Dataset>(parse_libsvm(in, opts));
      },
      py::arg("text"), py::arg("binary_labels") = true);
  m.def(
      "make_classification_data",
      [](std::size_t n, std::size_t dim, std::uint64_t seed, double flip) {
        return std::make_shared<Dataset>(make_classification_data(n, dim, seed, flip));
      },
      py::arg("n"), py::arg("dim"), py::arg("seed"), py::arg("flip") = 0.1);

  py::class_<SigmoidLossOracle, ComponentOracle, std::shared_ptr<SigmoidLossOracle>>(
      m, "SigmoidLossOracle")
      .def(py::init<std::shared_ptr<const Dataset>>(), py::arg("data"))
      .def("full_gradient", &SigmoidLossOracle::full_gradient, py::arg("x"))
      .def("lipschitz_bound", &SigmoidLossOracle::lipschitz_bound);

  m.def(
      "run_benchmark",
      [](const std::string& config_text) {
        std::istringstream in(config_text);
        const RunSpec spec = parse_config(in);
        return summary_json(run_benchmark(spec));
      },
      py::arg("config"), "Runs a key = value config and returns the JSON summary.");
}

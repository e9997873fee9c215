#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zoprox/core.hpp"
#include "zoprox/problems.hpp"
#include "zoprox/solvers.hpp"

namespace zoprox {

/// Column order of every trace CSV.
inline constexpr const char* kTraceCsvHeader =
    "iter,epoch,objective,test_loss,queries,grad_map_sq,elapsed_ns";

struct SolverEntry {
  Algorithm algorithm = Algorithm::RSPGF;
  EstimatorKind estimator = EstimatorKind::GauSGE;
  std::optional<double> eta;
  std::optional<std::size_t> batch;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> inner;
  std::optional<std::size_t> iters;
};

struct ProblemSpec {
  std::optional<std::filesystem::path> dataset;
  /// "classification:NxD", "quadratic:NxD" or "logsumexp:NxD".
  std::optional<std::string> synthetic;
  /// Attack mode: scorer command plus a LIBSVM file of examples with class-index labels.
  std::optional<std::string> scorer;
  std::optional<std::filesystem::path> attack_examples;
  double split = 0.5;
  double lambda1 = 1e-5;
  double lambda2 = 1e-5;
  /// Scale every feature row to unit l2 norm before training.
  bool normalize = false;
};

struct RunSpec {
  ProblemSpec problem;
  std::vector<SolverEntry> solvers;
  // Defaults shared by all solver entries; entry fields win.
  std::optional<double> eta;
  std::optional<std::size_t> batch;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> inner;
  std::optional<std::size_t> iters;
  std::optional<std::uint64_t> budget;
  /// Take b from the convergence recipe instead of the fixed default of 20.
  bool recipe = false;
  std::optional<double> lipschitz;
  std::size_t grad_map_every = 10;
  std::filesystem::path output_dir = "zoprox-out";
  std::uint64_t seed = 1;
  /// Write measured solver time into elapsed_ns; off keeps trace files reproducible.
  bool timing = false;
  std::size_t jobs = 1;
};

/// Applies one `key = value` setting (config-file keys match the long flag names).
/// Throws ConfigError for unknown keys or bad values.
void apply_setting(RunSpec& spec, const std::string& key, const std::string& value);

/// Flat key-value config: one `key = value` per line, `#` comments, repeatable `solver`.
RunSpec parse_config(std::istream& in);
RunSpec load_config(const std::filesystem::path& path);

/// A loaded problem ready for any solver.
struct BenchmarkProblem {
  std::shared_ptr<const ComponentOracle> oracle;
  Regularizer reg = Regularizer::none();
  std::function<double(const Vector&)> test_loss;
  std::function<Vector(const Vector&)> true_gradient;
  double lipschitz = 1.0;
  bool attack = false;
  std::string description;
};

BenchmarkProblem load_problem(const ProblemSpec& spec, std::uint64_t seed);

struct ResolvedRun {
  Algorithm algorithm;
  SolverConfig config;
  std::string label;  ///< file stem, e.g. "zo-proxsvrg-coosge"
};

/// Fills every solver entry into a complete SolverConfig.
std::vector<ResolvedRun> resolve_runs(const RunSpec& spec, const BenchmarkProblem& problem);

/// Shared starting point: x0 ~ N(0, I) drawn from the run seed.
Vector initial_point(std::size_t dim, std::uint64_t seed);

struct RunSummary {
  std::string algo;
  std::string estimator;
  std::size_t b = 0;
  double eta = 0.0;
  std::string mu_schedule;
  double final_objective = 0.0;
  std::optional<double> final_test_loss;
  std::uint64_t total_queries = 0;
  std::int64_t wall_ns = 0;
  std::size_t iterations = 0;
  bool truncated = false;
  double initial_objective = 0.0;
};

struct BenchmarkSummary {
  std::vector<RunSummary> runs;
};

/// Runs every solver entry from one shared x0, writes `<label>.csv` per run and
/// `summary.json` into the output directory, and returns the summary.
BenchmarkSummary run_benchmark(const RunSpec& spec);

void write_trace_csv(std::ostream& out, const Trace& trace, bool timing);
std::string summary_json(const BenchmarkSummary& summary);

struct RecipeQuery {
  std::size_t n = 1;
  std::size_t dim = 1;
  double lipschitz = 1.0;
  Algorithm algorithm = Algorithm::ProxSVRG;
  EstimatorKind estimator = EstimatorKind::CooSGE;
};

/// Human-readable table of the resolved recipe (b, m, rho, eta, mu schedule).
std::string print_recipe(const RecipeQuery& query);

}  // namespace zoprox

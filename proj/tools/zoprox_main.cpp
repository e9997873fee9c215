#include <exception>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zoprox/benchmark.hpp"
#include "zoprox/error.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::vector<std::string> comma_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  for (char ch : s) {
    if (ch == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else if (ch != ' ') {
      item += ch;
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

// --algo and --estimator replace the solver list with their cross product. An
// estimator list alone is crossed with the algorithms already configured.
void apply_solver_flags(zoprox::RunSpec& spec, const std::optional<std::string>& algos,
                        const std::optional<std::string>& estimators) {
  if (!algos && !estimators) return;
  std::vector<zoprox::Algorithm> algo_list;
  if (algos) {
    for (const auto& a : comma_list(*algos)) algo_list.push_back(zoprox::algorithm_from_string(a));
  } else {
    std::set<zoprox::Algorithm> seen;
    for (const auto& e : spec.solvers) {
      if (seen.insert(e.algorithm).second) algo_list.push_back(e.algorithm);
    }
  }
  std::vector<zoprox::EstimatorKind> est_list;
  if (estimators) {
    for (const auto& e : comma_list(*estimators)) {
      est_list.push_back(zoprox::estimator_from_string(e));
    }
  } else {
    est_list.push_back(zoprox::EstimatorKind::CooSGE);
  }
  if (algo_list.empty()) throw zoprox::ConfigError("--estimator needs --algo or solver entries");
  spec.solvers.clear();
  for (auto a : algo_list) {
    for (auto e : est_list) {
      zoprox::SolverEntry entry;
      entry.algorithm = a;
      entry.estimator = e;
      spec.solvers.push_back(entry);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order proximal solvers: benchmark runner and recipe calculator"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run a solver sweep and write traces");
  std::optional<std::string> config_path;
  run_cmd->add_option("--config", config_path, "Flat key = value config file");

  // Flags override the config file; each maps onto a config key.
  const std::vector<std::pair<std::string, std::string>> valued = {
      {"dataset", "LIBSVM file (optionally gzip-compressed)"},
      {"synthetic", "kind:NxD with kind in classification, quadratic, logsumexp"},
      {"eta", "Step size for every solver"},
      {"batch", "Mini-batch size b"},
      {"epochs", "Outer epochs S"},
      {"inner", "Inner iterations m"},
      {"iters", "Total iterations T"},
      {"budget", "Maximum total function queries"},
      {"seed", "Seed for data split, x0 and solver randomness"},
      {"out", "Output directory"},
      {"lambda1", "l1 weight"},
      {"lambda2", "squared l2 weight"},
      {"split", "Training fraction of the dataset"},
      {"lipschitz", "Override the smoothness constant L"},
      {"grad-map-every", "Report ||g_eta||^2 every k iterations (0 disables)"},
      {"jobs", "Solver runs executed in parallel"},
      {"scorer", "Attack mode: scorer command"},
      {"attack-examples", "Attack mode: LIBSVM file of examples with class-index labels"},
  };
  std::vector<std::optional<std::string>> values(valued.size());
  for (std::size_t k = 0; k < valued.size(); ++k) {
    run_cmd->add_option("--" + valued[k].first, values[k], valued[k].second);
  }
  std::optional<std::string> algos;
  std::optional<std::string> estimators;
  run_cmd->add_option("--algo", algos, "Comma list of gd, rspgf, svrg, saga");
  run_cmd->add_option("--estimator", estimators, "Comma list of coo, gau");
  bool recipe = false;
  bool timing = false;
  bool normalize = false;
  run_cmd->add_flag("--recipe", recipe, "Take b and m from the convergence recipes");
  run_cmd->add_flag("--timing", timing, "Record measured solver time in elapsed_ns");
  run_cmd->add_flag("--normalize", normalize, "Scale feature rows to unit norm");

  auto* recipe_cmd = app.add_subcommand("recipe", "Print recipe hyperparameters");
  zoprox::RecipeQuery query;
  std::optional<std::string> recipe_dataset;
  std::string recipe_algo = "svrg";
  std::string recipe_est = "coo";
  recipe_cmd->add_option("--n", query.n, "Number of components")->check(CLI::PositiveNumber);
  recipe_cmd->add_option("--d", query.dim, "Dimension")->check(CLI::PositiveNumber);
  recipe_cmd->add_option("--L", query.lipschitz, "Smoothness constant")->check(CLI::PositiveNumber);
  recipe_cmd->add_option("--algo", recipe_algo, "gd, rspgf, svrg or saga");
  recipe_cmd->add_option("--estimator", recipe_est, "coo or gau");
  recipe_cmd->add_option("--dataset", recipe_dataset,
                         "Take n, d and the sigmoid-loss L bound from a LIBSVM file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  zoprox::RunSpec spec;
  try {
    if (*recipe_cmd) {
      query.algorithm = zoprox::algorithm_from_string(recipe_algo);
      query.estimator = zoprox::estimator_from_string(recipe_est);
      if (recipe_dataset) {
        auto data = std::make_shared<const zoprox::Dataset>(zoprox::load_libsvm(*recipe_dataset));
        const zoprox::SigmoidLossOracle oracle(data);
        query.n = oracle.size();
        query.dim = oracle.dimension();
        if (recipe_cmd->count("--L") == 0) query.lipschitz = oracle.lipschitz_bound();
      }
      std::cout << zoprox::print_recipe(query);
      return 0;
    }

    if (config_path) spec = zoprox::load_config(*config_path);
    for (std::size_t k = 0; k < valued.size(); ++k) {
      if (values[k]) zoprox::apply_setting(spec, valued[k].first, *values[k]);
    }
    if (recipe) spec.recipe = true;
    if (timing) spec.timing = true;
    if (normalize) spec.problem.normalize = true;
    apply_solver_flags(spec, algos, estimators);
  } catch (const zoprox::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const zoprox::InvalidArgument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }

  try {
    const zoprox::BenchmarkSummary summary = zoprox::run_benchmark(spec);
    for (const auto& r : summary.runs) {
      std::cout << r.algo << '-' << r.estimator << "  objective " << r.final_objective
                << "  queries " << r.total_queries << (r.truncated ? "  (budget reached)" : "")
                << '\n';
    }
    std::cout << "wrote " << (spec.output_dir / "summary.json").string() << '\n';
  } catch (const zoprox::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}

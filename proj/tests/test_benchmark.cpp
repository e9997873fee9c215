#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "support.hpp"
#include "zoprox/benchmark.hpp"
#include "zoprox/error.hpp"

using namespace zoprox;

namespace {

const std::filesystem::path kFixtures = ZOPROX_FIXTURES;

RunSpec parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunSpec small_spec(const std::filesystem::path& out) {
  RunSpec spec = parse(
      "synthetic = classification:40x6\n"
      "solver = gd:coo\n"
      "solver = rspgf:gau\n"
      "solver = svrg:coo\n"
      "solver = saga:gau\n"
      "iters = 12\n"
      "batch = 4\n"
      "eta = 0.5\n"
      "grad_map_every = 3\n");
  spec.output_dir = out;
  return spec;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

struct CliResult {
  int code;
  std::string out;
};

CliResult cli(const std::string& args, const ref::TempDir& scratch) {
  const auto log = scratch / "cli.log";
  const std::string cmd = std::string(ZOPROX_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ref::read_file(log)};
}

// b = ceil(n^(2/3)) and m = ceil(n^(1/3)) by direct integer search.
std::size_t smallest_root(std::size_t n, int power_num) {
  std::size_t r = 1;
  while (true) {
    const long double v = std::pow(static_cast<long double>(r), 3.0L / power_num);
    if (v >= static_cast<long double>(n)) return r;
    ++r;
  }
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndSolvers) {
  const RunSpec spec = parse(
      "# sweep\n"
      "dataset = data/a9a.libsvm   # trailing comment\n"
      "\n"
      "solver = svrg:coo\n"
      "solver = RSPGF : gau\n"
      "lambda1 = 1e-4\n"
      "grad-map-every = 5\n"
      "budget = 2000000\n"
      "recipe = true\n"
      "seed = 9\n");
  EXPECT_EQ(spec.problem.dataset, std::filesystem::path("data/a9a.libsvm"));
  ASSERT_EQ(spec.solvers.size(), 2u);
  EXPECT_EQ(spec.solvers[0].algorithm, Algorithm::ProxSVRG);
  EXPECT_EQ(spec.solvers[0].estimator, EstimatorKind::CooSGE);
  EXPECT_EQ(spec.solvers[1].algorithm, Algorithm::RSPGF);
  EXPECT_EQ(spec.solvers[1].estimator, EstimatorKind::GauSGE);
  EXPECT_EQ(spec.problem.lambda1, 1e-4);
  EXPECT_EQ(spec.problem.lambda2, 1e-5);
  EXPECT_EQ(spec.grad_map_every, 5u);
  EXPECT_EQ(spec.budget, std::optional<std::uint64_t>(2000000));
  EXPECT_TRUE(spec.recipe);
  EXPECT_EQ(spec.seed, 9u);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse("colour = blue\n"), ConfigError);
  EXPECT_THROW(parse("eta = -1\n"), ConfigError);
  EXPECT_THROW(parse("batch = 0\n"), ConfigError);
  EXPECT_THROW(parse("split = 1\n"), ConfigError);
  EXPECT_THROW(parse("synthetic = classification:10\n"), ConfigError);
  EXPECT_THROW(parse("solver = svrg\n"), ConfigError);
  EXPECT_THROW(parse("solver = adam:coo\n"), ConfigError);
  EXPECT_THROW(parse("seed = many\n"), ConfigError);
  try {
    parse("seed = 1\n\njust words\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("config line 3"), std::string::npos);
  }
  try {
    parse("seed = 1\nbogus = 2\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("config line 2"), std::string::npos);
  }
}

TEST(Config, ExactlyOneProblemSource) {
  ProblemSpec none;
  EXPECT_THROW(load_problem(none, 1), ConfigError);
  ProblemSpec both;
  both.synthetic = "quadratic:5x2";
  both.dataset = kFixtures / "handcrafted.libsvm";
  EXPECT_THROW(load_problem(both, 1), ConfigError);
}

TEST(Resolve, EveryEntryBecomesComplete) {
  RunSpec spec = parse(
      "synthetic = classification:64x8\n"
      "solver = gd:coo\nsolver = rspgf:gau\nsolver = svrg:coo\nsolver = saga:gau\n"
      "budget = 100000\n");
  const BenchmarkProblem problem = load_problem(spec.problem, spec.seed);
  const auto runs = resolve_runs(spec, problem);
  ASSERT_EQ(runs.size(), 4u);
  EXPECT_EQ(runs[0].label, "zo-proxgd-coosge");
  EXPECT_EQ(runs[2].label, "zo-proxsvrg-coosge");
  for (const ResolvedRun& r : runs) {
    const Recipe recipe = recipe_hyperparams(64, 8, problem.lipschitz, r.config.estimator.kind,
                                             r.algorithm);
    EXPECT_GT(r.config.eta, 0.0);
    EXPECT_DOUBLE_EQ(r.config.eta, recipe.eta);
    EXPECT_GE(r.config.batch, 1u);
    EXPECT_GE(r.config.inner, 1u);
    EXPECT_GE(r.config.total_iters, 1u);
    EXPECT_GE(r.config.epochs, 1u);
    EXPECT_EQ(r.config.seed, spec.seed);
    EXPECT_EQ(r.config.estimator.mu.kind, SmoothingSchedule::default_for(r.config.estimator.kind).kind);
  }
  EXPECT_EQ(runs[0].config.batch, 64u);
  EXPECT_EQ(runs[1].config.batch, 20u);
  EXPECT_EQ(runs[2].config.inner, 4u);

  spec.recipe = true;
  EXPECT_EQ(resolve_runs(spec, problem)[1].config.batch, 16u);
  spec.eta = 0.3;
  spec.batch = 100;
  const auto overridden = resolve_runs(spec, problem);
  EXPECT_EQ(overridden[1].config.eta, 0.3);
  EXPECT_EQ(overridden[1].config.batch, 64u);   // clamped without replacement
  EXPECT_EQ(overridden[3].config.batch, 100u);  // SAGA samples with replacement

  spec.budget.reset();
  EXPECT_THROW(resolve_runs(spec, problem), ConfigError);
}

TEST(Benchmark, EmptySolverListWritesEmptySummary) {
  ref::TempDir dir("bench-empty");
  RunSpec spec;
  spec.output_dir = dir / "out";
  const BenchmarkSummary s = run_benchmark(spec);
  EXPECT_TRUE(s.runs.empty());
  const auto doc = nlohmann::json::parse(ref::read_file(dir / "out" / "summary.json"));
  EXPECT_TRUE(doc.at("runs").is_array());
  EXPECT_TRUE(doc.at("runs").empty());
}

TEST(Benchmark, DeterministicCsv) {
  ref::TempDir dir("bench-det");
  RunSpec a = small_spec(dir / "a");
  RunSpec b = small_spec(dir / "b");
  b.jobs = 3;
  run_benchmark(a);
  run_benchmark(b);
  for (const char* name : {"zo-proxgd-coosge.csv", "rspgf-gausge.csv", "zo-proxsvrg-coosge.csv",
                           "zo-proxsaga-gausge.csv"}) {
    const std::string first = ref::read_file(dir / "a" / name);
    ASSERT_FALSE(first.empty()) << name;
    EXPECT_EQ(first, ref::read_file(dir / "b" / name)) << name;
  }
}

TEST(Benchmark, CsvSchema) {
  ref::TempDir dir("bench-csv");
  run_benchmark(small_spec(dir / "out"));
  const auto rows = lines(ref::read_file(dir / "out" / "zo-proxsvrg-coosge.csv"));
  ASSERT_EQ(rows.size(), 14u);  // header, iteration 0, 12 steps
  EXPECT_EQ(rows[0], "iter,epoch,objective,test_loss,queries,grad_map_sq,elapsed_ns");
  EXPECT_EQ(rows[0], kTraceCsvHeader);
  for (const std::string& row : rows) {
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 6) << row;
  }
  EXPECT_EQ(rows[1].substr(0, 2), "0,");
  // grad_map_sq on iterations 0, 3, 6, ...; elapsed_ns is 0 without timing.
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const bool reported = (k - 1) % 3 == 0;
    const auto last_comma = rows[k].rfind(',');
    const auto prev_comma = rows[k].rfind(',', last_comma - 1);
    EXPECT_EQ(prev_comma + 1 != last_comma, reported) << rows[k];
    EXPECT_EQ(rows[k].substr(last_comma + 1), "0");
  }
}

TEST(Benchmark, SharedStartAndSummary) {
  ref::TempDir dir("bench-summary");
  const BenchmarkSummary s = run_benchmark(small_spec(dir / "out"));
  ASSERT_EQ(s.runs.size(), 4u);
  for (const RunSummary& r : s.runs) {
    EXPECT_EQ(r.initial_objective, s.runs[0].initial_objective);
    EXPECT_TRUE(r.final_test_loss.has_value());
    EXPECT_EQ(r.iterations, 12u);
    EXPECT_FALSE(r.truncated);
  }
  const auto doc = nlohmann::json::parse(ref::read_file(dir / "out" / "summary.json"));
  ASSERT_EQ(doc["runs"].size(), 4u);
  for (const char* key : {"algo", "estimator", "b", "eta", "mu_schedule", "final_objective",
                          "final_test_loss", "total_queries", "wall_ns"}) {
    EXPECT_TRUE(doc["runs"][0].contains(key)) << key;
  }
  EXPECT_EQ(doc["runs"][2]["algo"], "ZO-ProxSVRG");
  EXPECT_EQ(doc["runs"][2]["total_queries"].get<std::uint64_t>(), s.runs[2].total_queries);
}

TEST(Benchmark, BudgetAccounting) {
  ref::TempDir dir("bench-budget");
  RunSpec spec = parse(
      "synthetic = classification:50x5\n"
      "solver = rspgf:coo\nsolver = svrg:coo\nsolver = saga:coo\nsolver = gd:gau\n"
      "budget = 7777\neta = 0.1\nbatch = 3\n");
  spec.output_dir = dir / "out";
  const BenchmarkSummary s = run_benchmark(spec);
  for (const RunSummary& r : s.runs) {
    EXPECT_LE(r.total_queries, 7777u) << r.algo;
    EXPECT_TRUE(r.truncated) << r.algo;
    EXPECT_GT(r.total_queries, 0u) << r.algo;
  }
  // RSPGF spends 2 d b = 30 queries per step, so it stops within one step of the budget.
  EXPECT_GT(s.runs[0].total_queries, 7777u - 30u);
}

TEST(Benchmark, UnwritableOutput) {
  ref::TempDir dir("bench-io");
  ref::write_file(dir / "file", "x");
  RunSpec spec = small_spec(dir / "file" / "sub");
  EXPECT_THROW(run_benchmark(spec), IOError);
}

TEST(Benchmark, SyntheticKinds) {
  ref::TempDir dir("bench-kinds");
  for (const char* kind : {"quadratic:20x4", "logsumexp:20x4"}) {
    RunSpec spec = parse(std::string("synthetic = ") + kind + "\nsolver = svrg:coo\niters = 6\n");
    spec.output_dir = dir / "out";
    const BenchmarkSummary s = run_benchmark(spec);
    ASSERT_EQ(s.runs.size(), 1u);
    EXPECT_FALSE(s.runs[0].final_test_loss.has_value());
    EXPECT_LT(s.runs[0].final_objective, s.runs[0].initial_objective) << kind;
  }
}

TEST(Benchmark, DatasetRun) {
  ref::TempDir dir("bench-data");
  RunSpec spec = parse("solver = saga:coo\niters = 5\nbatch = 2\n");
  spec.problem.dataset = kFixtures / "handcrafted.libsvm";
  spec.output_dir = dir / "out";
  const BenchmarkSummary s = run_benchmark(spec);
  ASSERT_EQ(s.runs.size(), 1u);
  EXPECT_TRUE(s.runs[0].final_test_loss.has_value());
  // 2 of the 4 rows train: one full table fill (2 d n) plus 2 d b per step, d = 7.
  EXPECT_EQ(s.runs[0].total_queries, 2u * 7 * 2 + 5u * 2 * 7 * 2);
}

TEST(Benchmark, AttackRunThroughScorerProcess) {
  ref::TempDir dir("bench-attack");
  RunSpec spec = parse("solver = rspgf:gau\niters = 4\nbatch = 2\nlambda1 = 0.01\n");
  spec.problem.scorer = "python3 " + (kFixtures / "softmax_scorer.py").string();
  spec.problem.attack_examples = kFixtures / "attack_examples.libsvm";
  spec.output_dir = dir / "out";
  const BenchmarkProblem problem = load_problem(spec.problem, spec.seed);
  EXPECT_TRUE(problem.attack);
  EXPECT_EQ(resolve_runs(spec, problem)[0].config.eta, 1.0 / 3.0);
  const BenchmarkSummary s = run_benchmark(spec);
  EXPECT_EQ(s.runs[0].iterations, 4u);
  EXPECT_GE(s.runs[0].final_objective, 0.0);
}

TEST(Recipe, TableExamples) {
  const std::string table = print_recipe({1000, 100, 1.0, Algorithm::ProxSVRG, EstimatorKind::CooSGE});
  const auto rows = lines(table);
  EXPECT_NE(std::find(rows.begin(), rows.end(), "b           100"), rows.end()) << table;
  EXPECT_NE(std::find(rows.begin(), rows.end(), "m           10"), rows.end()) << table;
  EXPECT_NE(std::find(rows.begin(), rows.end(), "rho         0.25"), rows.end()) << table;
  EXPECT_NE(std::find(rows.begin(), rows.end(), "eta         0.0025"), rows.end()) << table;

  const auto single = lines(print_recipe({1, 5, 2.0, Algorithm::ProxSVRG, EstimatorKind::GauSGE}));
  EXPECT_NE(std::find(single.begin(), single.end(), "b           1"), single.end());
  EXPECT_NE(std::find(single.begin(), single.end(), "m           1"), single.end());
}

TEST(Recipe, LargeDatasetMatchesRederivation) {
  const std::size_t n = 64700;
  const std::size_t d = 300;
  const double L = 114.0 / 4.0;
  const Recipe r = recipe_hyperparams(n, d, L, EstimatorKind::CooSGE, Algorithm::ProxSVRG);
  EXPECT_EQ(r.batch, smallest_root(n, 2));
  EXPECT_EQ(r.inner, smallest_root(n, 1));
  EXPECT_EQ(r.batch, 1612u);
  EXPECT_EQ(r.inner, 41u);
  EXPECT_DOUBLE_EQ(r.eta, 0.25 / (d * L));
  const auto saga = recipe_hyperparams(n, d, L, EstimatorKind::GauSGE, Algorithm::ProxSAGA);
  EXPECT_EQ(saga.batch, 1612u);
  EXPECT_EQ(saga.inner, 1u);
  EXPECT_DOUBLE_EQ(saga.eta, (1.0 / 12.0) / L);
}

TEST(Benchmark, ClassificationOrderingAtFixedBudget) {
  ref::TempDir dir("bench-order");
  RunSpec spec = parse(
      "synthetic = classification:500x50\n"
      "solver = rspgf:gau\n"
      "solver = svrg:coo\nsolver = svrg:gau\n"
      "solver = saga:coo\nsolver = saga:gau\n"
      "batch = 20\neta = 32\nbudget = 2000000\ngrad_map_every = 0\nseed = 1\n");
  spec.output_dir = dir / "out";
  const BenchmarkSummary s = run_benchmark(spec);
  ASSERT_EQ(s.runs.size(), 5u);
  const double rspgf = s.runs[0].final_objective;
  EXPECT_LT(s.runs[1].final_objective, rspgf);
  EXPECT_LT(s.runs[3].final_objective, rspgf);
  EXPECT_LE(s.runs[1].final_objective, s.runs[2].final_objective);
  EXPECT_LE(s.runs[3].final_objective, s.runs[4].final_objective);
  for (const RunSummary& r : s.runs) EXPECT_LE(r.total_queries, 2000000u);
}

TEST(Cli, ExitCodes) {
  ref::TempDir dir("cli");
  const std::string out = (dir / "out").string();

  auto ok = cli("recipe --n 1000 --d 100 --L 1", dir);
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("b           100"), std::string::npos) << ok.out;

  ok = cli("recipe --dataset " + (kFixtures / "handcrafted.libsvm").string(), dir);
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("n           4"), std::string::npos) << ok.out;

  ok = cli("run --synthetic quadratic:10x3 --algo gd,svrg --estimator coo,gau --iters 3 --out " +
               out,
           dir);
  EXPECT_EQ(ok.code, 0) << ok.out;
  for (const char* f : {"zo-proxgd-coosge.csv", "zo-proxgd-gausge.csv", "zo-proxsvrg-coosge.csv",
                        "zo-proxsvrg-gausge.csv", "summary.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / f)) << f;
  }

  ok = cli("run --synthetic quadratic:10x3 --iters 1 --out " + (dir / "empty").string(), dir);
  EXPECT_EQ(ok.code, 0) << ok.out;

  ref::write_file(dir / "bad.cfg", "synthetic = quadratic:10x3\nflavour = sour\n");
  auto bad = cli("run --config " + (dir / "bad.cfg").string(), dir);
  EXPECT_EQ(bad.code, 1) << bad.out;
  EXPECT_NE(bad.out.find("config line 2"), std::string::npos) << bad.out;

  EXPECT_EQ(cli("run --no-such-flag", dir).code, 1);
  EXPECT_EQ(cli("", dir).code, 1);
  EXPECT_EQ(cli("run --synthetic quadratic:10x3 --algo sgdx --iters 2 --out " + out, dir).code, 1);
  EXPECT_EQ(cli("run --synthetic quadratic:10x3 --algo svrg --out " + out, dir).code, 1);
  EXPECT_EQ(cli("run --eta -2 --algo svrg --iters 2", dir).code, 1);

  const auto missing = cli("run --dataset " + (dir / "missing.libsvm").string() +
                               " --algo svrg --iters 2 --out " + out,
                           dir);
  EXPECT_EQ(missing.code, 2) << missing.out;
  ref::write_file(dir / "blocker", "x");
  EXPECT_EQ(cli("run --synthetic quadratic:10x3 --algo svrg --iters 2 --out " +
                    (dir / "blocker" / "sub").string(),
                dir)
                .code,
            2);
}

#include "zoprox/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "zoprox/data.hpp"
#include "zoprox/error.hpp"

namespace zoprox {

namespace {

constexpr std::size_t kDefaultBatch = 20;
constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();
constexpr std::uint64_t kInitialPointStream = 0x7830;
constexpr std::uint64_t kSyntheticStream = 0x5379;
constexpr std::uint64_t kSplitStream = 0x5370;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const std::string v = trim(value);
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("invalid value '" + value + "' for " + key);
  }
  return out;
}

double parse_positive(const std::string& key, const std::string& value) {
  const double v = parse_number<double>(key, value);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key + " must be positive");
  return v;
}

double parse_nonneg(const std::string& key, const std::string& value) {
  const double v = parse_number<double>(key, value);
  if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(key + " must be non-negative");
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  const auto v = parse_number<std::size_t>(key, value);
  if (v == 0) throw ConfigError(key + " must be >= 1");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v.empty() || v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("invalid boolean '" + value + "' for " + key);
}

SolverEntry parse_solver(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("solver entries look like algo:estimator, got '" + text + "'");
  }
  SolverEntry e;
  e.algorithm = algorithm_from_string(trim(text.substr(0, colon)));
  e.estimator = estimator_from_string(trim(text.substr(colon + 1)));
  return e;
}

std::string slug(const std::string& s) {
  std::string out;
  for (char ch : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

struct SyntheticShape {
  std::string kind;
  std::size_t n;
  std::size_t dim;
};

SyntheticShape parse_synthetic(const std::string& text) {
  const auto colon = text.find(':');
  const auto x = text.find('x', colon == std::string::npos ? 0 : colon);
  if (colon == std::string::npos || x == std::string::npos) {
    throw ConfigError("synthetic problems look like kind:NxD, got '" + text + "'");
  }
  SyntheticShape s;
  s.kind = slug(trim(text.substr(0, colon)));
  s.n = parse_count("synthetic n", text.substr(colon + 1, x - colon - 1));
  s.dim = parse_count("synthetic d", text.substr(x + 1));
  return s;
}

void normalize_rows(Dataset& data) {
  for (Row& r : data.rows) {
    double sq = 0.0;
    for (const Feature& f : r.features) sq += f.value * f.value;
    if (sq > 0.0) {
      const double inv = 1.0 / std::sqrt(sq);
      for (Feature& f : r.features) f.value *= inv;
    }
  }
}

BenchmarkProblem classification_problem(Dataset train, Dataset test, const ProblemSpec& spec,
                                        bool analytic) {
  if (spec.normalize) {
    normalize_rows(train);
    normalize_rows(test);
  }
  auto train_ptr = std::make_shared<const Dataset>(std::move(train));
  auto test_ptr = std::make_shared<const Dataset>(std::move(test));
  auto oracle = std::make_shared<const SigmoidLossOracle>(train_ptr);
  BenchmarkProblem p;
  p.oracle = oracle;
  p.reg = Regularizer::elastic_net(spec.lambda1, spec.lambda2);
  p.lipschitz = oracle->lipschitz_bound();
  p.test_loss = [test_ptr](const Vector& x) { return test_loss(*test_ptr, x); };
  if (analytic) p.true_gradient = [oracle](const Vector& x) { return oracle->full_gradient(x); };
  std::ostringstream os;
  os << "sigmoid-loss classification, n=" << oracle->size() << " d=" << oracle->dimension()
     << " test=" << test_ptr->size();
  p.description = os.str();
  return p;
}

}  // namespace

void apply_setting(RunSpec& spec, const std::string& raw_key, const std::string& value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string v = trim(value);
  if (key == "dataset") {
    spec.problem.dataset = v;
  } else if (key == "synthetic") {
    parse_synthetic(v);
    spec.problem.synthetic = v;
  } else if (key == "scorer") {
    spec.problem.scorer = v;
  } else if (key == "attack_examples") {
    spec.problem.attack_examples = v;
  } else if (key == "split") {
    const double f = parse_number<double>(key, v);
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("split must lie in (0, 1)");
    spec.problem.split = f;
  } else if (key == "lambda1") {
    spec.problem.lambda1 = parse_nonneg(key, v);
  } else if (key == "lambda2") {
    spec.problem.lambda2 = parse_nonneg(key, v);
  } else if (key == "normalize") {
    spec.problem.normalize = parse_bool(key, v);
  } else if (key == "solver") {
    spec.solvers.push_back(parse_solver(v));
  } else if (key == "eta") {
    spec.eta = parse_positive(key, v);
  } else if (key == "batch") {
    spec.batch = parse_count(key, v);
  } else if (key == "epochs") {
    spec.epochs = parse_count(key, v);
  } else if (key == "inner") {
    spec.inner = parse_count(key, v);
  } else if (key == "iters") {
    spec.iters = parse_count(key, v);
  } else if (key == "budget") {
    spec.budget = parse_number<std::uint64_t>(key, v);
  } else if (key == "seed") {
    spec.seed = parse_number<std::uint64_t>(key, v);
  } else if (key == "out") {
    spec.output_dir = v;
  } else if (key == "recipe") {
    spec.recipe = parse_bool(key, v);
  } else if (key == "lipschitz") {
    spec.lipschitz = parse_positive(key, v);
  } else if (key == "grad_map_every") {
    spec.grad_map_every = parse_number<std::size_t>(key, v);
  } else if (key == "timing") {
    spec.timing = parse_bool(key, v);
  } else if (key == "jobs") {
    spec.jobs = parse_count(key, v);
  } else {
    throw ConfigError("unknown setting '" + raw_key + "'");
  }
}

RunSpec parse_config(std::istream& in) {
  RunSpec spec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(spec, line.substr(0, eq), line.substr(eq + 1));
    } catch (Error& e) {
      e.add_context("config line " + std::to_string(line_no));
      throw;
    }
  }
  return spec;
}

RunSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

BenchmarkProblem load_problem(const ProblemSpec& spec, std::uint64_t seed) {
  const int sources = static_cast<int>(spec.dataset.has_value()) +
                      static_cast<int>(spec.synthetic.has_value()) +
                      static_cast<int>(spec.scorer.has_value() || spec.attack_examples.has_value());
  if (sources != 1) {
    throw ConfigError("choose exactly one problem: dataset, synthetic, or scorer + attack_examples");
  }

  if (spec.dataset) {
    Dataset all = load_libsvm(*spec.dataset);
    auto [train, test] = split(all, spec.split, RandomSource(seed).split(kSplitStream).next_u64());
    return classification_problem(std::move(train), std::move(test), spec, false);
  }

  if (spec.synthetic) {
    const SyntheticShape shape = parse_synthetic(*spec.synthetic);
    const std::uint64_t data_seed = RandomSource(seed).split(kSyntheticStream).next_u64();
    BenchmarkProblem p;
    p.reg = Regularizer::elastic_net(spec.lambda1, spec.lambda2);
    if (shape.kind == "classification") {
      // Train and test halves drawn from one planted model.
      Dataset all = make_classification_data(2 * shape.n, shape.dim, data_seed);
      Dataset train, test;
      train.dim = test.dim = all.dim;
      train.rows.assign(all.rows.begin(), all.rows.begin() + static_cast<long>(shape.n));
      test.rows.assign(all.rows.begin() + static_cast<long>(shape.n), all.rows.end());
      return classification_problem(std::move(train), std::move(test), spec, true);
    }
    std::shared_ptr<const SyntheticProblem> problem;
    if (shape.kind == "quadratic") {
      problem = std::make_shared<const QuadraticProblem>(
          QuadraticProblem::random(shape.n, shape.dim, data_seed));
    } else if (shape.kind == "logsumexp") {
      problem = std::make_shared<const LogSumExpProblem>(
          LogSumExpProblem::random(shape.n, shape.dim, 5, data_seed));
    } else {
      throw ConfigError("unknown synthetic kind '" + shape.kind +
                        "' (expected classification, quadratic or logsumexp)");
    }
    p.oracle = problem;
    p.lipschitz = problem->lipschitz();
    p.true_gradient = [problem](const Vector& x) { return problem->full_gradient(x); };
    p.description = shape.kind + " synthetic, n=" + std::to_string(shape.n) +
                    " d=" + std::to_string(shape.dim);
    return p;
  }

  if (!spec.scorer || !spec.attack_examples) {
    throw ConfigError("attack mode needs both scorer and attack_examples");
  }
  ParseOptions raw;
  raw.binary_labels = false;
  const Dataset examples = load_libsvm(*spec.attack_examples, raw);
  if (examples.size() == 0) throw EmptyDataset("attack example file is empty");
  std::vector<Vector> points;
  std::vector<std::size_t> labels;
  for (const Row& r : examples.rows) {
    if (r.label < 0 || r.label != std::floor(r.label)) {
      throw ConfigError("attack example labels must be class indices 0..K-1");
    }
    Vector a = Vector::Zero(static_cast<Eigen::Index>(examples.dim));
    for (const Feature& f : r.features) a[f.index - 1] = f.value;
    points.push_back(std::move(a));
    labels.push_back(static_cast<std::size_t>(r.label));
  }
  auto scorer = std::make_shared<const ProcessScorer>(*spec.scorer);
  AttackObjective objective = attack_objective(scorer, std::move(points), std::move(labels),
                                               spec.lambda1, spec.lambda2);
  BenchmarkProblem p;
  p.oracle = objective.oracle;
  p.reg = objective.reg;
  p.attack = true;
  p.description = "black-box attack, n=" + std::to_string(examples.size()) +
                  " d=" + std::to_string(examples.dim);
  return p;
}

std::vector<ResolvedRun> resolve_runs(const RunSpec& spec, const BenchmarkProblem& problem) {
  const std::size_t n = problem.oracle->size();
  const std::size_t d = problem.oracle->dimension();
  const double lipschitz = spec.lipschitz.value_or(problem.lipschitz);
  std::vector<ResolvedRun> out;
  for (const SolverEntry& e : spec.solvers) {
    const Recipe recipe = recipe_hyperparams(n, d, lipschitz, e.estimator, e.algorithm);
    ResolvedRun run{e.algorithm, {}, slug(to_string(e.algorithm) + "-" + to_string(e.estimator))};
    SolverConfig& cfg = run.config;
    cfg.seed = spec.seed;
    cfg.estimator.kind = e.estimator;
    cfg.estimator.mu = SmoothingSchedule::default_for(e.estimator);

    if (auto eta = e.eta ? e.eta : spec.eta) {
      cfg.eta = *eta;
    } else if (problem.attack) {
      cfg.eta = 1.0 / static_cast<double>(d);
    } else {
      cfg.eta = recipe.eta;
    }

    if (e.algorithm == Algorithm::ProxGD) {
      cfg.batch = n;
    } else if (auto b = e.batch ? e.batch : spec.batch) {
      cfg.batch = *b;
    } else {
      cfg.batch = spec.recipe ? recipe.batch : kDefaultBatch;
    }
    if (e.algorithm != Algorithm::ProxSAGA) cfg.batch = std::min(cfg.batch, n);
    cfg.inner = (e.inner ? e.inner : spec.inner).value_or(recipe.inner);

    const auto iters = e.iters ? e.iters : spec.iters;
    const auto epochs = e.epochs ? e.epochs : spec.epochs;
    if (!iters && !epochs && !spec.budget) {
      throw ConfigError("set iters, epochs or budget for " + to_string(e.algorithm));
    }
    if (e.algorithm == Algorithm::ProxSVRG) {
      if (epochs) {
        cfg.epochs = *epochs;
      } else if (iters) {
        cfg.epochs = (*iters + cfg.inner - 1) / cfg.inner;
      } else {
        cfg.epochs = kUnbounded / cfg.inner;
      }
    } else {
      if (iters) {
        cfg.total_iters = *iters;
      } else if (epochs) {
        // An "epoch" for the single-loop solvers is n / b iterations.
        cfg.total_iters = *epochs * std::max<std::size_t>(1, n / cfg.batch);
      } else {
        cfg.total_iters = kUnbounded;
      }
    }
    out.push_back(std::move(run));
  }
  return out;
}

Vector initial_point(std::size_t dim, std::uint64_t seed) {
  RandomSource rng = RandomSource(seed).split(kInitialPointStream);
  return rng.gaussian_vector(dim);
}

void write_trace_csv(std::ostream& out, const Trace& trace, bool timing) {
  out << kTraceCsvHeader << '\n';
  std::string line;
  auto emit = [&](const TraceRecord& r) {
    line.clear();
    line += std::to_string(r.iter);
    line += ',';
    if (r.epoch) line += std::to_string(*r.epoch);
    line += ',';
    append_number(line, r.objective);
    line += ',';
    if (r.test_loss) append_number(line, *r.test_loss);
    line += ',';
    line += std::to_string(r.queries);
    line += ',';
    if (r.grad_map_sq) append_number(line, *r.grad_map_sq);
    line += ',';
    line += std::to_string(timing ? r.elapsed_ns : 0);
    line += '\n';
    out << line;
  };
  emit(trace.initial);
  for (const TraceRecord& r : trace.records) emit(r);
}

std::string summary_json(const BenchmarkSummary& summary) {
  nlohmann::json runs = nlohmann::json::array();
  for (const RunSummary& r : summary.runs) {
    nlohmann::json j;
    j["algo"] = r.algo;
    j["estimator"] = r.estimator;
    j["b"] = r.b;
    j["eta"] = r.eta;
    j["mu_schedule"] = r.mu_schedule;
    j["final_objective"] = r.final_objective;
    j["final_test_loss"] = r.final_test_loss ? nlohmann::json(*r.final_test_loss) : nlohmann::json();
    j["total_queries"] = r.total_queries;
    j["wall_ns"] = r.wall_ns;
    j["iterations"] = r.iterations;
    j["truncated"] = r.truncated;
    j["initial_objective"] = r.initial_objective;
    runs.push_back(std::move(j));
  }
  nlohmann::json doc;
  doc["runs"] = std::move(runs);
  return doc.dump(2) + "\n";
}

BenchmarkSummary run_benchmark(const RunSpec& spec) {
  BenchmarkSummary summary;
  std::error_code ec;
  std::filesystem::create_directories(spec.output_dir, ec);
  if (ec || !std::filesystem::is_directory(spec.output_dir)) {
    throw IOError("cannot create output directory " + spec.output_dir.string());
  }
  const auto json_path = spec.output_dir / "summary.json";
  auto write_summary = [&] {
    std::ofstream json(json_path);
    if (!json) throw IOError("cannot write " + json_path.string());
    json << summary_json(summary);
  };
  if (spec.solvers.empty()) {
    write_summary();
    return summary;
  }

  const BenchmarkProblem problem = load_problem(spec.problem, spec.seed);
  const std::vector<ResolvedRun> runs = resolve_runs(spec, problem);
  const Vector x0 = initial_point(problem.oracle->dimension(), spec.seed);

  Reporting reporting;
  reporting.grad_map_every = spec.grad_map_every;
  reporting.true_gradient = problem.true_gradient;
  reporting.test_loss = problem.test_loss;
  reporting.query_budget = spec.budget;

  summary.runs.resize(runs.size());
  std::vector<std::exception_ptr> failures(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < runs.size(); k = next++) {
      try {
        const ResolvedRun& r = runs[k];
        auto solver = make_solver(r.algorithm, *problem.oracle, problem.reg, r.config, x0);
        const Trace trace = run(*solver, reporting);

        const auto path = spec.output_dir / (r.label + ".csv");
        std::ofstream csv(path);
        if (!csv) throw IOError("cannot write " + path.string());
        write_trace_csv(csv, trace, spec.timing);
        if (!csv) throw IOError("failed writing " + path.string());

        const TraceRecord& last = trace.records.empty() ? trace.initial : trace.records.back();
        RunSummary& s = summary.runs[k];
        s.algo = to_string(r.algorithm);
        s.estimator = to_string(r.config.estimator.kind);
        s.b = r.config.batch;
        s.eta = trace.eta;
        s.mu_schedule = r.config.estimator.mu.describe();
        s.final_objective = last.objective;
        s.final_test_loss = last.test_loss;
        s.total_queries = trace.total_queries;
        s.wall_ns = trace.wall_ns;
        s.iterations = trace.records.size();
        s.truncated = trace.truncated;
        s.initial_objective = trace.initial.objective;
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(spec.jobs, 1, runs.size());
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  write_summary();
  return summary;
}

std::string print_recipe(const RecipeQuery& q) {
  const Recipe r = recipe_hyperparams(q.n, q.dim, q.lipschitz, q.estimator, q.algorithm);
  std::ostringstream os;
  os << std::setprecision(6);
  os << "algorithm   " << to_string(q.algorithm) << '\n'
     << "estimator   " << to_string(q.estimator) << '\n'
     << "n           " << q.n << '\n'
     << "d           " << q.dim << '\n'
     << "L           " << q.lipschitz << '\n'
     << "b           " << r.batch << '\n'
     << "m           " << r.inner << '\n'
     << "rho         " << r.rho << '\n'
     << "eta         " << r.eta << '\n'
     << "mu(t)       " << SmoothingSchedule::default_for(q.estimator).describe() << '\n';
  return os.str();
}

}  // namespace zoprox

#include "zoprox/solvers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "zoprox/error.hpp"

namespace zoprox {

namespace {

// Sub-stream ids under the solver's seed.
constexpr std::uint64_t kBatchStream = 1;
constexpr std::uint64_t kDirectionStream = 2;
constexpr std::uint64_t kSnapshotStream = 3;
constexpr std::uint64_t kUnsharedStream = 4;
constexpr std::uint64_t kOutputStream = 5;

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

}  // namespace

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::ProxGD:
      return "ZO-ProxGD";
    case Algorithm::RSPGF:
      return "RSPGF";
    case Algorithm::ProxSVRG:
      return "ZO-ProxSVRG";
    case Algorithm::ProxSAGA:
      return "ZO-ProxSAGA";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
  const std::string s = lowercase(name);
  if (s == "gd" || s == "zo-proxgd" || s == "proxgd") return Algorithm::ProxGD;
  if (s == "rspgf" || s == "sgd" || s == "zo-proxsgd") return Algorithm::RSPGF;
  if (s == "svrg" || s == "zo-proxsvrg") return Algorithm::ProxSVRG;
  if (s == "saga" || s == "zo-proxsaga") return Algorithm::ProxSAGA;
  throw ConfigError("unknown algorithm '" + name + "' (expected gd, rspgf, svrg or saga)");
}

double SolverConfig::step_size(std::size_t dim) const {
  if (rho) {
    if (!(*rho > 0.0 && *rho < 0.5)) throw InvalidStep("rho must lie in (0, 1/2)");
    if (!lipschitz || !(*lipschitz > 0.0)) {
      throw InvalidStep("deriving eta from rho needs a positive Lipschitz constant");
    }
    return estimator.kind == EstimatorKind::CooSGE
               ? *rho / (static_cast<double>(dim) * *lipschitz)
               : *rho / *lipschitz;
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidStep("step size eta must be positive");
  return eta;
}

std::uint64_t ceil_cbrt(std::uint64_t value) {
  std::uint64_t r = static_cast<std::uint64_t>(std::cbrt(static_cast<double>(value)));
  auto cube = [](std::uint64_t v) {
    return static_cast<unsigned __int128>(v) * v * v;
  };
  while (r > 0 && cube(r - 1) >= value) --r;
  while (cube(r) < value) ++r;
  return r;
}

Recipe recipe_hyperparams(std::size_t n, std::size_t dim, double lipschitz, EstimatorKind kind,
                          Algorithm algorithm) {
  if (n == 0) throw InvalidArgument("recipe needs n >= 1");
  if (dim == 0) throw InvalidArgument("recipe needs d >= 1");
  if (!(lipschitz > 0.0)) throw InvalidArgument("recipe needs a positive Lipschitz constant");
  const bool coo = kind == EstimatorKind::CooSGE;
  Recipe r{};
  r.batch = static_cast<std::size_t>(ceil_cbrt(static_cast<std::uint64_t>(n) * n));
  r.inner = 1;
  switch (algorithm) {
    case Algorithm::ProxSVRG:
      r.inner = static_cast<std::size_t>(ceil_cbrt(n));
      r.rho = coo ? 1.0 / 4.0 : 1.0 / 6.0;
      break;
    case Algorithm::ProxSAGA:
      r.rho = coo ? 1.0 / 8.0 : 1.0 / 12.0;
      break;
    case Algorithm::ProxGD:
      r.batch = n;
      r.rho = coo ? 1.0 / 4.0 : 1.0 / 6.0;
      break;
    case Algorithm::RSPGF:
      r.rho = coo ? 1.0 / 4.0 : 1.0 / 6.0;
      break;
  }
  r.eta = coo ? r.rho / (static_cast<double>(dim) * lipschitz) : r.rho / lipschitz;
  return r;
}

Vector svrg_mixture_gradient(const CountingOracle& oracle, EstimatorKind kind,
                             std::span<const std::size_t> batch, const Vector& x,
                             const Vector& snapshot, const Vector& snapshot_grad, double mu,
                             const RandomSource& directions,
                             const RandomSource& snapshot_directions) {
  const Vector at_x = estimate_minibatch(oracle, kind, batch, x, mu, directions);
  const Vector at_snapshot =
      estimate_minibatch(oracle, kind, batch, snapshot, mu, snapshot_directions);
  return (at_x - at_snapshot) + snapshot_grad;
}

// ---------------------------------------------------------------------------

Solver::Solver(const ComponentOracle& oracle, const Regularizer& reg, const SolverConfig& cfg,
               Vector x0)
    : oracle_(&oracle),
      counted_(oracle, counter_),
      reg_(reg),
      cfg_(cfg),
      eta_(cfg.step_size(oracle.dimension())),
      streams_(cfg.seed),
      batch_rng_(streams_.split(kBatchStream)),
      output_rng_(streams_.split(kOutputStream)),
      x_(std::move(x0)) {
  if (oracle.size() == 0) throw InvalidArgument("oracle has no components");
  if (static_cast<std::size_t>(x_.size()) != oracle.dimension()) {
    throw DimensionError("x0 has dimension " + std::to_string(x_.size()) + ", oracle expects " +
                         std::to_string(oracle.dimension()));
  }
  require_finite(x_, "x0");
  output_x_ = x_;
  last_gradient_ = Vector::Zero(x_.size());
}

void Solver::step() {
  const std::size_t t = iteration_ + 1;
  try {
    const double mu = cfg_.estimator.mu.at(t, oracle_->dimension());
    Vector v = direction(t, mu);
    Vector next = reg_.prox(eta_, x_ - eta_ * v);
    require_finite(next, "iterate");
    last_gradient_ = std::move(v);
    x_ = std::move(next);
  } catch (Error& e) {
    e.add_context(to_string(algorithm()) + " iteration " + std::to_string(t));
    throw;
  }
  iteration_ = t;
  if (cfg_.output_policy == OutputPolicy::UniformRandomIterate) {
    // Reservoir of size one: after t steps each of x_1..x_t is held with probability 1/t.
    if (output_rng_.uniform_index(t) == 0) output_x_ = x_;
  }
}

const Vector& Solver::output() const {
  return cfg_.output_policy == OutputPolicy::LastIterate ? x_ : output_x_;
}

RandomSource Solver::step_directions(std::size_t t) const {
  return streams_.split(kDirectionStream).split(t);
}

RandomSource Solver::snapshot_directions(std::size_t tag) const {
  return streams_.split(kSnapshotStream).split(tag);
}

RandomSource Solver::unshared_directions(std::size_t t) const {
  return streams_.split(kUnsharedStream).split(t);
}

std::size_t Solver::component_cost() const {
  return queries_per_component(cfg_.estimator.kind, oracle_->dimension());
}

// ---------------------------------------------------------------------------

ProxGD::ProxGD(const ComponentOracle& oracle, const Regularizer& reg, const SolverConfig& cfg,
               Vector x0)
    : Solver(oracle, reg, cfg, std::move(x0)) {
  if (cfg.total_iters == 0) throw InvalidArgument("total_iters must be >= 1");
}

std::uint64_t ProxGD::next_step_cost() const { return component_cost() * oracle_->size(); }

Vector ProxGD::direction(std::size_t t, double mu) {
  return estimate_full(counted_, cfg_.estimator.kind, x_, mu, step_directions(t));
}

Rspgf::Rspgf(const ComponentOracle& oracle, const Regularizer& reg, const SolverConfig& cfg,
             Vector x0)
    : Solver(oracle, reg, cfg, std::move(x0)) {
  if (cfg.total_iters == 0) throw InvalidArgument("total_iters must be >= 1");
  if (cfg.batch == 0 || cfg.batch > oracle.size()) {
    throw InvalidBatch("RSPGF samples without replacement and needs 1 <= b <= n");
  }
}

std::uint64_t Rspgf::next_step_cost() const { return component_cost() * cfg_.batch; }

Vector Rspgf::direction(std::size_t t, double mu) {
  std::vector<std::size_t> batch = sample_minibatch(batch_rng_, oracle_->size(), cfg_.batch, false);
  // The batch is a set; ascending order makes b = n coincide with the full estimate.
  std::sort(batch.begin(), batch.end());
  return estimate_minibatch(counted_, cfg_.estimator.kind, batch, x_, mu, step_directions(t));
}

ProxSvrg::ProxSvrg(const ComponentOracle& oracle, const Regularizer& reg, const SolverConfig& cfg,
                   Vector x0)
    : Solver(oracle, reg, cfg, std::move(x0)) {
  if (cfg.epochs == 0 || cfg.inner == 0) throw InvalidArgument("epochs and inner must be >= 1");
  if (cfg.batch == 0 || cfg.batch > oracle.size()) {
    throw InvalidBatch("ZO-ProxSVRG samples without replacement and needs 1 <= b <= n");
  }
  snapshot_ = x_;
  snapshot_grad_ = Vector::Zero(x_.size());
}

std::size_t ProxSvrg::planned_iterations() const {
  if (cfg_.epochs > std::numeric_limits<std::size_t>::max() / cfg_.inner) {
    return std::numeric_limits<std::size_t>::max();
  }
  return cfg_.epochs * cfg_.inner;
}

std::uint64_t ProxSvrg::next_step_cost() const {
  const std::uint64_t per = component_cost();
  const std::uint64_t snapshot = inner_pos_ == 0 ? per * oracle_->size() : 0;
  return snapshot + 2 * per * cfg_.batch;
}

std::optional<std::size_t> ProxSvrg::epoch() const {
  if (iteration_ == 0) return std::nullopt;
  return epochs_started_;
}

Vector ProxSvrg::direction(std::size_t t, double mu) {
  const EstimatorKind kind = cfg_.estimator.kind;
  if (inner_pos_ == 0) {
    snapshot_ = x_;
    snapshot_grad_ = estimate_full(counted_, kind, snapshot_, mu,
                                   snapshot_directions(epochs_started_ + 1));
    ++epochs_started_;
  }
  std::vector<std::size_t> batch = sample_minibatch(batch_rng_, oracle_->size(), cfg_.batch, false);
  std::sort(batch.begin(), batch.end());
  const RandomSource dirs = step_directions(t);
  const RandomSource pair_dirs =
      cfg_.estimator.share_directions ? dirs : unshared_directions(t);
  Vector v = svrg_mixture_gradient(counted_, kind, batch, x_, snapshot_, snapshot_grad_, mu, dirs,
                                   pair_dirs);
  inner_pos_ = (inner_pos_ + 1) % cfg_.inner;
  return v;
}

ProxSaga::ProxSaga(const ComponentOracle& oracle, const Regularizer& reg, const SolverConfig& cfg,
                   Vector x0)
    : Solver(oracle, reg, cfg, std::move(x0)) {
  if (cfg.total_iters == 0) throw InvalidArgument("total_iters must be >= 1");
  if (cfg.batch == 0) throw InvalidBatch("mini-batch size must be >= 1");
  table_ = Table::Zero(static_cast<Eigen::Index>(oracle.size()),
                       static_cast<Eigen::Index>(oracle.dimension()));
  phi_ = Vector::Zero(x_.size());
}

std::uint64_t ProxSaga::next_step_cost() const {
  const std::uint64_t per = component_cost();
  return (initialized_ ? 0 : per * oracle_->size()) + per * cfg_.batch;
}

void ProxSaga::initialize(double mu) {
  std::vector<std::size_t> all(oracle_->size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const std::vector<Vector> rows =
      estimate_each(counted_, cfg_.estimator.kind, all, x_, mu, snapshot_directions(0));
  phi_.setZero();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table_.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    phi_ += rows[i];
  }
  phi_ /= static_cast<double>(rows.size());
  initialized_ = true;
}

Vector ProxSaga::direction(std::size_t t, double mu) {
  if (!initialized_) initialize(mu);
  const auto n = static_cast<double>(oracle_->size());
  last_batch_ = sample_minibatch(batch_rng_, oracle_->size(), cfg_.batch, true);
  const std::vector<Vector> fresh =
      estimate_each(counted_, cfg_.estimator.kind, last_batch_, x_, mu, step_directions(t));

  // Every occurrence reads the table as it stood before this step.
  std::vector<Vector> diffs;
  diffs.reserve(fresh.size());
  Vector v = Vector::Zero(x_.size());
  for (std::size_t k = 0; k < fresh.size(); ++k) {
    diffs.push_back(fresh[k] - table_.row(static_cast<Eigen::Index>(last_batch_[k])).transpose());
    v += diffs.back();
  }
  v = v / static_cast<double>(fresh.size()) + phi_;

  // Table writes in draw order; a repeated index sees the earlier write, so the last
  // occurrence wins and phi stays the row mean.
  std::vector<bool> written(oracle_->size(), false);
  for (std::size_t k = 0; k < fresh.size(); ++k) {
    const std::size_t i = last_batch_[k];
    const auto row = static_cast<Eigen::Index>(i);
    if (written[i]) {
      phi_ += (fresh[k] - table_.row(row).transpose()) / n;
    } else {
      phi_ += diffs[k] / n;
      written[i] = true;
    }
    table_.row(row) = fresh[k].transpose();
  }
  return v;
}

std::unique_ptr<Solver> make_solver(Algorithm algorithm, const ComponentOracle& oracle,
                                    const Regularizer& reg, const SolverConfig& cfg, Vector x0) {
  switch (algorithm) {
    case Algorithm::ProxGD:
      return std::make_unique<ProxGD>(oracle, reg, cfg, std::move(x0));
    case Algorithm::RSPGF:
      return std::make_unique<Rspgf>(oracle, reg, cfg, std::move(x0));
    case Algorithm::ProxSVRG:
      return std::make_unique<ProxSvrg>(oracle, reg, cfg, std::move(x0));
    case Algorithm::ProxSAGA:
      return std::make_unique<ProxSaga>(oracle, reg, cfg, std::move(x0));
  }
  throw InvalidArgument("unknown algorithm");
}

// ---------------------------------------------------------------------------

namespace {

class ReportContext {
 public:
  ReportContext(const Solver& solver, const Reporting& reporting)
      : solver_(solver), reporting_(reporting), counted_(solver.oracle(), counter_) {}

  TraceRecord record(std::size_t iter, std::uint64_t queries, std::int64_t elapsed_ns) {
    TraceRecord r;
    r.iter = iter;
    r.epoch = iter == 0 ? std::nullopt : solver_.epoch();
    r.queries = queries;
    r.elapsed_ns = elapsed_ns;
    const Vector& x = solver_.x();
    try {
      r.objective = full_function_value(counted_, solver_.regularizer(), x);
    } catch (Error& e) {
      e.add_context("objective at iteration " + std::to_string(iter));
      throw;
    }
    if (!std::isfinite(r.objective)) {
      throw NonFiniteValue("objective is not finite at iteration " + std::to_string(iter));
    }
    const std::size_t every = reporting_.grad_map_every;
    if (every > 0 && iter % every == 0) {
      const Vector grad = reporting_.true_gradient
                              ? reporting_.true_gradient(x)
                              : estimate_full(counted_, EstimatorKind::CooSGE, x, kReportMu,
                                              RandomSource(0));
      r.grad_map_sq = gradient_mapping(solver_.regularizer(), solver_.eta(), x, grad).squaredNorm();
    }
    if (reporting_.test_loss) r.test_loss = reporting_.test_loss(x);
    return r;
  }

  std::uint64_t queries() const { return counter_.total(); }

 private:
  const Solver& solver_;
  const Reporting& reporting_;
  QueryCounter counter_;
  CountingOracle counted_;
};

}  // namespace

Trace run(Solver& solver, const Reporting& reporting) {
  using Clock = std::chrono::steady_clock;
  const auto wall_start = Clock::now();
  ReportContext report(solver, reporting);

  Trace trace;
  trace.algorithm = solver.algorithm();
  trace.estimator = solver.config().estimator.kind;
  trace.eta = solver.eta();
  trace.initial = report.record(0, 0, 0);

  std::int64_t solver_ns = 0;
  const std::size_t planned = solver.planned_iterations();
  while (solver.iteration() < planned) {
    if (reporting.query_budget &&
        solver.queries() + solver.next_step_cost() > *reporting.query_budget) {
      trace.truncated = true;
      break;
    }
    const auto start = Clock::now();
    solver.step();
    solver_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
    trace.records.push_back(report.record(solver.iteration(), solver.queries(), solver_ns));
  }

  trace.final_x = solver.output();
  trace.last_x = solver.x();
  trace.total_queries = solver.queries();
  trace.reporting_queries = report.queries();
  trace.wall_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - wall_start).count();
  return trace;
}

Trace zo_prox_gd(const ComponentOracle& oracle, const Regularizer& reg, const Vector& x0,
                 const SolverConfig& cfg, const Reporting& reporting) {
  ProxGD solver(oracle, reg, cfg, x0);
  return run(solver, reporting);
}

Trace rspgf(const ComponentOracle& oracle, const Regularizer& reg, const Vector& x0,
            const SolverConfig& cfg, const Reporting& reporting) {
  Rspgf solver(oracle, reg, cfg, x0);
  return run(solver, reporting);
}

Trace zo_prox_svrg(const ComponentOracle& oracle, const Regularizer& reg, const Vector& x0,
                   const SolverConfig& cfg, const Reporting& reporting) {
  ProxSvrg solver(oracle, reg, cfg, x0);
  return run(solver, reporting);
}

Trace zo_prox_saga(const ComponentOracle& oracle, const Regularizer& reg, const Vector& x0,
                   const SolverConfig& cfg, const Reporting& reporting) {
  ProxSaga solver(oracle, reg, cfg, x0);
  return run(solver, reporting);
}

}  // namespace zoprox

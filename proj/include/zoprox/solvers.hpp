#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zoprox/core.hpp"
#include "zoprox/estimators.hpp"
#include "zoprox/prox.hpp"

namespace zoprox {

enum class Algorithm {
  ProxGD,    ///< full-estimate proximal descent
  RSPGF,     ///< mini-batch proximal stochastic descent (ZO-ProxSGD)
  ProxSVRG,  ///< snapshot variance reduction
  ProxSAGA,  ///< gradient-table variance reduction
};

std::string to_string(Algorithm algorithm);
/// Accepts gd, rspgf (or sgd), svrg, saga, case-insensitive.
Algorithm algorithm_from_string(const std::string& name);

enum class OutputPolicy {
  LastIterate,
  UniformRandomIterate,  ///< uniform over x_1..x_T, chosen by reservoir sampling
};

struct SolverConfig {
  double eta = 0.0;              ///< step size; ignored when rho is set
  std::size_t batch = 1;         ///< b
  std::size_t epochs = 1;        ///< S (SVRG)
  std::size_t inner = 1;         ///< m (SVRG)
  std::size_t total_iters = 1;   ///< T (GD, RSPGF, SAGA)
  GradientEstimatorConfig estimator;
  std::uint64_t seed = 0;
  OutputPolicy output_policy = OutputPolicy::LastIterate;
  std::optional<double> rho;        ///< derive eta = rho/(dL) (CooSGE) or rho/L (GauSGE)
  std::optional<double> lipschitz;  ///< L, required with rho

  /// Effective step size for a problem of dimension `dim`.
  double step_size(std::size_t dim) const;
};

/// Hyperparameters prescribed by the convergence analysis.
struct Recipe {
  std::size_t batch;  ///< ceil(n^(2/3)); n for ProxGD
  std::size_t inner;  ///< ceil(n^(1/3)) for ProxSVRG, otherwise 1
  double rho;
  double eta;
};

/// rho = 1/4 (SVRG, CooSGE), 1/6 (SVRG, GauSGE), 1/8 (SAGA, CooSGE), 1/12 (SAGA, GauSGE);
/// eta = rho/(dL) for CooSGE and rho/L for GauSGE. The baselines have no recipe of
/// their own and reuse the SVRG rho for the same estimator.
Recipe recipe_hyperparams(std::size_t n, std::size_t dim, double lipschitz, EstimatorKind kind,
                          Algorithm algorithm);

/// Smallest integer r with r^3 >= value, computed exactly.
std::uint64_t ceil_cbrt(std::uint64_t value);

/// SVRG correction: est_I(x) - est_I(snapshot) + snapshot_grad.
///
/// The two mini-batch estimates draw GauSGE directions from `directions` and
/// `snapshot_directions`; passing the same stream shares each direction across the pair,
/// in which case the correction vanishes exactly when x == snapshot.
Vector svrg_mixture_gradient(const CountingOracle& oracle, EstimatorKind kind,
                             std::span<const std::size_t> batch, const Vector& x,
                             const Vector& snapshot, const Vector& snapshot_grad, double mu,
                             const RandomSource& directions,
                             const RandomSource& snapshot_directions);

/// One solver as a step-at-a-time state machine. step() performs one iteration
/// (one inner iteration for SVRG); run() drives it and records a Trace.
class Solver {
 public:
  Solver(const ComponentOracle& oracle, const Regularizer& reg, const SolverConfig& cfg,
         Vector x0);
  virtual ~Solver() = default;

  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  virtual Algorithm algorithm() const = 0;
  /// T, or S * m for SVRG.
  virtual std::size_t planned_iterations() const = 0;
  /// Oracle queries the next step() will consume.
  virtual std::uint64_t next_step_cost() const = 0;
  /// 1-based epoch of the most recent step (SVRG only).
  virtual std::optional<std::size_t> epoch() const { return std::nullopt; }

  void step();

  std::size_t iteration() const { return iteration_; }
  const Vector& x() const { return x_; }
  /// Output iterate under the configured policy (x_0 before the first step).
  const Vector& output() const;
  /// The mixture gradient v used by the most recent step.
  const Vector& last_gradient() const { return last_gradient_; }
  std::uint64_t queries() const { return counter_.total(); }
  double eta() const { return eta_; }
  const SolverConfig& config() const { return cfg_; }
  const Regularizer& regularizer() const { return reg_; }
  const ComponentOracle& oracle() const { return *oracle_; }

 protected:
  /// Mixture gradient at x() for 1-based global iteration t with smoothing mu.
  virtual Vector direction(std::size_t t, double mu) = 0;

  /// Direction stream for iteration t (shared by every estimate of that step).
  RandomSource step_directions(std::size_t t) const;
  RandomSource snapshot_directions(std::size_t tag) const;
  RandomSource unshared_directions(std::size_t t) const;

  std::size_t component_cost() const;

  const ComponentOracle* oracle_;
  QueryCounter counter_;
  CountingOracle counted_;
  Regularizer reg_;
  SolverConfig cfg_;
  double eta_;
  RandomSource streams_;
  RandomSource batch_rng_;
  RandomSource output_rng_;
  Vector x_;
  Vector output_x_;
  Vector last_gradient_;
  std::size_t iteration_ = 0;
};

class ProxGD final : public Solver {
 public:
  ProxGD(const ComponentOracle& oracle, const Regularizer& reg, const SolverConfig& cfg,
         Vector x0);
  Algorithm algorithm() const override { return Algorithm::ProxGD; }
  std::size_t planned_iterations() const override { return cfg_.total_iters; }
  std::uint64_t next_step_cost() const override;

 protected:
  Vector direction(std::size_t t, double mu) override;
};

class Rspgf final : public Solver {
 public:
  Rspgf(const ComponentOracle& oracle, const Regularizer& reg, const SolverConfig& cfg,
        Vector x0);
  Algorithm algorithm() const override { return Algorithm::RSPGF; }
  std::size_t planned_iterations() const override { return cfg_.total_iters; }
  std::uint64_t next_step_cost() const override;

 protected:
  Vector direction(std::size_t t, double mu) override;
};

class ProxSvrg final : public Solver {
 public:
  ProxSvrg(const ComponentOracle& oracle, const Regularizer& reg, const SolverConfig& cfg,
           Vector x0);
  Algorithm algorithm() const override { return Algorithm::ProxSVRG; }
  std::size_t planned_iterations() const override;
  std::uint64_t next_step_cost() const override;
  std::optional<std::size_t> epoch() const override;

  const Vector& snapshot() const { return snapshot_; }
  const Vector& snapshot_gradient() const { return snapshot_grad_; }
  /// Inner position of the next step; 0 means the next step takes a snapshot.
  std::size_t inner_position() const { return inner_pos_; }

 protected:
  Vector direction(std::size_t t, double mu) override;

 private:
  Vector snapshot_;
  Vector snapshot_grad_;
  std::size_t inner_pos_ = 0;
  std::size_t epochs_started_ = 0;
};

class ProxSaga final : public Solver {
 public:
  using Table = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  ProxSaga(const ComponentOracle& oracle, const Regularizer& reg, const SolverConfig& cfg,
           Vector x0);
  Algorithm algorithm() const override { return Algorithm::ProxSAGA; }
  std::size_t planned_iterations() const override { return cfg_.total_iters; }
  std::uint64_t next_step_cost() const override;

  bool initialized() const { return initialized_; }
  /// Row i holds the stored estimate for component i (n x d).
  const Table& grad_table() const { return table_; }
  /// Running average of the table rows, maintained incrementally.
  const Vector& phi_hat() const { return phi_; }
  /// Indices drawn by the most recent step, in draw order.
  const std::vector<std::size_t>& last_batch() const { return last_batch_; }

 protected:
  Vector direction(std::size_t t, double mu) override;

 private:
  void initialize(double mu);

  Table table_;
  Vector phi_;
  bool initialized_ = false;
  std::vector<std::size_t> last_batch_;
};

std::unique_ptr<Solver> make_solver(Algorithm algorithm, const ComponentOracle& oracle,
                                    const Regularizer& reg, const SolverConfig& cfg, Vector x0);

// ---------------------------------------------------------------------------
// Traces

struct TraceRecord {
  std::size_t iter = 0;
  std::optional<std::size_t> epoch;
  double objective = 0.0;
  std::uint64_t queries = 0;
  std::optional<double> grad_map_sq;
  std::optional<double> test_loss;
  std::int64_t elapsed_ns = 0;
};

struct Trace {
  Algorithm algorithm = Algorithm::ProxGD;
  EstimatorKind estimator = EstimatorKind::CooSGE;
  double eta = 0.0;
  /// Iteration-0 row (x_0); queries and elapsed time are zero there.
  TraceRecord initial;
  std::vector<TraceRecord> records;
  Vector final_x;
  Vector last_x;
  std::uint64_t total_queries = 0;
  /// Queries spent on objective / gradient-mapping reporting, kept off the solver ledger.
  std::uint64_t reporting_queries = 0;
  bool truncated = false;
  std::int64_t wall_ns = 0;
};

/// Smoothing used for gradient-mapping reports when no analytic gradient is given.
inline constexpr double kReportMu = 1e-6;

struct Reporting {
  /// Compute ||g_eta||^2 on iterations divisible by this (and at iteration 0); 0 disables.
  std::size_t grad_map_every = 10;
  /// True full gradient of f, if known. Otherwise a full CooSGE estimate at kReportMu.
  std::function<Vector(const Vector&)> true_gradient;
  /// Held-out metric recorded alongside the objective.
  std::function<double(const Vector&)> test_loss;
  /// Stop before any step that would push solver queries past this.
  std::optional<std::uint64_t> query_budget;
};

Trace run(Solver& solver, const Reporting& reporting = {});

Trace zo_prox_gd(const ComponentOracle& oracle, const Regularizer& reg, const Vector& x0,
                 const SolverConfig& cfg, const Reporting& reporting = {});
Trace rspgf(const ComponentOracle& oracle, const Regularizer& reg, const Vector& x0,
            const SolverConfig& cfg, const Reporting& reporting = {});
Trace zo_prox_svrg(const ComponentOracle& oracle, const Regularizer& reg, const Vector& x0,
                   const SolverConfig& cfg, const Reporting& reporting = {});
Trace zo_prox_saga(const ComponentOracle& oracle, const Regularizer& reg, const Vector& x0,
                   const SolverConfig& cfg, const Reporting& reporting = {});

}  // namespace zoprox

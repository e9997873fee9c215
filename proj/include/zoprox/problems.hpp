#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "zoprox/core.hpp"
#include "zoprox/data.hpp"
#include "zoprox/prox.hpp"

namespace zoprox {

/// Binary classification data plus the regularizer of the composite objective.
struct ClassificationProblem {
  Dataset data;
  Regularizer reg = Regularizer::none();

  std::size_t size() const { return data.size(); }
  std::size_t dim() const { return data.dim; }
};

/// Exponent bound applied before exp() in the sigmoid loss.
inline constexpr double kSigmoidExponentClamp = 500.0;

/// 1 / (1 + exp(clamp(margin))) with margin = l * <a, x>.
double sigmoid_loss(double margin);

/// f_i(x) = 1 / (1 + exp(l_i <a_i, x>)); iterates only the non-zeros of a_i.
class SigmoidLossOracle final : public ComponentOracle {
 public:
  /// Throws EmptyDataset for no rows and DimensionError for labels outside {-1, +1}.
  explicit SigmoidLossOracle(std::shared_ptr<const Dataset> data);

  std::size_t size() const override { return data_->size(); }
  std::size_t dimension() const override { return data_->dim; }
  double eval(std::size_t i, const Vector& x) const override;

  /// l_i <a_i, x>
  double margin(std::size_t i, const Vector& x) const;
  /// Exact gradient of f_i (test and reporting use only; solvers never see it).
  Vector component_gradient(std::size_t i, const Vector& x) const;
  Vector full_gradient(const Vector& x) const;
  /// max_i ||a_i||^2 / 4, an upper bound on every component's smoothness constant.
  double lipschitz_bound() const;

  const Dataset& data() const { return *data_; }

 private:
  std::shared_ptr<const Dataset> data_;
};

SigmoidLossOracle sigmoid_loss_oracle(const ClassificationProblem& problem);

/// Mean sigmoid loss over `test` at x, without the regularizer.
double test_loss(const Dataset& test, const Vector& x);

// ---------------------------------------------------------------------------
// Attack objective

/// Black-box classifier returning K class scores for an input of dimension d.
class ClassScorer {
 public:
  virtual ~ClassScorer() = default;
  virtual std::vector<double> scores(const Vector& input) const = 0;
};

/// softmax(W z + c), a stand-in model for tests and demos.
class LinearSoftmaxScorer final : public ClassScorer {
 public:
  LinearSoftmaxScorer(Matrix weights, Vector bias);
  std::vector<double> scores(const Vector& input) const override;

 private:
  Matrix weights_;
  Vector bias_;
};

/// Talks to an external scorer process over stdin/stdout, one request per line:
/// the request is d whitespace-separated floats, the response K whitespace-separated
/// floats summing to 1 (within 1e-3). Calls are serialized.
class ProcessScorer final : public ClassScorer {
 public:
  /// Runs `command` through /bin/sh -c.
  explicit ProcessScorer(const std::string& command,
                         std::chrono::milliseconds timeout = std::chrono::seconds(10));
  ~ProcessScorer() override;

  ProcessScorer(const ProcessScorer&) = delete;
  ProcessScorer& operator=(const ProcessScorer&) = delete;

  /// Throws OracleUnavailable on timeout, process exit, or a malformed response.
  std::vector<double> scores(const Vector& input) const override;

 private:
  void shutdown() noexcept;

  std::chrono::milliseconds timeout_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  mutable std::string pending_;
  mutable std::mutex mutex_;
};

/// f_i(x) = max{F_{l_i}(a_i + x) - max_{j != l_i} F_j(a_i + x), 0}.
class AttackLossOracle final : public ComponentOracle {
 public:
  AttackLossOracle(std::shared_ptr<const ClassScorer> scorer, std::vector<Vector> examples,
                   std::vector<std::size_t> labels);

  std::size_t size() const override { return examples_.size(); }
  std::size_t dimension() const override { return dim_; }
  /// Throws OracleUnavailable carrying the example index when the scorer fails.
  double eval(std::size_t i, const Vector& x) const override;

 private:
  std::shared_ptr<const ClassScorer> scorer_;
  std::vector<Vector> examples_;
  std::vector<std::size_t> labels_;
  std::size_t dim_;
};

struct AttackObjective {
  std::shared_ptr<AttackLossOracle> oracle;
  Regularizer reg;
};

/// Universal perturbation objective over `examples` with an elastic-net penalty.
AttackObjective attack_objective(std::shared_ptr<const ClassScorer> scorer,
                                 std::vector<Vector> examples, std::vector<std::size_t> labels,
                                 double lambda1, double lambda2);

// ---------------------------------------------------------------------------
// Synthetic problems with analytic gradients

/// A component oracle whose exact gradients and smoothness constants are known.
/// Construction runs a self-check of the analytic gradient against central
/// differences at 10 random points (relative error <= 1e-6) and throws Error on failure.
class SyntheticProblem : public ComponentOracle {
 public:
  double eval(std::size_t i, const Vector& x) const override = 0;
  virtual Vector component_gradient(std::size_t i, const Vector& x) const = 0;
  /// Smoothness constant of component i.
  virtual double component_lipschitz(std::size_t i) const = 0;

  Vector full_gradient(const Vector& x) const;
  double full_value(const Vector& x) const;
  /// max_i component_lipschitz(i).
  double lipschitz() const;

 protected:
  void self_check(std::uint64_t seed) const;
};

/// f_i(x) = 1/2 x^T A_i x + c_i^T x with random PSD A_i = B_i^T B_i / d + shift I.
class QuadraticProblem final : public SyntheticProblem {
 public:
  QuadraticProblem(std::vector<Matrix> hessians, std::vector<Vector> linear);
  static QuadraticProblem random(std::size_t n, std::size_t dim, std::uint64_t seed,
                                 double shift = 0.1);

  std::size_t size() const override { return hessians_.size(); }
  std::size_t dimension() const override { return dim_; }
  double eval(std::size_t i, const Vector& x) const override;
  Vector component_gradient(std::size_t i, const Vector& x) const override;
  double component_lipschitz(std::size_t i) const override { return lipschitz_[i]; }

  const Matrix& hessian(std::size_t i) const { return hessians_[i]; }
  const Vector& linear(std::size_t i) const { return linear_[i]; }

 private:
  std::vector<Matrix> hessians_;
  std::vector<Vector> linear_;
  std::vector<double> lipschitz_;
  std::size_t dim_;
};

/// f_i(x) = tau * log sum_k exp(<r_ik, x> / tau), with L_i = lambda_max(R_i^T R_i) / (2 tau).
class LogSumExpProblem final : public SyntheticProblem {
 public:
  LogSumExpProblem(std::vector<Matrix> rows, double temperature);
  static LogSumExpProblem random(std::size_t n, std::size_t dim, std::size_t terms,
                                 std::uint64_t seed, double temperature = 1.0);

  std::size_t size() const override { return rows_.size(); }
  std::size_t dimension() const override { return dim_; }
  double eval(std::size_t i, const Vector& x) const override;
  Vector component_gradient(std::size_t i, const Vector& x) const override;
  double component_lipschitz(std::size_t i) const override { return lipschitz_[i]; }

 private:
  std::vector<Matrix> rows_;
  double temperature_;
  std::vector<double> lipschitz_;
  std::size_t dim_;
};

/// Sigmoid-loss classification on generated data (nonconvex, smooth).
class SigmoidToyProblem final : public SyntheticProblem {
 public:
  explicit SigmoidToyProblem(std::shared_ptr<const Dataset> data);

  std::size_t size() const override { return oracle_.size(); }
  std::size_t dimension() const override { return oracle_.dimension(); }
  double eval(std::size_t i, const Vector& x) const override { return oracle_.eval(i, x); }
  Vector component_gradient(std::size_t i, const Vector& x) const override {
    return oracle_.component_gradient(i, x);
  }
  double component_lipschitz(std::size_t i) const override;

  const SigmoidLossOracle& oracle() const { return oracle_; }

 private:
  SigmoidLossOracle oracle_;
};

/// Binary classification data from a planted linear model: dense features
/// a_ij ~ N(0, 1/d), labels sign(<a_i, w*>) with a fraction `flip` of them flipped.
Dataset make_classification_data(std::size_t n, std::size_t dim, std::uint64_t seed,
                                 double flip = 0.1);

}  // namespace zoprox

#include "zoprox/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "zoprox/error.hpp"

namespace zoprox {

double sigmoid_loss(double margin) {
  const double m = std::clamp(margin, -kSigmoidExponentClamp, kSigmoidExponentClamp);
  return 1.0 / (1.0 + std::exp(m));
}

SigmoidLossOracle::SigmoidLossOracle(std::shared_ptr<const Dataset> data) : data_(std::move(data)) {
  if (!data_ || data_->size() == 0) throw EmptyDataset("classification problem has no samples");
  if (data_->dim == 0) throw DimensionError("classification problem has no features");
  for (const Row& r : data_->rows) {
    if (r.label != 1.0 && r.label != -1.0) {
      throw DimensionError("sigmoid loss needs labels in {-1, +1}");
    }
  }
}

double SigmoidLossOracle::margin(std::size_t i, const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != data_->dim) {
    throw DimensionError("point has dimension " + std::to_string(x.size()) + ", data has " +
                         std::to_string(data_->dim));
  }
  const Row& row = data_->rows.at(i);
  double dot = 0.0;
  for (const Feature& f : row.features) dot += f.value * x[f.index - 1];
  return row.label * dot;
}

double SigmoidLossOracle::eval(std::size_t i, const Vector& x) const {
  return sigmoid_loss(margin(i, x));
}

Vector SigmoidLossOracle::component_gradient(std::size_t i, const Vector& x) const {
  const double f = eval(i, x);
  const Row& row = data_->rows[i];
  // d/dm 1/(1+e^m) = -f (1 - f)
  const double scale = -f * (1.0 - f) * row.label;
  Vector g = Vector::Zero(x.size());
  for (const Feature& feat : row.features) g[feat.index - 1] = scale * feat.value;
  return g;
}

Vector SigmoidLossOracle::full_gradient(const Vector& x) const {
  Vector g = Vector::Zero(x.size());
  for (std::size_t i = 0; i < size(); ++i) g += component_gradient(i, x);
  return g / static_cast<double>(size());
}

double SigmoidLossOracle::lipschitz_bound() const {
  double max_sq = 0.0;
  for (const Row& r : data_->rows) {
    double sq = 0.0;
    for (const Feature& f : r.features) sq += f.value * f.value;
    max_sq = std::max(max_sq, sq);
  }
  return max_sq / 4.0;
}

SigmoidLossOracle sigmoid_loss_oracle(const ClassificationProblem& problem) {
  return SigmoidLossOracle(std::make_shared<const Dataset>(problem.data));
}

double test_loss(const Dataset& test, const Vector& x) {
  if (test.size() == 0) throw EmptyDataset("test set is empty");
  if (static_cast<std::size_t>(x.size()) < test.dim) {
    throw DimensionError("point is shorter than the test data dimension");
  }
  double sum = 0.0;
  for (const Row& row : test.rows) {
    double dot = 0.0;
    for (const Feature& f : row.features) dot += f.value * x[f.index - 1];
    sum += sigmoid_loss(row.label * dot);
  }
  return sum / static_cast<double>(test.size());
}

// ---------------------------------------------------------------------------

LinearSoftmaxScorer::LinearSoftmaxScorer(Matrix weights, Vector bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.rows() != bias_.size()) throw DimensionError("weights and bias disagree on K");
}

std::vector<double> LinearSoftmaxScorer::scores(const Vector& input) const {
  if (input.size() != weights_.cols()) throw DimensionError("scorer input has wrong dimension");
  const Vector z = weights_ * input + bias_;
  const double top = z.maxCoeff();
  const Vector e = (z.array() - top).exp().matrix();
  const Vector p = e / e.sum();
  return {p.data(), p.data() + p.size()};
}

AttackLossOracle::AttackLossOracle(std::shared_ptr<const ClassScorer> scorer,
                                   std::vector<Vector> examples, std::vector<std::size_t> labels)
    : scorer_(std::move(scorer)), examples_(std::move(examples)), labels_(std::move(labels)) {
  if (!scorer_) throw InvalidArgument("attack objective needs a scorer");
  if (examples_.empty()) throw EmptyDataset("attack objective needs at least one example");
  if (examples_.size() != labels_.size()) {
    throw DimensionError("examples and labels differ in count");
  }
  dim_ = static_cast<std::size_t>(examples_.front().size());
  if (dim_ == 0) throw DimensionError("examples have dimension 0");
  for (const Vector& a : examples_) {
    if (static_cast<std::size_t>(a.size()) != dim_) {
      throw DimensionError("attack examples must share one dimension");
    }
  }
}

double AttackLossOracle::eval(std::size_t i, const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw DimensionError("perturbation has wrong dimension");
  }
  std::vector<double> s;
  try {
    s = scorer_->scores(examples_.at(i) + x);
  } catch (const OracleUnavailable& e) {
    throw OracleUnavailable("example " + std::to_string(i) + ": " + e.what(), i);
  } catch (const std::exception& e) {
    throw OracleUnavailable("example " + std::to_string(i) + ": scorer failed: " + e.what(), i);
  }
  const std::size_t label = labels_[i];
  if (s.size() < 2 || label >= s.size()) {
    throw OracleUnavailable("example " + std::to_string(i) + ": scorer returned " +
                                std::to_string(s.size()) + " scores for label " +
                                std::to_string(label),
                            i);
  }
  double best_other = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j != label) best_other = std::max(best_other, s[j]);
  }
  return std::max(s[label] - best_other, 0.0);
}

AttackObjective attack_objective(std::shared_ptr<const ClassScorer> scorer,
                                 std::vector<Vector> examples, std::vector<std::size_t> labels,
                                 double lambda1, double lambda2) {
  return {std::make_shared<AttackLossOracle>(std::move(scorer), std::move(examples),
                                             std::move(labels)),
          Regularizer::elastic_net(lambda1, lambda2)};
}

// ---------------------------------------------------------------------------

Vector SyntheticProblem::full_gradient(const Vector& x) const {
  Vector g = Vector::Zero(x.size());
  for (std::size_t i = 0; i < size(); ++i) g += component_gradient(i, x);
  return g / static_cast<double>(size());
}

double SyntheticProblem::full_value(const Vector& x) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < size(); ++i) sum += eval(i, x);
  return sum / static_cast<double>(size());
}

double SyntheticProblem::lipschitz() const {
  double l = 0.0;
  for (std::size_t i = 0; i < size(); ++i) l = std::max(l, component_lipschitz(i));
  return l;
}

void SyntheticProblem::self_check(std::uint64_t seed) const {
  constexpr double kStep = 1e-5;
  constexpr double kTolerance = 1e-6;
  RandomSource rng(seed);
  for (int trial = 0; trial < 10; ++trial) {
    Vector x = rng.gaussian_vector(dimension());
    const Vector analytic = full_gradient(x);
    Vector numeric(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double keep = x[j];
      x[j] = keep + kStep;
      const double plus = full_value(x);
      x[j] = keep - kStep;
      const double minus = full_value(x);
      x[j] = keep;
      numeric[j] = (plus - minus) / (2.0 * kStep);
    }
    const double err = (numeric - analytic).norm();
    if (err > kTolerance * (1.0 + analytic.norm())) {
      throw Error("synthetic problem gradient self-check failed: error " + std::to_string(err));
    }
  }
}

namespace {

double max_eigenvalue(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

Matrix gaussian_matrix(RandomSource& rng, std::size_t rows, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.gaussian();
  }
  return m;
}

}  // namespace

QuadraticProblem::QuadraticProblem(std::vector<Matrix> hessians, std::vector<Vector> linear)
    : hessians_(std::move(hessians)), linear_(std::move(linear)) {
  if (hessians_.empty()) throw InvalidArgument("quadratic problem needs a component");
  if (hessians_.size() != linear_.size()) throw DimensionError("need one c_i per A_i");
  dim_ = static_cast<std::size_t>(hessians_.front().rows());
  for (std::size_t i = 0; i < hessians_.size(); ++i) {
    const Matrix& a = hessians_[i];
    if (static_cast<std::size_t>(a.rows()) != dim_ || static_cast<std::size_t>(a.cols()) != dim_ ||
        static_cast<std::size_t>(linear_[i].size()) != dim_) {
      throw DimensionError("quadratic components must share one dimension");
    }
    if (!a.isApprox(a.transpose())) throw InvalidArgument("A_i must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
      throw InvalidArgument("A_i must be positive semidefinite");
    }
    lipschitz_.push_back(eig.eigenvalues().maxCoeff());
  }
  self_check(0x5eed);
}

QuadraticProblem QuadraticProblem::random(std::size_t n, std::size_t dim, std::uint64_t seed,
                                          double shift) {
  RandomSource rng(seed);
  std::vector<Matrix> hessians;
  std::vector<Vector> linear;
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix b = gaussian_matrix(rng, dim, dim);
    Matrix a = b.transpose() * b / static_cast<double>(dim);
    a.diagonal().array() += shift;
    hessians.push_back((a + a.transpose()) / 2.0);
    linear.push_back(rng.gaussian_vector(dim));
  }
  return QuadraticProblem(std::move(hessians), std::move(linear));
}

double QuadraticProblem::eval(std::size_t i, const Vector& x) const {
  return 0.5 * x.dot(hessians_.at(i) * x) + linear_[i].dot(x);
}

Vector QuadraticProblem::component_gradient(std::size_t i, const Vector& x) const {
  return hessians_.at(i) * x + linear_[i];
}

LogSumExpProblem::LogSumExpProblem(std::vector<Matrix> rows, double temperature)
    : rows_(std::move(rows)), temperature_(temperature) {
  if (rows_.empty()) throw InvalidArgument("log-sum-exp problem needs a component");
  if (!(temperature_ > 0.0)) throw InvalidArgument("temperature must be positive");
  dim_ = static_cast<std::size_t>(rows_.front().cols());
  for (const Matrix& r : rows_) {
    if (static_cast<std::size_t>(r.cols()) != dim_ || r.rows() == 0) {
      throw DimensionError("log-sum-exp components must share one dimension");
    }
    // Hessian = R^T (diag p - p p^T) R / tau and diag p - p p^T has spectral norm <= 1/2.
    lipschitz_.push_back(max_eigenvalue(r.transpose() * r) / (2.0 * temperature_));
  }
  self_check(0x1e5e);
}

LogSumExpProblem LogSumExpProblem::random(std::size_t n, std::size_t dim, std::size_t terms,
                                          std::uint64_t seed, double temperature) {
  RandomSource rng(seed);
  std::vector<Matrix> rows;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(gaussian_matrix(rng, terms, dim) / std::sqrt(static_cast<double>(dim)));
  }
  return LogSumExpProblem(std::move(rows), temperature);
}

double LogSumExpProblem::eval(std::size_t i, const Vector& x) const {
  const Vector z = rows_.at(i) * x / temperature_;
  const double top = z.maxCoeff();
  return temperature_ * (top + std::log((z.array() - top).exp().sum()));
}

Vector LogSumExpProblem::component_gradient(std::size_t i, const Vector& x) const {
  const Vector z = rows_.at(i) * x / temperature_;
  const double top = z.maxCoeff();
  Vector p = (z.array() - top).exp().matrix();
  p /= p.sum();
  return rows_[i].transpose() * p;
}

SigmoidToyProblem::SigmoidToyProblem(std::shared_ptr<const Dataset> data)
    : oracle_(std::move(data)) {
  self_check(0x5167);
}

double SigmoidToyProblem::component_lipschitz(std::size_t i) const {
  double sq = 0.0;
  for (const Feature& f : oracle_.data().rows.at(i).features) sq += f.value * f.value;
  return sq / 4.0;
}

Dataset make_classification_data(std::size_t n, std::size_t dim, std::uint64_t seed,
                                 double flip) {
  if (n == 0 || dim == 0) throw InvalidArgument("synthetic data needs n, d >= 1");
  RandomSource rng(seed);
  const Vector planted = rng.gaussian_vector(dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  Dataset data;
  data.dim = dim;
  data.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Row row;
    double dot = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = rng.gaussian() * scale;
      row.features.push_back({static_cast<std::uint32_t>(j + 1), v});
      dot += v * planted[static_cast<Eigen::Index>(j)];
    }
    row.label = dot >= 0.0 ? 1.0 : -1.0;
    if (rng.uniform01() < flip) row.label = -row.label;
    data.rows.push_back(std::move(row));
  }
  return data;
}

}  // namespace zoprox

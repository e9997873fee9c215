#pragma once

#include <string>

#include "zoprox/core.hpp"

namespace zoprox {

/// Separable convex regularizer psi(x) = lambda1 * ||x||_1 + lambda2 * ||x||_2^2.
///
/// The squared-l2 term is not half-scaled, so its proximal map divides by
/// (1 + 2 * eta * lambda2). ElasticNet(l1, 0) and L1(l1) are the same regularizer, as
/// are ElasticNet(0, l2) and SquaredL2(l2); kind() only records how it was built.
class Regularizer {
 public:
  enum class Kind { None, L1, SquaredL2, ElasticNet };

  static Regularizer none() { return Regularizer(Kind::None, 0.0, 0.0); }
  static Regularizer l1(double lambda1) { return Regularizer(Kind::L1, lambda1, 0.0); }
  static Regularizer squared_l2(double lambda2) {
    return Regularizer(Kind::SquaredL2, 0.0, lambda2);
  }
  static Regularizer elastic_net(double lambda1, double lambda2) {
    return Regularizer(Kind::ElasticNet, lambda1, lambda2);
  }

  Kind kind() const { return kind_; }
  double lambda1() const { return lambda1_; }
  double lambda2() const { return lambda2_; }

  double value(const Vector& x) const;

  /// argmin_y psi(y) + ||y - x||^2 / (2 eta), coordinate-wise closed form.
  Vector prox(double eta, const Vector& x) const;

  std::string describe() const;

  bool operator==(const Regularizer& other) const {
    return lambda1_ == other.lambda1_ && lambda2_ == other.lambda2_;
  }

 private:
  Regularizer(Kind kind, double lambda1, double lambda2);

  Kind kind_;
  double lambda1_;
  double lambda2_;
};

/// sign(v) * max(|v| - threshold, 0)
double soft_threshold(double v, double threshold);

/// g_eta(x) = (x - prox(x - eta * grad)) / eta. Vanishes exactly at critical points of
/// f + psi when `grad` is the true gradient; ||g_eta||^2 is the accuracy metric logged by
/// the solvers.
Vector gradient_mapping(const Regularizer& reg, double eta, const Vector& x, const Vector& grad);

}  // namespace zoprox

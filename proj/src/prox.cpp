#include "zoprox/prox.hpp"

#include <cmath>
#include <sstream>

#include "zoprox/error.hpp"

namespace zoprox {

namespace {

void check_step(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw InvalidStep("proximal step size must be positive and finite, got " +
                      std::to_string(eta));
  }
}

}  // namespace

Regularizer::Regularizer(Kind kind, double lambda1, double lambda2)
    : kind_(kind), lambda1_(lambda1), lambda2_(lambda2) {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) ||
      !std::isfinite(lambda2)) {
    throw InvalidArgument("regularization weights must be finite and non-negative");
  }
}

double Regularizer::value(const Vector& x) const {
  double out = 0.0;
  if (lambda1_ > 0.0) out += lambda1_ * x.lpNorm<1>();
  if (lambda2_ > 0.0) out += lambda2_ * x.squaredNorm();
  return out;
}

double soft_threshold(double v, double threshold) {
  if (v > threshold) return v - threshold;
  if (v < -threshold) return v + threshold;
  return 0.0;
}

Vector Regularizer::prox(double eta, const Vector& x) const {
  check_step(eta);
  const double threshold = eta * lambda1_;
  const double shrink = 1.0 / (1.0 + 2.0 * eta * lambda2_);
  Vector out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    out[j] = soft_threshold(x[j], threshold) * shrink;
  }
  return out;
}

std::string Regularizer::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::None:
      os << "none";
      break;
    case Kind::L1:
      os << "l1(" << lambda1_ << ")";
      break;
    case Kind::SquaredL2:
      os << "squared_l2(" << lambda2_ << ")";
      break;
    case Kind::ElasticNet:
      os << "elastic_net(" << lambda1_ << ", " << lambda2_ << ")";
      break;
  }
  return os.str();
}

Vector gradient_mapping(const Regularizer& reg, double eta, const Vector& x, const Vector& grad) {
  check_step(eta);
  if (x.size() != grad.size()) throw DimensionError("gradient and point differ in dimension");
  // Identity prox: skip the round trip through x - eta * grad, which is not exact.
  if (reg.lambda1() == 0.0 && reg.lambda2() == 0.0) return grad;
  return (x - reg.prox(eta, x - eta * grad)) / eta;
}

}  // namespace zoprox

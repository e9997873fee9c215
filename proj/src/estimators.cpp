#include "zoprox/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "zoprox/error.hpp"

namespace zoprox {

namespace {

void check_mu(double mu) {
  if (!(mu >= kMuFloor) || !std::isfinite(mu)) {
    throw InvalidArgument("smoothing parameter must be finite and >= 2^-26");
  }
}

void check_point(const CountingOracle& oracle, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != oracle.dimension()) {
    throw DimensionError("point has dimension " + std::to_string(x.size()) + ", oracle expects " +
                         std::to_string(oracle.dimension()));
  }
}

double query_at(const CountingOracle& oracle, std::size_t i, const Vector& x,
                std::optional<std::size_t> coordinate) {
  try {
    return oracle(i, x);
  } catch (const NonFiniteValue& e) {
    throw NonFiniteValue(e.what(), i, coordinate);
  }
}

}  // namespace

SmoothingSchedule SmoothingSchedule::default_for(EstimatorKind kind) {
  return kind == EstimatorKind::CooSGE ? coo_decay(1.0) : gau_decay(1.0);
}

double SmoothingSchedule::at(std::size_t t, std::size_t dim) const {
  if (t == 0) throw InvalidArgument("smoothing schedule is indexed from t = 1");
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("smoothing constant must be > 0");
  const double td = static_cast<double>(t);
  const double dd = static_cast<double>(dim);
  double mu = c;
  switch (kind) {
    case Kind::Constant:
      break;
    case Kind::CooDecay:
      mu = c / std::sqrt(dd * td);
      break;
    case Kind::GauDecay:
      mu = c / (dd * std::sqrt(td));
      break;
  }
  return std::max(mu, kMuFloor);
}

std::string SmoothingSchedule::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Constant:
      os << c;
      break;
    case Kind::CooDecay:
      os << c << "/sqrt(d*t)";
      break;
    case Kind::GauDecay:
      os << c << "/(d*sqrt(t))";
      break;
  }
  return os.str();
}

std::string to_string(EstimatorKind kind) {
  return kind == EstimatorKind::CooSGE ? "CooSGE" : "GauSGE";
}

EstimatorKind estimator_from_string(const std::string& name) {
  std::string lower(name.size(), '\0');
  std::transform(name.begin(), name.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "coo" || lower == "coosge") return EstimatorKind::CooSGE;
  if (lower == "gau" || lower == "gausge") return EstimatorKind::GauSGE;
  throw ConfigError("unknown estimator '" + name + "' (expected coo or gau)");
}

std::size_t queries_per_component(EstimatorKind kind, std::size_t dim) {
  return kind == EstimatorKind::CooSGE ? 2 * dim : 2;
}

Vector coosge_component(const CountingOracle& oracle, std::size_t i, const Vector& x, double mu) {
  check_mu(mu);
  check_point(oracle, x);
  Vector probe = x;
  Vector grad(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const auto coord = static_cast<std::size_t>(j);
    probe[j] = x[j] + mu;
    const double plus = query_at(oracle, i, probe, coord);
    probe[j] = x[j] - mu;
    const double minus = query_at(oracle, i, probe, coord);
    probe[j] = x[j];
    grad[j] = (plus - minus) / (2.0 * mu);
  }
  return grad;
}

Vector gausge_component(const CountingOracle& oracle, std::size_t i, const Vector& x, double mu,
                        const Vector& u) {
  check_mu(mu);
  check_point(oracle, x);
  if (u.size() != x.size()) throw DimensionError("direction and point differ in dimension");
  const double shifted = query_at(oracle, i, x + mu * u, std::nullopt);
  const double base = query_at(oracle, i, x, std::nullopt);
  return ((shifted - base) / mu) * u;
}

std::vector<Vector> estimate_each(const CountingOracle& oracle, EstimatorKind kind,
                                  std::span<const std::size_t> indices, const Vector& x,
                                  double mu, const RandomSource& directions) {
  std::vector<Vector> out;
  out.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= oracle.size()) {
      throw InvalidArgument("component index " + std::to_string(indices[k]) + " out of range");
    }
    if (kind == EstimatorKind::CooSGE) {
      out.push_back(coosge_component(oracle, indices[k], x, mu));
    } else {
      RandomSource stream = directions.split(k);
      const Vector u = stream.gaussian_vector(oracle.dimension());
      out.push_back(gausge_component(oracle, indices[k], x, mu, u));
    }
  }
  return out;
}

Vector estimate_minibatch(const CountingOracle& oracle, EstimatorKind kind,
                          std::span<const std::size_t> indices, const Vector& x, double mu,
                          const RandomSource& directions) {
  if (indices.empty()) throw InvalidBatch("mini-batch estimate needs at least one index");
  const std::vector<Vector> parts = estimate_each(oracle, kind, indices, x, mu, directions);
  Vector sum = Vector::Zero(x.size());
  for (const Vector& g : parts) sum += g;
  return sum / static_cast<double>(parts.size());
}

Vector estimate_full(const CountingOracle& oracle, EstimatorKind kind, const Vector& x, double mu,
                     const RandomSource& directions) {
  std::vector<std::size_t> all(oracle.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return estimate_minibatch(oracle, kind, all, x, mu, directions);
}

}  // namespace zoprox

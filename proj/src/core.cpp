#include "zoprox/core.hpp"

#include <cmath>
#include <cstring>
#include <unordered_set>

#include "zoprox/error.hpp"
#include "zoprox/prox.hpp"

namespace zoprox {

FunctionOracle::FunctionOracle(std::size_t n, std::size_t d, Fn fn)
    : n_(n), d_(d), fn_(std::move(fn)) {
  if (n_ == 0) throw InvalidArgument("oracle needs at least one component");
  if (d_ == 0) throw InvalidArgument("oracle needs dimension >= 1");
}

double CountingOracle::operator()(std::size_t i, const Vector& x) const {
  counter_->add();
  const double value = oracle_->eval(i, x);
  if (!std::isfinite(value)) {
    throw NonFiniteValue("component " + std::to_string(i) + " returned a non-finite value", i);
  }
  return value;
}

double PurityCheckedOracle::eval(std::size_t i, const Vector& x) const {
  const double value = inner_->eval(i, x);
  Key key{i, std::vector<double>(x.data(), x.data() + x.size())};
  std::lock_guard lock(mutex_);
  auto [it, inserted] = seen_.try_emplace(std::move(key), value);
  if (!inserted) {
    ++repeats_;
    // Bitwise comparison: NaN payloads and signed zeros count as differences too.
    if (std::memcmp(&it->second, &value, sizeof value) != 0) {
      throw Error("oracle is not pure: component " + std::to_string(i) +
                  " returned two different values for the same point");
    }
  }
  return value;
}

std::size_t PurityCheckedOracle::distinct_queries() const {
  std::lock_guard lock(mutex_);
  return seen_.size();
}

std::size_t PurityCheckedOracle::repeated_queries() const {
  std::lock_guard lock(mutex_);
  return repeats_;
}

double full_function_value(const CountingOracle& oracle, const Regularizer& reg, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != oracle.dimension()) {
    throw DimensionError("point has dimension " + std::to_string(x.size()) + ", oracle expects " +
                         std::to_string(oracle.dimension()));
  }
  const std::size_t n = oracle.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += oracle(i, x);
  return sum / static_cast<double>(n) + reg.value(x);
}

std::vector<std::size_t> sample_minibatch(RandomSource& rng, std::size_t n, std::size_t b,
                                          bool with_replacement) {
  if (n == 0) throw InvalidBatch("cannot sample from an empty index set");
  if (b == 0) throw InvalidBatch("mini-batch size must be >= 1");
  std::vector<std::size_t> out;
  out.reserve(b);
  if (with_replacement) {
    for (std::size_t k = 0; k < b; ++k) out.push_back(rng.uniform_index(n));
    return out;
  }
  if (b > n) {
    throw InvalidBatch("mini-batch size " + std::to_string(b) + " exceeds n = " +
                       std::to_string(n) + " without replacement");
  }
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(b);
  for (std::size_t j = n - b; j < n; ++j) {
    const std::size_t t = rng.uniform_index(j + 1);
    const std::size_t pick = chosen.contains(t) ? j : t;
    chosen.insert(pick);
    out.push_back(pick);
  }
  return out;
}

void require_finite(const Vector& x, const std::string& what) {
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j])) {
      throw NonFiniteValue(what + " has a non-finite entry at coordinate " + std::to_string(j),
                           std::nullopt, static_cast<std::size_t>(j));
    }
  }
}

}  // namespace zoprox

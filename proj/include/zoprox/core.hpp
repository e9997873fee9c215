#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "zoprox/random.hpp"

namespace zoprox {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Regularizer;

/// Black-box access to the smooth components f_0, ..., f_{n-1} of
/// f(x) = (1/n) sum_i f_i(x). Implementations must be deterministic and safe to
/// call concurrently for distinct (i, x).
class ComponentOracle {
 public:
  virtual ~ComponentOracle() = default;

  /// Number of components n.
  virtual std::size_t size() const = 0;
  /// Dimension d of x.
  virtual std::size_t dimension() const = 0;
  /// f_i(x) for 0-based component index i.
  virtual double eval(std::size_t i, const Vector& x) const = 0;
};

/// Adapts a callable `double(std::size_t, const Vector&)` to ComponentOracle.
class FunctionOracle final : public ComponentOracle {
 public:
  using Fn = std::function<double(std::size_t, const Vector&)>;

  FunctionOracle(std::size_t n, std::size_t d, Fn fn);

  std::size_t size() const override { return n_; }
  std::size_t dimension() const override { return d_; }
  double eval(std::size_t i, const Vector& x) const override { return fn_(i, x); }

 private:
  std::size_t n_;
  std::size_t d_;
  Fn fn_;
};

class QueryCounter {
 public:
  QueryCounter() = default;
  QueryCounter(const QueryCounter&) = delete;
  QueryCounter& operator=(const QueryCounter&) = delete;

  void add(std::uint64_t k = 1) { total_.fetch_add(k, std::memory_order_relaxed); }
  std::uint64_t total() const { return total_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> total_{0};
};

/// The only path solvers use to reach an oracle: every call is counted and
/// non-finite values are rejected with the component index attached.
class CountingOracle {
 public:
  CountingOracle(const ComponentOracle& oracle, QueryCounter& counter)
      : oracle_(&oracle), counter_(&counter) {}

  double operator()(std::size_t i, const Vector& x) const;

  std::size_t size() const { return oracle_->size(); }
  std::size_t dimension() const { return oracle_->dimension(); }
  std::uint64_t queries() const { return counter_->total(); }
  const ComponentOracle& oracle() const { return *oracle_; }

 private:
  const ComponentOracle* oracle_;
  QueryCounter* counter_;
};

/// Wrapper that memoizes every (i, x) it sees and throws if the wrapped oracle
/// ever answers the same query differently. Used to verify oracle purity.
class PurityCheckedOracle final : public ComponentOracle {
 public:
  explicit PurityCheckedOracle(const ComponentOracle& inner) : inner_(&inner) {}

  std::size_t size() const override { return inner_->size(); }
  std::size_t dimension() const override { return inner_->dimension(); }
  double eval(std::size_t i, const Vector& x) const override;

  std::size_t distinct_queries() const;
  std::size_t repeated_queries() const;

 private:
  using Key = std::pair<std::size_t, std::vector<double>>;

  const ComponentOracle* inner_;
  mutable std::mutex mutex_;
  mutable std::map<Key, double> seen_;
  mutable std::size_t repeats_ = 0;
};

/// F(x) = (1/n) sum_i f_i(x) + psi(x); costs exactly n queries.
double full_function_value(const CountingOracle& oracle, const Regularizer& reg, const Vector& x);

/// b indices uniform on {0, ..., n-1}, in draw order. Consumes exactly b words of `rng`
/// in both modes; without replacement uses Floyd's algorithm so the result has b
/// distinct entries.
std::vector<std::size_t> sample_minibatch(RandomSource& rng, std::size_t n, std::size_t b,
                                          bool with_replacement);

/// Throws NonFiniteValue naming the first bad coordinate.
void require_finite(const Vector& x, const std::string& what);

}  // namespace zoprox

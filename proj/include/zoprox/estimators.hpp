#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "zoprox/core.hpp"

namespace zoprox {

enum class EstimatorKind {
  CooSGE,  ///< coordinate-wise central differences, 2d queries per component
  GauSGE,  ///< one Gaussian-direction forward difference, 2 queries per component
};

/// Smallest smoothing parameter ever used; schedule values below it are clamped.
inline constexpr double kMuFloor = 0x1.0p-26;

/// Smoothing parameter as a function of the 1-based global iteration t.
struct SmoothingSchedule {
  enum class Kind {
    Constant,  ///< mu_t = c
    CooDecay,  ///< mu_t = c / sqrt(d t)
    GauDecay,  ///< mu_t = c / (d sqrt(t))
  };

  Kind kind = Kind::Constant;
  double c = 1e-3;

  static SmoothingSchedule constant(double mu) { return {Kind::Constant, mu}; }
  static SmoothingSchedule coo_decay(double c = 1.0) { return {Kind::CooDecay, c}; }
  static SmoothingSchedule gau_decay(double c = 1.0) { return {Kind::GauDecay, c}; }
  /// The decaying schedule used in the classification experiments for `kind`.
  static SmoothingSchedule default_for(EstimatorKind kind);

  /// Clamped to kMuFloor. Throws InvalidArgument for t == 0 or c <= 0.
  double at(std::size_t t, std::size_t dim) const;

  std::string describe() const;
};

struct GradientEstimatorConfig {
  EstimatorKind kind = EstimatorKind::CooSGE;
  SmoothingSchedule mu = SmoothingSchedule::coo_decay();
  /// Under GauSGE, reuse the same direction for both points of a variance-reduction
  /// correction pair. Turning this off is an ablation.
  bool share_directions = true;
};

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

/// Oracle queries one component estimate costs: 2d (CooSGE) or 2 (GauSGE).
std::size_t queries_per_component(EstimatorKind kind, std::size_t dim);

/// sum_j (f_i(x + mu e_j) - f_i(x - mu e_j)) / (2 mu) e_j
Vector coosge_component(const CountingOracle& oracle, std::size_t i, const Vector& x, double mu);

/// ((f_i(x + mu u) - f_i(x)) / mu) u
Vector gausge_component(const CountingOracle& oracle, std::size_t i, const Vector& x, double mu,
                        const Vector& u);

/// Per-occurrence estimates for `indices` at x.
///
/// Under GauSGE, occurrence k draws its direction from directions.split(k), so passing
/// the same `directions` stream for two different points reuses each direction across
/// the pair. CooSGE ignores `directions`.
std::vector<Vector> estimate_each(const CountingOracle& oracle, EstimatorKind kind,
                                  std::span<const std::size_t> indices, const Vector& x,
                                  double mu, const RandomSource& directions);

/// (1/b) sum_k estimate_k, summed in list order.
Vector estimate_minibatch(const CountingOracle& oracle, EstimatorKind kind,
                          std::span<const std::size_t> indices, const Vector& x, double mu,
                          const RandomSource& directions);

/// estimate_minibatch over indices 0..n-1.
Vector estimate_full(const CountingOracle& oracle, EstimatorKind kind, const Vector& x, double mu,
                     const RandomSource& directions);

}  // namespace zoprox

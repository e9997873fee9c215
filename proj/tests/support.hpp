#pragma once

// Reference computations for the tests. None of these call into the library's
// numerical code, so they can serve as independent oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "zoprox/core.hpp"

namespace zoprox::ref {

/// Minimizes lambda1 |y| + lambda2 y^2 + (y - x)^2 / (2 eta) over y by a grid scan
/// followed by ternary search, evaluated in long double.
inline double brute_force_prox_1d(double x, double eta, double lambda1, double lambda2) {
  using ld = long double;
  auto h = [&](ld y) {
    const ld d = y - static_cast<ld>(x);
    return static_cast<ld>(lambda1) * std::fabs(y) + static_cast<ld>(lambda2) * y * y +
           d * d / (2.0L * static_cast<ld>(eta));
  };
  const ld span = std::fabs(static_cast<ld>(x)) + 1.0L;
  ld lo = -span;
  ld hi = span;
  constexpr int kGrid = 2000;
  ld best = lo;
  ld best_val = h(lo);
  for (int k = 1; k <= kGrid; ++k) {
    const ld y = lo + (hi - lo) * k / kGrid;
    const ld v = h(y);
    if (v < best_val) {
      best_val = v;
      best = y;
    }
  }
  const ld step = (hi - lo) / kGrid;
  lo = best - step;
  hi = best + step;
  for (int it = 0; it < 400 && hi - lo > 1e-15L; ++it) {
    const ld m1 = lo + (hi - lo) / 3.0L;
    const ld m2 = hi - (hi - lo) / 3.0L;
    if (h(m1) < h(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return static_cast<double>((lo + hi) / 2.0L);
}

/// Dense quadratic components 1/2 x^T A_i x + c_i^T x held by value.
struct ReferenceQuadratics {
  std::vector<Matrix> a;
  std::vector<Vector> c;

  double value(std::size_t i, const Vector& x) const { return 0.5 * x.dot(a[i] * x) + c[i].dot(x); }
  Vector gradient(std::size_t i, const Vector& x) const { return a[i] * x + c[i]; }
  Vector full_gradient(const Vector& x) const {
    Vector g = Vector::Zero(x.size());
    for (std::size_t i = 0; i < a.size(); ++i) g += gradient(i, x);
    return g / static_cast<double>(a.size());
  }
  /// Largest eigenvalue over all components.
  double lipschitz() const {
    double best = 0.0;
    for (const Matrix& m : a) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(m);
      best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    return best;
  }

  std::shared_ptr<FunctionOracle> oracle() const {
    auto self = std::make_shared<ReferenceQuadratics>(*this);
    return std::make_shared<FunctionOracle>(
        a.size(), static_cast<std::size_t>(a.front().rows()),
        [self](std::size_t i, const Vector& x) { return self->value(i, x); });
  }

  static ReferenceQuadratics random(std::size_t n, std::size_t d, std::uint64_t seed,
                                    bool shared_hessian = false) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    ReferenceQuadratics q;
    Matrix shared;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == 0 || !shared_hessian) {
        Matrix b(d, d);
        for (Eigen::Index r = 0; r < b.rows(); ++r) {
          for (Eigen::Index s = 0; s < b.cols(); ++s) b(r, s) = normal(gen);
        }
        shared = b.transpose() * b / static_cast<double>(d) +
                 0.5 * Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
      }
      q.a.push_back(shared);
      Vector c(static_cast<Eigen::Index>(d));
      for (Eigen::Index r = 0; r < c.size(); ++r) c[r] = normal(gen);
      q.c.push_back(c);
    }
    return q;
  }
};

inline Vector random_vector(std::mt19937_64& gen, std::size_t d, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = normal(gen);
  return v;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("zoprox-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace zoprox::ref

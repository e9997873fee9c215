#include "zoprox/random.hpp"

#include <cmath>
#include <numbers>

namespace zoprox {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomSource::RandomSource(std::uint64_t seed) : key_(splitmix64(seed)) {}

RandomSource::RandomSource(std::uint64_t key, bool) : key_(key) {}

RandomSource RandomSource::split(std::uint64_t stream_id) const {
  return RandomSource(splitmix64(key_ ^ splitmix64(stream_id + kGolden)), true);
}

std::uint64_t RandomSource::next_u64() {
  ++counter_;
  return splitmix64(key_ + counter_ * kGolden);
}

double RandomSource::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t RandomSource::uniform_index(std::size_t bound) {
  const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * bound;
  return static_cast<std::size_t>(wide >> 64);
}

double RandomSource::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - U keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Eigen::VectorXd RandomSource::gaussian_vector(std::size_t dim) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(dim));
  for (Eigen::Index j = 0; j < out.size(); ++j) out[j] = gaussian();
  return out;
}

}  // namespace zoprox

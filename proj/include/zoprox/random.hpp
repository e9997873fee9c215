#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace zoprox {

/// Counter-based random stream.
///
/// Word k of a stream with key K is splitmix64(K + (k + 1) * 0x9e3779b97f4a7c15), so a
/// stream is fully described by (key, counter). split(id) derives an independent child
/// key without touching the parent's counter; solvers use it to give every
/// (purpose, step, batch position) its own stream, which makes results independent of
/// evaluation order.
///
/// Consumption contract:
///   - next_u64 / uniform01 / uniform_index: one word each.
///   - gaussian: Box-Muller on two words, yielding a pair; the second value of the
///     pair is cached and returned by the next call.
///   - gaussian_vector(d): d successive gaussian() calls, entry 0 first.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed);

  /// Child stream for `stream_id`; deterministic in (this stream's key, stream_id).
  RandomSource split(std::uint64_t stream_id) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform on {0, ..., bound - 1} by 128-bit multiply-shift (bias <= bound / 2^64).
  std::size_t uniform_index(std::size_t bound);
  double gaussian();
  Eigen::VectorXd gaussian_vector(std::size_t dim);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  RandomSource(std::uint64_t key, bool);

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace zoprox

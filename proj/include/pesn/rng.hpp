#pragma once

#include <cmath>
#include <cstdint>

namespace pesn {

/// Names a reproducible random stream. The descriptor is an immutable value:
/// every consumer builds its own NormalGenerator from it, so handing the same
/// RngStream to an operation twice yields the same samples.
///
/// Streams are derived by hashing (seed, stream_id) into a SplitMix64 state.
/// Parallel code derives one child stream per task (element, chunk, trial),
/// which keeps results independent of thread count.
class RngStream {
 public:
  constexpr RngStream() = default;
  constexpr explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {}

  [[nodiscard]] constexpr std::uint64_t seed() const { return seed_; }
  [[nodiscard]] constexpr std::uint64_t stream_id() const { return stream_id_; }

  /// Child stream. child(i) and child(j) differ for i != j, and
  /// a.child(i) differs from a.child(j).child(k) with overwhelming probability.
  [[nodiscard]] RngStream child(std::uint64_t index) const;

  /// Initial SplitMix64 state for this stream.
  [[nodiscard]] std::uint64_t initial_state() const;

  friend constexpr bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
};

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace detail {
struct ZigguratTables {
  double x[129];
  double r[128];
};
extern const ZigguratTables kZiggurat;
}  // namespace detail

/// Stateful sampler over a RngStream: SplitMix64 uniforms and ziggurat
/// standard normals (Marsaglia-Tsang layers with Doornik's tail handling).
class NormalGenerator {
 public:
  explicit NormalGenerator(const RngStream& stream) : state_(stream.initial_state()) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  double normal() {
    const std::uint64_t bits = next_u64();
    const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-52 - 1.0;
    const unsigned i = static_cast<unsigned>(bits & 0x7f);
    if (std::abs(u) < detail::kZiggurat.r[i]) return u * detail::kZiggurat.x[i];
    return normal_slow(u, i);
  }

 private:
  double normal_slow(double u, unsigned i);

  std::uint64_t state_;
};

}  // namespace pesn

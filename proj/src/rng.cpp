#include "pesn/rng.hpp"

#include <cmath>

namespace pesn {

RngStream RngStream::child(std::uint64_t index) const {
  // The child's seed folds in the parent's stream so nested derivations
  // (a.child(i).child(j)) stay distinct from flat ones.
  const std::uint64_t folded = mix64(seed_ ^ mix64(stream_id_ + 0x632be59bd9b4e019ULL));
  return RngStream(folded, index);
}

std::uint64_t RngStream::initial_state() const {
  return mix64(seed_ + 0x9e3779b97f4a7c15ULL) ^ mix64(stream_id_ ^ 0xd1b54a32d192ed03ULL);
}

std::uint64_t NormalGenerator::below(std::uint64_t n) {
  // Lemire's multiply-shift with rejection; unbiased.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = -n % n;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

namespace {

constexpr double kZigR = 3.442619855899;
constexpr double kZigV = 9.91256303526217e-3;

detail::ZigguratTables make_tables() {
  detail::ZigguratTables t{};
  double f = std::exp(-0.5 * kZigR * kZigR);
  t.x[0] = kZigV / f;
  t.x[1] = kZigR;
  t.x[128] = 0.0;
  for (int i = 2; i < 128; ++i) {
    t.x[i] = std::sqrt(-2.0 * std::log(kZigV / t.x[i - 1] + f));
    f = std::exp(-0.5 * t.x[i] * t.x[i]);
  }
  for (int i = 0; i < 128; ++i) t.r[i] = t.x[i + 1] / t.x[i];
  return t;
}

}  // namespace

namespace detail {
const ZigguratTables kZiggurat = make_tables();
}

double NormalGenerator::normal_slow(double u, unsigned i) {
  const auto& t = detail::kZiggurat;
  for (;;) {
    if (std::abs(u) < t.r[i]) return u * t.x[i];
    if (i == 0) {
      double x, y;
      do {
        x = std::log(uniform()) / kZigR;
        y = std::log(uniform());
      } while (-2.0 * y < x * x);
      return u < 0.0 ? x - kZigR : kZigR - x;
    }
    const double x = u * t.x[i];
    const double f0 = std::exp(-0.5 * (t.x[i] * t.x[i] - x * x));
    const double f1 = std::exp(-0.5 * (t.x[i + 1] * t.x[i + 1] - x * x));
    if (f1 + uniform() * (f0 - f1) < 1.0) return x;
    const std::uint64_t bits = next_u64();
    u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-52 - 1.0;
    i = static_cast<unsigned>(bits & 0x7f);
  }
}

}  // namespace pesn

#pragma once

#include <cstdint>

#include "pesn/gaussian.hpp"
#include "pesn/moments.hpp"

namespace pesn {

/// Element-wise activation moments of a diagonal Gaussian belief: component i
/// of the result is the mean/variance of f(N(mean_i, var_i)).
///
/// Runs in parallel over elements with OpenMP. For the MC engine element i of
/// call `call_id` draws from engine.rng().child(call_id).child(i), so the output
/// does not depend on the number of threads.
[[nodiscard]] DiagonalGaussian propagate_moments(const MomentEngine& engine, const DiagonalGaussian& input,
                                                 std::uint64_t call_id = 0);

/// Single-threaded reference of propagate_moments. The spline engine goes
/// through spline_moments_reference instead of the shared-node fast path.
[[nodiscard]] DiagonalGaussian propagate_moments_serial(const MomentEngine& engine, const DiagonalGaussian& input,
                                                        std::uint64_t call_id = 0);

}  // namespace pesn

#pragma once

// Central finite-difference check of a sublayer's backward pass against the
// scalar probe L(x, theta) = sum U . forward(x, theta) for a random U.

#include <cstdint>
#include <random>
#include <string>

#include "semiscale/layers.hpp"

namespace semiscale {

struct GradCheckOptions {
    /// Step sizes tried per coordinate; the smallest error wins.
    std::vector<double> steps{1e-3, 1e-4};
    /// Denominator floor in |a - n| / max(|a|, |n|, floor).
    double floor = 1e-6;
    /// Number of randomly chosen input entries probed per example (all
    /// parameters are always probed).
    int input_probes = 24;
    bool training = true;
};

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::string worst;  // e.g. "H[3]" or "input[0][1](4,5)"
    std::size_t probes = 0;
    /// True when some probe straddles a kink of the piecewise-smooth forward
    /// map (one-sided slopes disagree); such instances should be resampled.
    bool kink = false;
};

GradCheckResult check_gradients(Sublayer& layer, const Batch& input, std::uint64_t seed,
                                const GradCheckOptions& options = {});

}  // namespace semiscale

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semiscale/grid.hpp"
#include "semiscale/kernel.hpp"

namespace semiscale {

/// How samples outside the grid are obtained.
///   Replicate - clamp to the nearest border pixel (training default)
///   Reflect   - mirror without repeating the border pixel
///   ZeroPad   - outside samples are the semifield zero, i.e. they never contribute
///   Periodic  - wrap around (torus); used for transform identities
enum class BoundaryPolicy { Replicate, Reflect, ZeroPad, Periodic };

BoundaryPolicy parse_boundary(const std::string& text);

/// Reference semifield convolution
///   out[i, j] = (+)_{m, n} k[i - m, j - n] (x) f[m, n]
/// over the kernel window. Root kinds go through the x -> x^p lift, Log kinds
/// through convolve_log_stable. Throws std::invalid_argument when the kernel
/// was sampled for a different semifield.
Grid2 convolve(const SemifieldKind& kind, const SampledKernel& kernel, const Grid2& field,
               BoundaryPolicy boundary);

/// Log(mu) convolution as a max-shifted log-sum-exp per output pixel.
Grid2 convolve_log_stable(double mu, const SampledKernel& kernel, const Grid2& field,
                          BoundaryPolicy boundary);

/// Winner bookkeeping of a tropical convolution: for every output pixel the
/// kernel tap and source pixel that attained the max (or min); -1 when the
/// output is the semifield zero. Ties go to the lowest source linear index.
struct TropicalTrace {
    std::vector<std::int32_t> tap;
    std::vector<std::int32_t> source;
};

Grid2 convolve_tropical_traced(const SemifieldKind& kind, const SampledKernel& kernel,
                               const Grid2& field, BoundaryPolicy boundary, TropicalTrace& trace);

struct MorphologyResult {
    Grid2 field;
    /// True when H was not axis aligned and the windowed brute force was used.
    bool used_fallback = false;
};

/// Exact quadratic (alpha = 2) dilation/erosion over the whole grid, i.e. the
/// grid is treated as embedded in the semifield-zero plane. Uses the separable
/// lower-envelope algorithm when the Gram matrix H^T H is diagonal.
MorphologyResult convolve_fast_quadratic_morphological(const SemifieldKind& kind, double t,
                                                       const Mat2& metric, const Grid2& field);

/// 1-D min-plus convolution with a(p - q)^2, exact, O(n). Infinite inputs
/// are skipped; if all inputs are +inf the output is +inf everywhere.
std::vector<double> quadratic_erosion_1d(const std::vector<double>& samples, double a);

/// Gradients of a windowed convolution with respect to its kernel taps and
/// its input field, given dL/d(output).
struct ConvolutionGradient {
    std::vector<double> taps;
    Grid2 field;
};

/// Reverse-mode derivative of convolve(). `output` must be the forward
/// result for (kernel, field); tropical kinds need the trace recorded by
/// convolve_tropical_traced. Tropical gradients flow only through the winning
/// tap; Log gradients are softmax-weighted; Root is differentiated through its
/// x -> x^p lift (inputs must be > 0).
ConvolutionGradient convolve_backward(const SemifieldKind& kind, const SampledKernel& kernel,
                                      const Grid2& field, const Grid2& output, const Grid2& upstream,
                                      BoundaryPolicy boundary, const TropicalTrace* trace = nullptr);

}  // namespace semiscale

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "semiscale/grid.hpp"
#include "semiscale/linalg2.hpp"
#include "semiscale/semifield.hpp"

namespace semiscale {

/// Continuous reduced kernel k_t(H x) of one of the five scale-spaces.
///
/// Linear, Root and Log kernels are the quadratic (alpha = 2) members; the
/// tropical kernels accept any alpha > 1 with 1/alpha + 1/beta = 1.
struct KernelSpec {
    SemifieldKind kind = SemifieldKind::linear();
    double alpha = 2.0;
    double t = 1.0;
    Mat2 metric = Mat2::identity();

    /// Throws std::invalid_argument describing the first violated constraint.
    void validate() const;

    double beta() const { return alpha / (alpha - 1.0); }
};

/// Spatial kernel k_t evaluated at H x.
double kernel_value(const KernelSpec& spec, Vec2 x);

/// Semifield Fourier transform of the reduced kernel at frequency omega.
/// Only defined for the unit metric; a non-identity H is rejected.
double fourier_kernel_value(const KernelSpec& spec, Vec2 omega);

/// Constant c with fourier_kernel_value(w) == exp_semifield(c * |w|^alpha * t):
/// 1/2 (Linear), 1/(2p) (Root), 1/(2|mu|) (Log), -1/alpha (tropical).
double fourier_time_scale(const SemifieldKind& kind, double alpha);

/// Kernel samples on the integer window [-radius, radius]^2.
struct SampledKernel {
    SemifieldKind kind = SemifieldKind::linear();
    int radius = 0;
    std::vector<double> values;

    int side() const { return 2 * radius + 1; }
    std::size_t index(int dx, int dy) const {
        return static_cast<std::size_t>(dy + radius) * static_cast<std::size_t>(side()) +
               static_cast<std::size_t>(dx + radius);
    }
    double at(int dx, int dy) const { return values[index(dx, dy)]; }
    double& at(int dx, int dy) { return values[index(dx, dy)]; }

    /// Kernel that is `one` at the centre and `zero` elsewhere.
    static SampledKernel delta(const SemifieldKind& kind, int radius);
};

/// ceil(3 t^(1/alpha) / sigma_min(H)) clamped to [2, 7].
int default_radius(const KernelSpec& spec);

/// Samples k_t(H x) at integer offsets. Linear and Root samples are divided by
/// their discrete semifield integral so the window integrates to `one`.
SampledKernel sample_kernel(const KernelSpec& spec, int radius);
SampledKernel sample_kernel(const KernelSpec& spec);

/// Vector-Jacobian product of sample_kernel with respect to H: given dL/dtap
/// for every sampled value, returns dL/dH (including the renormalisation).
Mat2 sample_kernel_metric_gradient(const KernelSpec& spec, int radius,
                                   std::span<const double> tap_gradient);

class NoIsomorphismError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Pointwise transport of a field between isomorphic semifields (the
/// Cole-Hopf map for Log -> Linear). Throws NoIsomorphismError when the two
/// kinds are not isomorphic (e.g. Linear and TropicalMax).
Grid2 cole_hopf_transport(const SemifieldKind& source, const SemifieldKind& target,
                          const Grid2& field);

}  // namespace semiscale

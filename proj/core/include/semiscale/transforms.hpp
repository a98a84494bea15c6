#pragma once

// Semifield Fourier transforms on sampled fields.
//
// A Grid2 of size W x H is read as samples at centred coordinates
//   x_i = (i - W/2) * step,  y_j = (j - H/2) * step     (integer division)
// so odd sizes are symmetric about the origin.
//
//   Linear    cosine transform of the even-symmetrised samples (DFT lattice)
//   Root(p)   x -> x^p, cosine transform, p-th root
//   Log(mu)   x -> exp(mu x), cosine transform, (1/mu) ln
//   TropMax   sup_x f(x) - w.x      (separable upper-hull evaluation)
//   TropMin   inf_x f(x) - w.x
//
// The tropical transforms treat the window as embedded in the semifield-zero
// plane (f = -inf, resp. +inf, outside the samples).

#include <span>
#include <stdexcept>
#include <vector>

#include "semiscale/grid.hpp"
#include "semiscale/linalg2.hpp"
#include "semiscale/semifield.hpp"

namespace semiscale {

/// Centred sampling lattice: coordinate of index i is (i - width/2) * step_x.
struct Lattice {
    int width = 0;
    int height = 0;
    double step_x = 1.0;
    double step_y = 1.0;

    double coord_x(int i) const { return (i - width / 2) * step_x; }
    double coord_y(int j) const { return (j - height / 2) * step_y; }
    Vec2 at(int i, int j) const { return {coord_x(i), coord_y(j)}; }

    static Lattice centred(const Grid2& grid, double step) {
        return {grid.width(), grid.height(), step, step};
    }
    /// Frequencies 2 pi k / (n * step) of the discrete transform of `grid`.
    static Lattice dft_of(const Grid2& grid, double step);
};

struct FrequencyGrid2 {
    Grid2 values;
    Lattice lattice;
};

class NonInvertibleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Forward transform. Linear/Root/Log use the DFT lattice of the input;
/// tropical kinds default to a frequency lattice with the input's shape and step.
FrequencyGrid2 semifield_fourier(const SemifieldKind& kind, const Grid2& field,
                                 double spatial_step = 1.0);

/// Tropical forward transform on an explicit frequency lattice.
FrequencyGrid2 semifield_fourier(const SemifieldKind& kind, const Grid2& field, double spatial_step,
                                 const Lattice& frequencies);

struct InverseOptions {
    /// Spatial lattice of the result for tropical kinds; defaults to the
    /// spectrum's shape and step. Ignored for Linear/Root/Log.
    Lattice spatial{};
    /// Verify that the spectrum lies in the image of the forward transform.
    bool check = true;
    double tolerance = 1e-9;
};

Grid2 semifield_fourier_inverse(const SemifieldKind& kind, const FrequencyGrid2& spectrum,
                                const InverseOptions& options = {});

/// O(N M) tropical transform straight from the definition; reference for tests.
FrequencyGrid2 tropical_fourier_bruteforce(const SemifieldKind& kind, const Grid2& field,
                                           double spatial_step, const Lattice& frequencies);

/// Discrete convex conjugate f*(s) = max_i s x_i - f_i, represented on its
/// natural dual grid: the slopes of the lower convex hull of (x_i, f_i).
struct Conjugate1D {
    std::vector<double> slopes;
    std::vector<double> values;

    /// f*(s): exact inside [slopes.front(), slopes.back()], +inf outside
    /// (the samples are read as the trace of a superlinear function).
    double value_at(double s) const;
};

/// Linear-time conjugate via the lower convex hull. Positions must be
/// strictly increasing; +inf samples are ignored.
Conjugate1D fenchel_conjugate_1d(std::span<const double> samples, std::span<const double> positions);

/// max_i s x_i - f_i evaluated at arbitrary slopes (finite window, no
/// extrapolation). O((N + M) log N).
std::vector<double> convex_conjugate_at(std::span<const double> samples,
                                        std::span<const double> positions,
                                        std::span<const double> slopes);

}  // namespace semiscale

#pragma once

#include <cstdint>

#include "semiscale/trainer.hpp"

namespace semiscale {

struct SyntheticOptions {
    int size = 64;
    /// Curves per image; negative draws 2 to 4 per image.
    int curves = -1;
    double noise_sigma = 0.05;
    /// Images whose mask fraction falls outside [min, max] are redrawn
    /// (only when curves are requested).
    double min_mask_fraction = 0.02;
    double max_mask_fraction = 0.20;
};

/// Dark smooth curves of width 1-4 px on a textured, unevenly lit background
/// with additive Gaussian noise; the mask is the curve support. Single-channel
/// images in [0, 1]; deterministic in (seed, count, options).
Dataset generate_synthetic_vessels(std::uint64_t seed, int count, const SyntheticOptions& options = {});

double mask_fraction(const Grid2& mask);

}  // namespace semiscale

#pragma once

#include <string>
#include <vector>

#include "semiscale/trainer.hpp"

namespace semiscale {

struct PatchSpec {
    int size = 64;
    int rows = 12;
    int cols = 12;
    /// A patch with an empty annotation is dropped when at least this share
    /// of its pixels lies outside the field-of-view mask.
    double outside_fraction = 0.99;
};

/// Evenly spread offsets floor(k (extent - size) / (count - 1)), k = 0..count-1.
std::vector<int> patch_offsets(int extent, int size, int count);

struct PatchOrigin {
    std::size_t image = 0;
    int x = 0;
    int y = 0;
};

struct PatchSet {
    Dataset data;
    std::vector<PatchOrigin> origins;
    std::size_t pre_filter = 0;
};

/// Cuts a rows x cols grid of patches from every image (row-major per image,
/// images in order) and applies the drop rule of PatchSpec.
PatchSet extract_patches(const std::vector<FeatureStack>& images, const std::vector<Grid2>& fov_masks,
                         const std::vector<Grid2>& annotations, const PatchSpec& spec = {});

struct DriveSet {
    std::vector<std::string> names;
    std::vector<FeatureStack> images;  // RGB planes
    std::vector<Grid2> fov_masks;
    std::vector<Grid2> annotations;
};

/// Reads root/images, root/mask and root/1st_manual (PNG/PGM/PPM), pairing the
/// files of the three folders by sorted name. Masks are binarised at 0.5.
DriveSet load_drive(const std::string& root);

}  // namespace semiscale

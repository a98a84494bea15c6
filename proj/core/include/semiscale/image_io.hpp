#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "semiscale/grid.hpp"

namespace semiscale {

class ImageFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 8-bit raster rescaled to [0, 1]: one plane (gray) or three (R, G, B).
struct Image {
    std::vector<Grid2> planes;

    int width() const { return planes.empty() ? 0 : planes.front().width(); }
    int height() const { return planes.empty() ? 0 : planes.front().height(); }
    int channels() const { return static_cast<int>(planes.size()); }
};

/// Reads PNG or binary/ASCII PGM and PPM, detected from the file contents.
/// Alpha is dropped; 16-bit data is rejected.
Image load_image(const std::string& path);

/// Luma 0.299 R + 0.587 G + 0.114 B; gray images are returned unchanged.
Grid2 to_grayscale(const Image& image);

/// Writes 8-bit data (values clamped to [0, 1], rounded). The format follows
/// the extension: .png, .pgm (gray only) or .ppm.
void save_image(const Image& image, const std::string& path);
void save_image(const Grid2& gray, const std::string& path);

}  // namespace semiscale

#include "semiscale/patches.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include "semiscale/image_io.hpp"

namespace semiscale {

namespace fs = std::filesystem;

std::vector<int> patch_offsets(int extent, int size, int count) {
    if (size > extent) throw std::invalid_argument("patch larger than the image");
    if (count < 1) throw std::invalid_argument("patch count must be >= 1");
    std::vector<int> out(static_cast<std::size_t>(count), 0);
    if (count == 1) return out;
    for (int k = 0; k < count; ++k) {
        out[k] = static_cast<int>(static_cast<long>(k) * (extent - size) / (count - 1));
    }
    return out;
}

PatchSet extract_patches(const std::vector<FeatureStack>& images, const std::vector<Grid2>& fov_masks,
                         const std::vector<Grid2>& annotations, const PatchSpec& spec) {
    if (images.size() != fov_masks.size() || images.size() != annotations.size()) {
        throw std::invalid_argument("images, masks and annotations differ in count");
    }
    PatchSet out;
    const int s = spec.size;
    for (std::size_t i = 0; i < images.size(); ++i) {
        require_uniform(images[i]);
        const Grid2& ref = images[i].front();
        if (!ref.same_shape(fov_masks[i]) || !ref.same_shape(annotations[i])) {
            throw std::invalid_argument("image " + std::to_string(i) + ": mask or annotation dimensions differ");
        }
        auto xs = patch_offsets(ref.width(), s, spec.cols);
        auto ys = patch_offsets(ref.height(), s, spec.rows);
        for (int py : ys) {
            for (int px : xs) {
                ++out.pre_filter;
                Grid2 target(s, s);
                double annotated = 0.0;
                double outside = 0.0;
                for (int y = 0; y < s; ++y) {
                    for (int x = 0; x < s; ++x) {
                        double a = annotations[i](px + x, py + y) > 0.5 ? 1.0 : 0.0;
                        target(x, y) = a;
                        annotated += a;
                        outside += fov_masks[i](px + x, py + y) > 0.5 ? 0.0 : 1.0;
                    }
                }
                if (annotated == 0.0 && outside >= spec.outside_fraction * s * s) continue;
                FeatureStack patch;
                for (const auto& plane : images[i]) {
                    Grid2 p(s, s);
                    for (int y = 0; y < s; ++y) {
                        for (int x = 0; x < s; ++x) p(x, y) = plane(px + x, py + y);
                    }
                    patch.push_back(std::move(p));
                }
                out.data.push_back(std::move(patch), std::move(target));
                out.origins.push_back({i, px, py});
            }
        }
    }
    return out;
}

namespace {

std::vector<fs::path> image_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("missing directory '" + dir.string() + "'");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png" || ext == ".pgm" || ext == ".ppm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

Grid2 binarised(const Image& img) {
    Grid2 g = to_grayscale(img);
    for (double& v : g.values()) v = v > 0.5 ? 1.0 : 0.0;
    return g;
}

}  // namespace

DriveSet load_drive(const std::string& root) {
    fs::path base(root);
    auto imgs = image_files(base / "images");
    auto masks = image_files(base / "mask");
    auto manual = image_files(base / "1st_manual");
    if (imgs.empty()) throw std::runtime_error("no images under '" + (base / "images").string() + "'");
    if (imgs.size() != masks.size() || imgs.size() != manual.size()) {
        throw std::runtime_error("DRIVE folders hold different numbers of files");
    }
    DriveSet out;
    for (std::size_t i = 0; i < imgs.size(); ++i) {
        Image img = load_image(imgs[i].string());
        FeatureStack planes = img.planes;
        if (planes.size() == 1) planes.assign(3, planes.front());
        out.names.push_back(imgs[i].filename().string());
        out.images.push_back(std::move(planes));
        out.fov_masks.push_back(binarised(load_image(masks[i].string())));
        out.annotations.push_back(binarised(load_image(manual[i].string())));
    }
    return out;
}

}  // namespace semiscale

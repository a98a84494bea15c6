#include "semiscale/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace semiscale {

namespace {

struct Sample {
    Grid2 image;
    Grid2 mask;
};

Sample draw_sample(std::mt19937_64& rng, const SyntheticOptions& opt) {
    const int n = opt.size;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    std::normal_distribution<double> gauss(0.0, 1.0);

    Grid2 image(n, n);
    Grid2 darkening(n, n, 0.0);
    Grid2 mask(n, n, 0.0);

    double base = uniform(0.45, 0.65);
    double gx = uniform(-0.2, 0.2);
    double gy = uniform(-0.2, 0.2);
    struct Wave { double kx, ky, phase, amp; };
    Wave waves[3];
    for (auto& w : waves) {
        double angle = uniform(0.0, 2.0 * std::numbers::pi);
        double freq = uniform(0.05, 0.3);
        w = {freq * std::cos(angle), freq * std::sin(angle), uniform(0.0, 2.0 * std::numbers::pi),
             uniform(0.01, 0.04)};
    }
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            double v = base + gx * (x / double(n) - 0.5) + gy * (y / double(n) - 0.5);
            for (const auto& w : waves) v += w.amp * std::sin(w.kx * x + w.ky * y + w.phase);
            image(x, y) = v;
        }
    }

    int curves = opt.curves >= 0 ? opt.curves : static_cast<int>(2 + rng() % 3);
    for (int c = 0; c < curves; ++c) {
        double width = uniform(1.0, 4.0);
        double half = width / 2.0;
        double contrast = uniform(0.2, 0.4);
        double px = uniform(0.0, n - 1.0);
        double py = uniform(0.0, n - 1.0);
        double heading = uniform(0.0, 2.0 * std::numbers::pi);
        double drift = uniform(-0.03, 0.03);
        double length = uniform(0.8 * n, 1.6 * n);
        const double step = 0.5;
        for (double s = 0.0; s < length; s += step) {
            int x0 = std::max(0, static_cast<int>(std::floor(px - half - 1.0)));
            int x1 = std::min(n - 1, static_cast<int>(std::ceil(px + half + 1.0)));
            int y0 = std::max(0, static_cast<int>(std::floor(py - half - 1.0)));
            int y1 = std::min(n - 1, static_cast<int>(std::ceil(py + half + 1.0)));
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    double d = std::hypot(x - px, y - py);
                    double profile = std::clamp(half + 0.5 - d, 0.0, 1.0) * contrast;
                    darkening(x, y) = std::max(darkening(x, y), profile);
                    if (d <= half) mask(x, y) = 1.0;
                }
            }
            heading += drift + 0.08 * gauss(rng);
            px += step * std::cos(heading);
            py += step * std::sin(heading);
            // Reflect off the borders so curves stay in view.
            if (px < 0.0 || px > n - 1.0) {
                heading = std::numbers::pi - heading;
                px = std::clamp(px, 0.0, n - 1.0);
            }
            if (py < 0.0 || py > n - 1.0) {
                heading = -heading;
                py = std::clamp(py, 0.0, n - 1.0);
            }
        }
    }
    for (std::size_t i = 0; i < image.size(); ++i) {
        double v = image.values()[i] - darkening.values()[i] + opt.noise_sigma * gauss(rng);
        image.values()[i] = std::clamp(v, 0.0, 1.0);
    }
    return {std::move(image), std::move(mask)};
}

}  // namespace

double mask_fraction(const Grid2& mask) {
    double on = 0.0;
    for (double v : mask.values()) on += v > 0.5 ? 1.0 : 0.0;
    return on / static_cast<double>(mask.size());
}

Dataset generate_synthetic_vessels(std::uint64_t seed, int count, const SyntheticOptions& options) {
    if (count < 0) throw std::invalid_argument("sample count must be >= 0");
    if (options.size < 4) throw std::invalid_argument("synthetic images need size >= 4");
    std::mt19937_64 rng(seed);
    Dataset out;
    for (int i = 0; i < count; ++i) {
        for (int attempt = 0;; ++attempt) {
            Sample s = draw_sample(rng, options);
            double f = mask_fraction(s.mask);
            bool accept = options.curves == 0 ||
                          (f >= options.min_mask_fraction && f <= options.max_mask_fraction);
            if (accept || attempt >= 1000) {
                if (!accept) throw std::runtime_error("could not draw a sample within the mask bounds");
                out.push_back({std::move(s.image)}, std::move(s.mask));
                break;
            }
        }
    }
    return out;
}

}  // namespace semiscale

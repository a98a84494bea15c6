#pragma once

// Generators and brute-force reference implementations shared by the unit
// and acceptance tests. The references are written from the defining
// formulas and deliberately avoid the library's own code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "semiscale/grid.hpp"
#include "semiscale/semifield.hpp"

namespace oracle {

using semiscale::Grid2;
using semiscale::SemifieldKind;
using semiscale::SemifieldTag;
using Rng = std::mt19937_64;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Grid2 random_grid(Rng& rng, int w, int h, double lo, double hi) {
    Grid2 g(w, h);
    for (double& v : g.values()) v = uniform(rng, lo, hi);
    return g;
}

// Values a test may feed to a kind without leaving its carrier set.
inline double sample_value(const SemifieldKind& kind, Rng& rng) {
    switch (kind.tag()) {
        case SemifieldTag::Linear: return uniform(rng, -4.0, 4.0);
        case SemifieldTag::Root: return uniform(rng, 0.1, 3.0);
        default: return uniform(rng, -1.5, 1.5);
    }
}

// Scalar operations straight from the definitions.
inline double plus(const SemifieldKind& k, double a, double b) {
    switch (k.tag()) {
        case SemifieldTag::Linear: return a + b;
        case SemifieldTag::Root: {
            double p = k.parameter();
            return std::pow(std::pow(a, p) + std::pow(b, p), 1.0 / p);
        }
        case SemifieldTag::Log: {
            double mu = k.parameter();
            return std::log(std::exp(mu * a) + std::exp(mu * b)) / mu;
        }
        case SemifieldTag::TropicalMax: return std::max(a, b);
        case SemifieldTag::TropicalMin: return std::min(a, b);
    }
    return 0.0;
}

inline double times(const SemifieldKind& k, double a, double b) {
    switch (k.tag()) {
        case SemifieldTag::Linear:
        case SemifieldTag::Root: return a * b;
        default: return a + b;
    }
}

// out(x) = (+)_d k(d) (x) f(src(x - d)), where `src(i, n)` maps an
// out-of-range coordinate to a source index or -1 (skip the tap).
template <class SourceMap>
Grid2 convolve_mapped(const SemifieldKind& kind, const std::vector<double>& taps, int radius, const Grid2& f,
                      SourceMap src) {
    const int side = 2 * radius + 1;
    Grid2 out(f.width(), f.height());
    for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < f.width(); ++x) {
            bool first = true;
            double acc = kind.zero();
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    int sx = src(x - dx, f.width());
                    int sy = src(y - dy, f.height());
                    if (sx < 0 || sy < 0) continue;
                    double term = times(kind, taps[(dy + radius) * side + (dx + radius)], f(sx, sy));
                    if (kind.is_zero(term) || std::isnan(term)) continue;
                    acc = first ? term : plus(kind, acc, term);
                    first = false;
                }
            }
            out(x, y) = acc;
        }
    }
    return out;
}

inline int zero_pad_index(int i, int n) { return i >= 0 && i < n ? i : -1; }
inline int replicate_index(int i, int n) { return std::clamp(i, 0, n - 1); }
inline int periodic_index(int i, int n) { return ((i % n) + n) % n; }
// Mirror about the edge pixels, which are not repeated: -1 -> 1, n -> n - 2.
inline int reflect_index(int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return i;
}

inline Grid2 convolve_zero_padded(const SemifieldKind& kind, const std::vector<double>& taps, int radius,
                                  const Grid2& f) {
    return convolve_mapped(kind, taps, radius, f, zero_pad_index);
}

inline Grid2 convolve_replicate(const SemifieldKind& kind, const std::vector<double>& taps, int radius,
                                const Grid2& f) {
    return convolve_mapped(kind, taps, radius, f, replicate_index);
}

// Direct centred DFT of an even field: sum_x f(x) cos(w . x) h^2 at the
// frequencies 2 pi j / (n h).
inline Grid2 cosine_dft(const Grid2& f, double step) {
    const int w = f.width();
    const int h = f.height();
    Grid2 out(w, h);
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            double wx = 2.0 * std::numbers::pi * (i - w / 2) / (w * step);
            double wy = 2.0 * std::numbers::pi * (j - h / 2) / (h * step);
            double acc = 0.0;
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    acc += f(x, y) * std::cos(wx * (x - w / 2) * step + wy * (y - h / 2) * step);
                }
            }
            out(i, j) = acc * step * step;
        }
    }
    return out;
}

// sup_x f(x) - w.x (max) or inf_x (min) over the centred lattice.
inline double tropical_transform_at(bool is_max, const Grid2& f, double step, double wx, double wy) {
    double best = is_max ? -kInf : kInf;
    for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < f.width(); ++x) {
            if (std::isinf(f(x, y))) continue;
            double c = f(x, y) - (wx * (x - f.width() / 2) + wy * (y - f.height() / 2)) * step;
            best = is_max ? std::max(best, c) : std::min(best, c);
        }
    }
    return best;
}

// Sum of centred, periodically wrapped Gaussians: even on the centred
// lattice and with a strictly positive discrete spectrum.
inline Grid2 periodic_gaussian_mixture(Rng& rng, int n, int bumps = 3, double min_sigma = 0.6,
                                       double max_sigma = 1.6) {
    Grid2 g(n, n, 0.0);
    for (int b = 0; b < bumps; ++b) {
        double amp = uniform(rng, 0.2, 1.2);
        double sx = uniform(rng, min_sigma, max_sigma);
        double sy = uniform(rng, min_sigma, max_sigma);
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) {
                for (int my = -2; my <= 2; ++my) {
                    for (int mx = -2; mx <= 2; ++mx) {
                        double cx = x - n / 2 + mx * n;
                        double cy = y - n / 2 + my * n;
                        g(x, y) += amp * std::exp(-cx * cx / (2 * sx * sx) - cy * cy / (2 * sy * sy));
                    }
                }
            }
        }
    }
    return g;
}

// Index of -c for centred coordinate c = i - n/2, wrapped periodically.
inline int mirror_index(int i, int n) {
    int c = -(i - n / 2);
    int lo = -(n / 2), hi = n - 1 - n / 2;
    if (c > hi) c -= n;
    if (c < lo) c += n;
    return c + n / 2;
}

// f(x) = f(-x) around the centre index, built by averaging with the mirror.
inline Grid2 even_noise(Rng& rng, int n, double lo, double hi) {
    Grid2 g = random_grid(rng, n, n, lo, hi);
    Grid2 out(n, n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            out(x, y) = 0.5 * (g(x, y) + g(mirror_index(x, n), mirror_index(y, n)));
        }
    }
    return out;
}

inline double max_abs(const Grid2& a, const Grid2& b, int margin = 0) {
    double worst = 0.0;
    for (int y = margin; y < a.height() - margin; ++y) {
        for (int x = margin; x < a.width() - margin; ++x) {
            if (a(x, y) == b(x, y)) continue;
            worst = std::max(worst, std::abs(a(x, y) - b(x, y)));
        }
    }
    return worst;
}

}  // namespace oracle

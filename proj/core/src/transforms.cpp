#include "semiscale/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace semiscale {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int mirror_index(int i, int n) {
    int c = -(i - n / 2);
    if (c > n - 1 - n / 2) c -= n;
    return c + n / 2;
}

Grid2 even_symmetrised(const Grid2& g) {
    Grid2 out(g.width(), g.height());
    for (int y = 0; y < g.height(); ++y) {
        int my = mirror_index(y, g.height());
        for (int x = 0; x < g.width(); ++x) {
            out(x, y) = 0.5 * (g(x, y) + g(mirror_index(x, g.width()), my));
        }
    }
    return out;
}

// Twiddle table for centred indices: angle 2 pi (jc * xc mod n) / n.
struct Twiddles {
    std::vector<double> cos_;
    std::vector<double> sin_;
    int n;

    explicit Twiddles(int size) : n(size) {
        cos_.resize(static_cast<std::size_t>(n) * n);
        sin_.resize(static_cast<std::size_t>(n) * n);
        for (int j = 0; j < n; ++j) {
            long jc = j - n / 2;
            for (int x = 0; x < n; ++x) {
                long xc = x - n / 2;
                long m = ((jc * xc) % n + n) % n;
                double angle = 2.0 * std::numbers::pi * static_cast<double>(m) / n;
                cos_[static_cast<std::size_t>(j) * n + x] = std::cos(angle);
                sin_[static_cast<std::size_t>(j) * n + x] = std::sin(angle);
            }
        }
    }
    double c(int j, int x) const { return cos_[static_cast<std::size_t>(j) * n + x]; }
    double s(int j, int x) const { return sin_[static_cast<std::size_t>(j) * n + x]; }
};

// Real part of the centred DFT sum_x g(x) exp(-i w.x) for even-symmetrised g.
Grid2 cosine_transform(const Grid2& input, double scale) {
    Grid2 g = even_symmetrised(input);
    const int w = g.width();
    const int h = g.height();
    Twiddles tx(w);
    Twiddles ty(h);
    std::vector<double> re(g.size());
    std::vector<double> im(g.size());
    for (int y = 0; y < h; ++y) {
        for (int j = 0; j < w; ++j) {
            double ar = 0.0;
            double ai = 0.0;
            for (int x = 0; x < w; ++x) {
                ar += g(x, y) * tx.c(j, x);
                ai -= g(x, y) * tx.s(j, x);
            }
            re[g.index(j, y)] = ar;
            im[g.index(j, y)] = ai;
        }
    }
    Grid2 out(w, h);
    for (int j = 0; j < w; ++j) {
        for (int k = 0; k < h; ++k) {
            double sum = 0.0;
            for (int y = 0; y < h; ++y) {
                sum += re[g.index(j, y)] * ty.c(k, y) + im[g.index(j, y)] * ty.s(k, y);
            }
            out(j, k) = scale * sum;
        }
    }
    return out;
}

double cell_area_of_dft(const Lattice& freq) {
    double hx = 2.0 * std::numbers::pi / (freq.width * freq.step_x);
    double hy = 2.0 * std::numbers::pi / (freq.height * freq.step_y);
    return hx * hy;
}

// sup_z g(z) - s.z for every s on the (sx, sy) product grid, separably.
Grid2 sup_transform_2d(const Grid2& g, const std::vector<double>& zx, const std::vector<double>& zy,
                       const std::vector<double>& sx, const std::vector<double>& sy) {
    const int gw = g.width();
    const int gh = g.height();
    const int fw = static_cast<int>(sx.size());
    const int fh = static_cast<int>(sy.size());
    std::vector<double> neg_sx(sx.size());
    std::vector<double> neg_sy(sy.size());
    std::transform(sx.begin(), sx.end(), neg_sx.begin(), [](double v) { return -v; });
    std::transform(sy.begin(), sy.end(), neg_sy.begin(), [](double v) { return -v; });

    // Stage 1 along x: G(a, row) = sup_x g(x, row) - sx[a] x = conj(-g)(-sx[a]).
    Grid2 stage(fw, gh);
    std::vector<double> row(static_cast<std::size_t>(gw));
    for (int y = 0; y < gh; ++y) {
        for (int x = 0; x < gw; ++x) row[static_cast<std::size_t>(x)] = -g(x, y);
        auto res = convex_conjugate_at(row, zx, neg_sx);
        for (int a = 0; a < fw; ++a) stage(a, y) = res[static_cast<std::size_t>(a)];
    }
    Grid2 out(fw, fh);
    std::vector<double> col(static_cast<std::size_t>(gh));
    for (int a = 0; a < fw; ++a) {
        for (int y = 0; y < gh; ++y) col[static_cast<std::size_t>(y)] = -stage(a, y);
        auto res = convex_conjugate_at(col, zy, neg_sy);
        for (int b = 0; b < fh; ++b) out(a, b) = res[static_cast<std::size_t>(b)];
    }
    return out;
}

std::vector<double> coords_x(const Lattice& l) {
    std::vector<double> v(static_cast<std::size_t>(l.width));
    for (int i = 0; i < l.width; ++i) v[static_cast<std::size_t>(i)] = l.coord_x(i);
    return v;
}

std::vector<double> coords_y(const Lattice& l) {
    std::vector<double> v(static_cast<std::size_t>(l.height));
    for (int j = 0; j < l.height; ++j) v[static_cast<std::size_t>(j)] = l.coord_y(j);
    return v;
}

std::vector<double> negated(std::vector<double> v) {
    for (double& e : v) e = -e;
    return v;
}

Grid2 negated(Grid2 g) {
    for (double& e : g.values()) e = -e;
    return g;
}

FrequencyGrid2 tropical_forward(const SemifieldKind& kind, const Grid2& field, double step,
                                const Lattice& freq) {
    for (double v : field.values()) require_valid(kind, v);
    Lattice space = Lattice::centred(field, step);
    auto zx = coords_x(space);
    auto zy = coords_y(space);
    auto wx = coords_x(freq);
    auto wy = coords_y(freq);
    if (kind.tag() == SemifieldTag::TropicalMax) {
        return {sup_transform_2d(field, zx, zy, wx, wy), freq};
    }
    // inf_x f(x) - w.x = -sup_x (-f)(x) - (-w).x
    return {negated(sup_transform_2d(negated(field), zx, zy, negated(wx), negated(wy))), freq};
}

Grid2 tropical_inverse(const SemifieldKind& kind, const FrequencyGrid2& spectrum,
                       const Lattice& space) {
    auto wx = coords_x(spectrum.lattice);
    auto wy = coords_y(spectrum.lattice);
    auto xs = coords_x(space);
    auto ys = coords_y(space);
    if (kind.tag() == SemifieldTag::TropicalMax) {
        // inf_w F(w) + w.x = -sup_w (-F)(w) - x.w
        return negated(sup_transform_2d(negated(spectrum.values), wx, wy, xs, ys));
    }
    // sup_w F(w) + w.x = sup_w F(w) - (-x).w
    return sup_transform_2d(spectrum.values, wx, wy, negated(xs), negated(ys));
}

}  // namespace

Lattice Lattice::dft_of(const Grid2& grid, double step) {
    return {grid.width(), grid.height(), 2.0 * std::numbers::pi / (grid.width() * step),
            2.0 * std::numbers::pi / (grid.height() * step)};
}

FrequencyGrid2 semifield_fourier(const SemifieldKind& kind, const Grid2& field, double spatial_step) {
    if (!(spatial_step > 0.0)) throw std::invalid_argument("spatial step must be positive");
    if (kind.is_tropical()) {
        return tropical_forward(kind, field, spatial_step, Lattice::centred(field, spatial_step));
    }
    for (double v : field.values()) require_valid(kind, v);
    const double area = spatial_step * spatial_step;
    const Lattice freq = Lattice::dft_of(field, spatial_step);
    if (kind.tag() == SemifieldTag::Linear) return {cosine_transform(field, area), freq};

    auto iso = isomorphism_to_reference(kind);
    Grid2 lifted = field;
    for (double& v : lifted.values()) v = iso.forward(v);
    Grid2 spectrum = cosine_transform(lifted, area);
    double largest = 0.0;
    for (double v : spectrum.values()) largest = std::max(largest, std::abs(v));
    for (double& v : spectrum.values()) {
        bool log_kind = kind.tag() == SemifieldTag::Log;
        if (v < 0.0 || (log_kind && v == 0.0)) {
            if (!log_kind && v >= -1e-12 * largest) {
                v = 0.0;
            } else {
                std::ostringstream msg;
                msg << "transform leaves the " << kind.name() << " semifield (lifted spectrum " << v
                    << ")";
                throw DomainError(msg.str());
            }
        }
        v = iso.backward(v);
    }
    return {std::move(spectrum), freq};
}

FrequencyGrid2 semifield_fourier(const SemifieldKind& kind, const Grid2& field, double spatial_step,
                                 const Lattice& frequencies) {
    if (!kind.is_tropical()) {
        throw std::invalid_argument("explicit frequency lattices are only supported for tropical kinds");
    }
    if (!(spatial_step > 0.0)) throw std::invalid_argument("spatial step must be positive");
    if (frequencies.width <= 0 || frequencies.height <= 0) {
        throw std::invalid_argument("frequency lattice must be non-empty");
    }
    return tropical_forward(kind, field, spatial_step, frequencies);
}

Grid2 semifield_fourier_inverse(const SemifieldKind& kind, const FrequencyGrid2& spectrum,
                                const InverseOptions& options) {
    if (kind.is_tropical()) {
        Lattice space = options.spatial;
        if (space.width <= 0 || space.height <= 0) {
            space = {spectrum.values.width(), spectrum.values.height(), spectrum.lattice.step_x,
                     spectrum.lattice.step_y};
        }
        Grid2 recovered = tropical_inverse(kind, spectrum, space);
        if (options.check) {
            if (space.step_x != space.step_y) {
                throw std::invalid_argument("invertibility check needs a square spatial lattice");
            }
            auto again = tropical_forward(kind, recovered, space.step_x, spectrum.lattice);
            double worst = 0.0;
            for (std::size_t i = 0; i < again.values.size(); ++i) {
                double a = again.values.values()[i];
                double b = spectrum.values.values()[i];
                if (a == b) continue;
                worst = std::max(worst, std::abs(a - b));
            }
            if (worst > options.tolerance) {
                std::ostringstream msg;
                msg << "spectrum is not in the image of the " << kind.name()
                    << " transform (envelope differs by " << worst << ")";
                throw NonInvertibleError(msg.str());
            }
        }
        return recovered;
    }

    const double scale = 1.0 / (spectrum.values.size() * cell_area_of_dft(spectrum.lattice));
    if (kind.tag() == SemifieldTag::Linear) return cosine_transform(spectrum.values, scale);
    auto iso = isomorphism_to_reference(kind);
    Grid2 lifted = spectrum.values;
    for (double& v : lifted.values()) v = iso.forward(v);
    Grid2 out = cosine_transform(lifted, scale);
    double largest = 0.0;
    for (double v : out.values()) largest = std::max(largest, std::abs(v));
    for (double& v : out.values()) {
        if (v <= 0.0) {
            if (kind.tag() == SemifieldTag::Root && v >= -1e-12 * largest) {
                v = 0.0;
            } else {
                throw NonInvertibleError("inverse transform leaves the " + kind.name() + " semifield");
            }
        }
        v = iso.backward(v);
    }
    return out;
}

FrequencyGrid2 tropical_fourier_bruteforce(const SemifieldKind& kind, const Grid2& field,
                                           double spatial_step, const Lattice& frequencies) {
    if (!kind.is_tropical()) throw std::invalid_argument("brute-force transform is tropical only");
    const bool is_max = kind.tag() == SemifieldTag::TropicalMax;
    Lattice space = Lattice::centred(field, spatial_step);
    Grid2 out(frequencies.width, frequencies.height);
    for (int b = 0; b < frequencies.height; ++b) {
        for (int a = 0; a < frequencies.width; ++a) {
            Vec2 w = frequencies.at(a, b);
            double best = kind.zero();
            for (int y = 0; y < field.height(); ++y) {
                for (int x = 0; x < field.width(); ++x) {
                    double v = field(x, y);
                    if (v == kind.zero()) continue;
                    double cand = v - dot(w, space.at(x, y));
                    best = is_max ? std::max(best, cand) : std::min(best, cand);
                }
            }
            out(a, b) = best;
        }
    }
    return {std::move(out), frequencies};
}

std::vector<double> convex_conjugate_at(std::span<const double> samples,
                                        std::span<const double> positions,
                                        std::span<const double> slopes) {
    if (samples.size() != positions.size()) {
        throw std::invalid_argument("samples and positions differ in length");
    }
    for (std::size_t i = 1; i < positions.size(); ++i) {
        if (!(positions[i] > positions[i - 1])) {
            throw std::invalid_argument("positions must be strictly increasing");
        }
    }
    std::vector<double> out(slopes.size(), -kInf);
    // Lower convex hull of the finite samples.
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = samples[i];
        if (f == kInf) continue;
        if (std::isnan(f)) throw std::invalid_argument("NaN sample in conjugate");
        if (f == -kInf) {
            std::fill(out.begin(), out.end(), kInf);
            return out;
        }
        while (hull.size() >= 2) {
            std::size_t o = hull[hull.size() - 2];
            std::size_t a = hull.back();
            double cross = (positions[a] - positions[o]) * (f - samples[o]) -
                           (samples[a] - samples[o]) * (positions[i] - positions[o]);
            if (cross > 0.0) break;
            hull.pop_back();
        }
        hull.push_back(i);
    }
    if (hull.empty()) return out;
    std::vector<double> edge_slopes(hull.size() - 1);
    for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
        std::size_t a = hull[e];
        std::size_t b = hull[e + 1];
        edge_slopes[e] = (samples[b] - samples[a]) / (positions[b] - positions[a]);
    }
    for (std::size_t k = 0; k < slopes.size(); ++k) {
        double s = slopes[k];
        auto vertex = static_cast<std::size_t>(
            std::lower_bound(edge_slopes.begin(), edge_slopes.end(), s) - edge_slopes.begin());
        std::size_t i = hull[vertex];
        out[k] = s * positions[i] - samples[i];
    }
    return out;
}

Conjugate1D fenchel_conjugate_1d(std::span<const double> samples, std::span<const double> positions) {
    if (samples.size() != positions.size()) {
        throw std::invalid_argument("samples and positions differ in length");
    }
    std::vector<double> xs;
    std::vector<double> fs;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i > 0 && !(positions[i] > positions[i - 1])) {
            throw std::invalid_argument("positions must be strictly increasing");
        }
        if (samples[i] == kInf) continue;
        xs.push_back(positions[i]);
        fs.push_back(samples[i]);
    }
    Conjugate1D result;
    // Hull edge slopes are the natural dual grid.
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        while (hull.size() >= 2) {
            std::size_t o = hull[hull.size() - 2];
            std::size_t a = hull.back();
            double cross = (xs[a] - xs[o]) * (fs[i] - fs[o]) - (fs[a] - fs[o]) * (xs[i] - xs[o]);
            if (cross > 0.0) break;
            hull.pop_back();
        }
        hull.push_back(i);
    }
    for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
        std::size_t a = hull[e];
        std::size_t b = hull[e + 1];
        double s = (fs[b] - fs[a]) / (xs[b] - xs[a]);
        result.slopes.push_back(s);
        result.values.push_back(s * xs[a] - fs[a]);
    }
    return result;
}

double Conjugate1D::value_at(double s) const {
    if (slopes.empty() || s < slopes.front() || s > slopes.back()) return kInf;
    auto it = std::lower_bound(slopes.begin(), slopes.end(), s);
    auto k = static_cast<std::size_t>(it - slopes.begin());
    if (slopes[k] == s) return values[k];
    // f* is affine between consecutive hull slopes.
    double s0 = slopes[k - 1];
    double s1 = slopes[k];
    double u = (s - s0) / (s1 - s0);
    return values[k - 1] + u * (values[k] - values[k - 1]);
}

}  // namespace semiscale

#include "semiscale/semiconv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace semiscale {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Maps padded coordinates [-radius, n + radius) to a source index or -1.
std::vector<int> boundary_map(int n, int radius, BoundaryPolicy boundary) {
    std::vector<int> map(static_cast<std::size_t>(n + 2 * radius));
    for (int i = -radius; i < n + radius; ++i) {
        int src = i;
        switch (boundary) {
            case BoundaryPolicy::Replicate: src = std::clamp(i, 0, n - 1); break;
            case BoundaryPolicy::Reflect: {
                if (n == 1) {
                    src = 0;
                    break;
                }
                int period = 2 * (n - 1);
                int m = ((i % period) + period) % period;
                src = m < n ? m : period - m;
                break;
            }
            case BoundaryPolicy::ZeroPad: src = (i >= 0 && i < n) ? i : -1; break;
            case BoundaryPolicy::Periodic: src = ((i % n) + n) % n; break;
        }
        map[static_cast<std::size_t>(i + radius)] = src;
    }
    return map;
}

void require_same_kind(const SemifieldKind& kind, const SampledKernel& kernel) {
    if (!(kind == kernel.kind)) {
        throw std::invalid_argument("kernel sampled for " + kernel.kind.name() +
                                    " used in a " + kind.name() + " convolution");
    }
}

// Calls visit(tap_index, source_index) for every window entry of output pixel
// (x, y), in ascending source linear index.
template <class Visit>
inline void for_each_tap(int x, int y, int radius, int side, int width, const std::vector<int>& xmap,
                         const std::vector<int>& ymap, Visit&& visit) {
    for (int sy = y - radius; sy <= y + radius; ++sy) {
        int row = ymap[static_cast<std::size_t>(sy + radius)];
        if (row < 0) continue;
        int tap_row = (y - sy + radius) * side;
        for (int sx = x - radius; sx <= x + radius; ++sx) {
            int col = xmap[static_cast<std::size_t>(sx + radius)];
            if (col < 0) continue;
            visit(tap_row + (x - sx + radius), row * width + col);
        }
    }
}

// Field padded by `radius` on every side according to the boundary policy;
// ZeroPad cells hold `fill`. Row stride is width + 2 * radius.
std::vector<double> padded(const Grid2& field, int radius, const std::vector<int>& xmap,
                           const std::vector<int>& ymap, double fill) {
    const int pw = field.width() + 2 * radius;
    const int ph = field.height() + 2 * radius;
    std::vector<double> out(static_cast<std::size_t>(pw) * static_cast<std::size_t>(ph), fill);
    const double* f = field.values().data();
    for (int py = 0; py < ph; ++py) {
        int row = ymap[static_cast<std::size_t>(py)];
        if (row < 0) continue;
        for (int px = 0; px < pw; ++px) {
            int col = xmap[static_cast<std::size_t>(px)];
            if (col >= 0) out[static_cast<std::size_t>(py) * pw + px] = f[static_cast<std::size_t>(row) * field.width() + col];
        }
    }
    return out;
}

// Row y of the output, tap (dx, dy) reads padded[(y - dy + r) * pw + (x - dx + r)].
inline const double* tap_row(const std::vector<double>& pad, int pw, int r, int y, int dx, int dy) {
    return pad.data() + static_cast<std::size_t>(y - dy + r) * pw + (r - dx);
}

Grid2 convolve_linear(const SampledKernel& kernel, const Grid2& field, BoundaryPolicy boundary) {
    const int r = kernel.radius;
    const int w = field.width();
    const int h = field.height();
    const int pw = w + 2 * r;
    auto pad = padded(field, r, boundary_map(w, r, boundary), boundary_map(h, r, boundary), 0.0);
    Grid2 out(w, h, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        double* acc = out.values().data() + static_cast<std::size_t>(y) * w;
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                const double kv = kernel.at(dx, dy);
                const double* src = tap_row(pad, pw, r, y, dx, dy);
                for (int x = 0; x < w; ++x) acc[x] += kv * src[x];
            }
        }
    }
    return out;
}

// First tap, visited from (r, r) down to (-r, -r), whose sum reproduces the
// extremum `target` at output (x, y). With a monotone boundary map this order
// is ascending in source index.
inline int first_winner(const SampledKernel& kernel, const std::vector<double>& pad, int pw, int x, int y,
                        double target) {
    const int r = kernel.radius;
    for (int dy = r; dy >= -r; --dy) {
        const double* row = tap_row(pad, pw, r, y, 0, dy) + x;
        for (int dx = r; dx >= -r; --dx) {
            if (kernel.at(dx, dy) + row[-dx] == target) return static_cast<int>(kernel.index(dx, dy));
        }
    }
    return -1;
}

template <bool IsMax>
Grid2 convolve_tropical_impl(const SemifieldKind& kind, const SampledKernel& kernel,
                             const Grid2& field, BoundaryPolicy boundary, TropicalTrace* trace) {
    const int r = kernel.radius;
    const int w = field.width();
    const int h = field.height();
    const int pw = w + 2 * r;
    const double zero = kind.zero();
    auto xmap = boundary_map(w, r, boundary);
    auto ymap = boundary_map(h, r, boundary);
    auto pad = padded(field, r, xmap, ymap, zero);
    const bool monotone = boundary == BoundaryPolicy::Replicate || boundary == BoundaryPolicy::ZeroPad;
    Grid2 out(w, h, zero);
    if (trace) {
        trace->tap.assign(out.size(), -1);
        trace->source.assign(out.size(), -1);
    }
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        double* best = out.values().data() + static_cast<std::size_t>(y) * w;
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                const double kv = kernel.at(dx, dy);
                const double* src = tap_row(pad, pw, r, y, dx, dy);
                for (int x = 0; x < w; ++x) {
                    double v = kv + src[x];
                    best[x] = IsMax ? std::max(best[x], v) : std::min(best[x], v);
                }
            }
        }
        if (!trace) continue;
        if (monotone) {
            for (int x = 0; x < w; ++x) {
                if (best[x] == zero) continue;
                const int tap = first_winner(kernel, pad, pw, x, y, best[x]);
                const int dx = tap % kernel.side() - r;
                const int dy = tap / kernel.side() - r;
                const std::size_t idx = static_cast<std::size_t>(y) * w + x;
                trace->tap[idx] = tap;
                trace->source[idx] = ymap[static_cast<std::size_t>(y - dy + r)] * w +
                                     xmap[static_cast<std::size_t>(x - dx + r)];
            }
            continue;
        }
        // Non-monotone maps: rescan for the lowest source attaining the
        // extremum; the sums are recomputed with identical operands. Among
        // taps reading the same source the highest tap index is kept, as in
        // the monotone path.
        std::int32_t* tap_out = trace->tap.data() + static_cast<std::size_t>(y) * w;
        std::int32_t* src_out = trace->source.data() + static_cast<std::size_t>(y) * w;
        for (int dy = -r; dy <= r; ++dy) {
            const int row = ymap[static_cast<std::size_t>(y - dy + r)];
            for (int dx = -r; dx <= r; ++dx) {
                const double kv = kernel.at(dx, dy);
                const double* src = tap_row(pad, pw, r, y, dx, dy);
                const auto tap = static_cast<std::int32_t>(kernel.index(dx, dy));
                for (int x = 0; x < w; ++x) {
                    if (best[x] == zero || kv + src[x] != best[x]) continue;
                    const int col = xmap[static_cast<std::size_t>(x - dx + r)];
                    const auto s = static_cast<std::int32_t>(row * w + col);
                    if (src_out[x] < 0 || s <= src_out[x]) {
                        src_out[x] = s;
                        tap_out[x] = tap;
                    }
                }
            }
        }
    }
    return out;
}

Grid2 convolve_tropical(const SemifieldKind& kind, const SampledKernel& kernel, const Grid2& field,
                        BoundaryPolicy boundary, TropicalTrace* trace) {
    if (kind.tag() == SemifieldTag::TropicalMax) {
        return convolve_tropical_impl<true>(kind, kernel, field, boundary, trace);
    }
    return convolve_tropical_impl<false>(kind, kernel, field, boundary, trace);
}

void require_field(const SemifieldKind& kind, const Grid2& field) {
    for (double v : field.values()) require_valid(kind, v);
}

}  // namespace

BoundaryPolicy parse_boundary(const std::string& text) {
    if (text == "replicate") return BoundaryPolicy::Replicate;
    if (text == "reflect") return BoundaryPolicy::Reflect;
    if (text == "zero") return BoundaryPolicy::ZeroPad;
    if (text == "periodic") return BoundaryPolicy::Periodic;
    throw std::invalid_argument("unknown boundary policy '" + text + "'");
}

Grid2 convolve(const SemifieldKind& kind, const SampledKernel& kernel, const Grid2& field,
               BoundaryPolicy boundary) {
    require_same_kind(kind, kernel);
    require_field(kind, field);
    switch (kind.tag()) {
        case SemifieldTag::Linear: return convolve_linear(kernel, field, boundary);
        case SemifieldTag::Root: {
            const double p = kind.parameter();
            if (p < 0.0) {
                throw std::invalid_argument("root convolution is implemented for p > 0");
            }
            SampledKernel lifted = kernel;
            lifted.kind = SemifieldKind::linear();
            for (double& v : lifted.values) v = std::pow(v, p);
            Grid2 lifted_field = field;
            for (double& v : lifted_field.values()) v = std::pow(v, p);
            Grid2 out = convolve_linear(lifted, lifted_field, boundary);
            for (double& v : out.values()) v = std::pow(std::max(v, 0.0), 1.0 / p);
            return out;
        }
        case SemifieldTag::Log:
            return convolve_log_stable(kind.parameter(), kernel, field, boundary);
        case SemifieldTag::TropicalMax:
        case SemifieldTag::TropicalMin: return convolve_tropical(kind, kernel, field, boundary, nullptr);
    }
    return field;
}

Grid2 convolve_log_stable(double mu, const SampledKernel& kernel, const Grid2& field,
                          BoundaryPolicy boundary) {
    const auto kind = SemifieldKind::log(mu);
    require_same_kind(kind, kernel);
    const int r = kernel.radius;
    const int side = kernel.side();
    const int w = field.width();
    const int h = field.height();
    auto xmap = boundary_map(w, r, boundary);
    auto ymap = boundary_map(h, r, boundary);
    const double* k = kernel.values.data();
    const double* f = field.values().data();
    const double zero = kind.zero();
    Grid2 out(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double shift = -kInf;
            for_each_tap(x, y, r, side, w, xmap, ymap, [&](int tap, int src) {
                if (k[tap] == zero || f[src] == zero) return;
                shift = std::max(shift, mu * (k[tap] + f[src]));
            });
            if (shift == -kInf) {
                out(x, y) = zero;
                continue;
            }
            double sum = 0.0;
            for_each_tap(x, y, r, side, w, xmap, ymap, [&](int tap, int src) {
                if (k[tap] == zero || f[src] == zero) return;
                sum += std::exp(mu * (k[tap] + f[src]) - shift);
            });
            out(x, y) = (shift + std::log(sum)) / mu;
        }
    }
    return out;
}

Grid2 convolve_tropical_traced(const SemifieldKind& kind, const SampledKernel& kernel,
                               const Grid2& field, BoundaryPolicy boundary, TropicalTrace& trace) {
    if (!kind.is_tropical()) throw std::invalid_argument("traced convolution needs a tropical kind");
    require_same_kind(kind, kernel);
    return convolve_tropical(kind, kernel, field, boundary, &trace);
}

std::vector<double> quadratic_erosion_1d(const std::vector<double>& samples, double a) {
    const int n = static_cast<int>(samples.size());
    std::vector<double> out(samples.size(), kInf);
    if (n == 0) return out;
    if (!(a > 0.0)) throw std::invalid_argument("quadratic coefficient must be positive");
    // Lower envelope of parabolas q -> samples[q] + a (p - q)^2.
    std::vector<int> vertex(samples.size());
    std::vector<double> boundary(samples.size() + 1);
    int k = -1;
    for (int q = 0; q < n; ++q) {
        double fq = samples[static_cast<std::size_t>(q)];
        if (fq == kInf) continue;
        if (std::isnan(fq) || fq == -kInf) throw std::invalid_argument("erosion input must be > -inf");
        while (k >= 0) {
            int v = vertex[static_cast<std::size_t>(k)];
            double fv = samples[static_cast<std::size_t>(v)];
            double s = ((fq + a * q * q) - (fv + a * v * v)) / (2.0 * a * (q - v));
            if (s <= boundary[static_cast<std::size_t>(k)]) {
                --k;
                continue;
            }
            ++k;
            vertex[static_cast<std::size_t>(k)] = q;
            boundary[static_cast<std::size_t>(k)] = s;
            boundary[static_cast<std::size_t>(k + 1)] = kInf;
            break;
        }
        if (k < 0) {
            k = 0;
            vertex[0] = q;
            boundary[0] = -kInf;
            boundary[1] = kInf;
        }
    }
    if (k < 0) return out;
    int j = 0;
    for (int p = 0; p < n; ++p) {
        while (boundary[static_cast<std::size_t>(j + 1)] < p) ++j;
        int v = vertex[static_cast<std::size_t>(j)];
        double d = p - v;
        out[static_cast<std::size_t>(p)] = samples[static_cast<std::size_t>(v)] + a * d * d;
    }
    return out;
}

MorphologyResult convolve_fast_quadratic_morphological(const SemifieldKind& kind, double t,
                                                       const Mat2& metric, const Grid2& field) {
    if (!kind.is_tropical()) {
        throw std::invalid_argument("morphological fast path needs a tropical semifield");
    }
    KernelSpec spec{kind, 2.0, t, metric};
    spec.validate();
    require_field(kind, field);

    Mat2 gram = metric.transposed() * metric;
    double scale = std::max(std::abs(gram.a), std::abs(gram.d));
    bool axis_aligned = std::abs(gram.b) <= 1e-12 * scale && std::abs(gram.c) <= 1e-12 * scale;
    if (!axis_aligned) {
        int radius = std::max(field.width(), field.height());
        auto kernel = sample_kernel(spec, radius);
        return {convolve(kind, kernel, field, BoundaryPolicy::ZeroPad), true};
    }

    const bool is_max = kind.tag() == SemifieldTag::TropicalMax;
    const double sign = is_max ? -1.0 : 1.0;
    const double ax = gram.a / (2.0 * t);
    const double ay = gram.d / (2.0 * t);
    const int w = field.width();
    const int h = field.height();
    Grid2 out(w, h);
    // Erosion of sign * f, i.e. dilation of f when is_max.
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        std::vector<double> row(static_cast<std::size_t>(w));
        for (int x = 0; x < w; ++x) row[static_cast<std::size_t>(x)] = sign * field(x, y);
        auto eroded = quadratic_erosion_1d(row, ax);
        for (int x = 0; x < w; ++x) out(x, y) = eroded[static_cast<std::size_t>(x)];
    }
#pragma omp parallel for schedule(static)
    for (int x = 0; x < w; ++x) {
        std::vector<double> col(static_cast<std::size_t>(h));
        for (int y = 0; y < h; ++y) col[static_cast<std::size_t>(y)] = out(x, y);
        auto eroded = quadratic_erosion_1d(col, ay);
        for (int y = 0; y < h; ++y) out(x, y) = sign * eroded[static_cast<std::size_t>(y)];
    }
    return {std::move(out), false};
}

ConvolutionGradient convolve_backward(const SemifieldKind& kind, const SampledKernel& kernel,
                                      const Grid2& field, const Grid2& output, const Grid2& upstream,
                                      BoundaryPolicy boundary, const TropicalTrace* trace) {
    require_same_kind(kind, kernel);
    if (!field.same_shape(output) || !field.same_shape(upstream)) {
        throw std::invalid_argument("convolution gradient shapes disagree");
    }
    const int r = kernel.radius;
    const int side = kernel.side();
    const int w = field.width();
    const int h = field.height();
    ConvolutionGradient grad{std::vector<double>(kernel.values.size(), 0.0), Grid2(w, h, 0.0)};
    double* gk = grad.taps.data();
    double* gf = grad.field.values().data();
    const double* k = kernel.values.data();
    const double* f = field.values().data();
    const double* up = upstream.values().data();

    if (kind.is_tropical()) {
        if (!trace || trace->tap.size() != field.size()) {
            throw std::logic_error("tropical convolution gradient needs the forward trace");
        }
        for (std::size_t p = 0; p < field.size(); ++p) {
            if (trace->tap[p] < 0 || up[p] == 0.0) continue;
            gk[trace->tap[p]] += up[p];
            gf[trace->source[p]] += up[p];
        }
        return grad;
    }

    auto xmap = boundary_map(w, r, boundary);
    auto ymap = boundary_map(h, r, boundary);
    switch (kind.tag()) {
        case SemifieldTag::Linear:
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    double g = up[output.index(x, y)];
                    if (g == 0.0) continue;
                    for_each_tap(x, y, r, side, w, xmap, ymap, [&](int tap, int src) {
                        gk[tap] += g * f[src];
                        gf[src] += g * k[tap];
                    });
                }
            }
            break;
        case SemifieldTag::Log: {
            const double mu = kind.parameter();
            const double zero = kind.zero();
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    double g = up[output.index(x, y)];
                    double o = output(x, y);
                    if (g == 0.0 || o == zero) continue;
                    for_each_tap(x, y, r, side, w, xmap, ymap, [&](int tap, int src) {
                        if (k[tap] == zero || f[src] == zero) return;
                        double weight = std::exp(mu * (k[tap] + f[src] - o));
                        gk[tap] += g * weight;
                        gf[src] += g * weight;
                    });
                }
            }
            break;
        }
        case SemifieldTag::Root: {
            const double p = kind.parameter();
            std::vector<double> kp(kernel.values.size());
            for (std::size_t i = 0; i < kp.size(); ++i) kp[i] = std::pow(k[i], p);
            std::vector<double> fp(field.size());
            for (std::size_t i = 0; i < fp.size(); ++i) fp[i] = std::pow(f[i], p);
            std::vector<double> gkp(kp.size(), 0.0);
            std::vector<double> gfp(fp.size(), 0.0);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    double o = output(x, y);
                    double g = up[output.index(x, y)];
                    if (g == 0.0 || !(o > 0.0)) continue;
                    // out = L^(1/p), dout/dL = out / (p L) = out^(1-p) / p
                    double g_lift = g * std::pow(o, 1.0 - p) / p;
                    for_each_tap(x, y, r, side, w, xmap, ymap, [&](int tap, int src) {
                        gkp[tap] += g_lift * fp[src];
                        gfp[src] += g_lift * kp[tap];
                    });
                }
            }
            for (std::size_t i = 0; i < kp.size(); ++i) {
                if (gkp[i] != 0.0) gk[i] = gkp[i] * p * std::pow(k[i], p - 1.0);
            }
            for (std::size_t i = 0; i < fp.size(); ++i) {
                if (gfp[i] != 0.0) gf[i] = gfp[i] * p * std::pow(f[i], p - 1.0);
            }
            break;
        }
        default: break;
    }
    return grad;
}

}  // namespace semiscale

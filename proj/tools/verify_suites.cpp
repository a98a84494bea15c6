#include "verify_suites.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "semiscale/gradcheck.hpp"
#include "semiscale/kernel.hpp"
#include "semiscale/layers.hpp"
#include "semiscale/semiconv.hpp"
#include "semiscale/semifield.hpp"
#include "semiscale/transforms.hpp"

namespace semiscale::tools {

namespace {

using Rng = std::mt19937_64;

struct Outcome {
    bool passed;
    std::string detail;
};

std::string num(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

Outcome within(double err, double tol) { return {err <= tol, "max error " + num(err) + " (tol " + num(tol) + ")"}; }

Grid2 random_field(Rng& rng, int w, int h, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Grid2 g(w, h);
    for (double& v : g.values()) v = u(rng);
    return g;
}

// Draw from the carrier set, hitting the semifield zero now and then.
double draw(const SemifieldKind& kind, Rng& rng, bool allow_zero) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (allow_zero && u(rng) < 0.1) return kind.zero();
    switch (kind.tag()) {
        case SemifieldTag::Linear: return -4.0 + 8.0 * u(rng);
        case SemifieldTag::Root: return 0.1 + 2.9 * u(rng);
        default: return -1.5 + 3.0 * u(rng);
    }
}

std::vector<SemifieldKind> axiom_kinds() {
    return {SemifieldKind::linear(),     SemifieldKind::root(2.0),      SemifieldKind::root(0.5),
            SemifieldKind::root(-1.5),   SemifieldKind::log(1.0),       SemifieldKind::log(-0.5),
            SemifieldKind::tropical_max(), SemifieldKind::tropical_min()};
}

Outcome axioms(const SemifieldKind& k, int triples, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    std::string which;
    auto check = [&](double lhs, double rhs, const char* name) {
        double d = metric(k, lhs, rhs);
        if (d > worst) {
            worst = d;
            which = name;
        }
    };
    for (int i = 0; i < triples; ++i) {
        double a = draw(k, rng, true);
        double b = draw(k, rng, true);
        double c = draw(k, rng, true);
        check(add(k, add(k, a, b), c), add(k, a, add(k, b, c)), "add associativity");
        check(add(k, a, b), add(k, b, a), "add commutativity");
        check(add(k, a, k.zero()), a, "additive identity");
        check(mul(k, mul(k, a, b), c), mul(k, a, mul(k, b, c)), "mul associativity");
        check(mul(k, a, b), mul(k, b, a), "mul commutativity");
        check(mul(k, a, k.one()), a, "multiplicative identity");
        check(mul(k, a, add(k, b, c)), add(k, mul(k, a, b), mul(k, a, c)), "distributivity");
        check(mul(k, a, k.zero()), k.zero(), "absorbing zero");
        if (!k.is_zero(a)) check(mul(k, a, inverse(k, a)), k.one(), "inverse");
    }
    Outcome o = within(worst, 1e-12);
    if (!which.empty()) o.detail += ", worst axiom: " + which;
    return o;
}

// Even field: f(x) = f(-x) in centred coordinates, as a positive mixture of
// centred Gaussians when `positive`.
Grid2 even_field(Rng& rng, int n, bool positive) {
    Grid2 g(n, n, 0.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int bumps = 3;
    for (int b = 0; b < bumps; ++b) {
        double amp = positive ? 0.2 + u(rng) : -1.0 + 2.0 * u(rng);
        double sx = 0.6 + u(rng);
        double sy = 0.6 + u(rng);
        // Periodised, so the discrete spectrum stays positive.
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
    if (!positive) {
        // Symmetrise random noise as well so the field is not just a mixture.
        Grid2 noise = random_field(rng, n, n, -0.1, 0.1);
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) {
                int mx = (n - x) % n;
                int my = (n - y) % n;
                g(x, y) += 0.5 * (noise(x, y) + noise(mx, my));
            }
        }
    }
    return g;
}

// Uniform noise blurred at t = 2. Sampled Gaussians only compose exactly up
// to aliasing near the Nyquist frequency, which white noise would expose.
Grid2 smooth_random_field(Rng& rng, int w, int h, double lo, double hi) {
    auto blur = sample_kernel({SemifieldKind::linear(), 2.0, 2.0, Mat2::identity()});
    return convolve(SemifieldKind::linear(), blur, random_field(rng, w, h, lo, hi), BoundaryPolicy::Reflect);
}

double lifted(const SemifieldKind& kind, double v) { return isomorphism_to_reference(kind).forward(v); }

// max |lift(a) - lift(b)| / max |lift(b)| over interior pixels.
double normwise_relative(const SemifieldKind& kind, const Grid2& a, const Grid2& b, int margin) {
    double num_max = 0.0;
    double den_max = 0.0;
    for (int y = margin; y < a.height() - margin; ++y) {
        for (int x = margin; x < a.width() - margin; ++x) {
            double la = lifted(kind, a(x, y));
            double lb = lifted(kind, b(x, y));
            num_max = std::max(num_max, std::abs(la - lb));
            den_max = std::max(den_max, std::abs(lb));
        }
    }
    return den_max > 0.0 ? num_max / den_max : num_max;
}

// One PDE layer on `channels` channels: convection, max-plus, min-plus,
// channel mixing, normalisation (eval mode).
struct PdeLayer {
    ConvectionSublayer conv;
    ScaleSpaceSublayer dilate;
    ScaleSpaceSublayer erode;
    AffineSublayer mix;
    ChannelNormSublayer norm;

    PdeLayer(int channels, Rng& rng)
        : conv(channels),
          dilate(channels, {SemifieldKind::tropical_max(), 2.0, BoundaryPolicy::Replicate, 0}),
          erode(channels, {SemifieldKind::tropical_min(), 2.0, BoundaryPolicy::Replicate, 0}),
          mix(channels, channels, false),
          norm(channels) {
        conv.initialize(rng);
        dilate.initialize(rng);
        erode.initialize(rng);
        mix.initialize(rng);
    }

    Batch run(const Batch& in) {
        Batch x = conv.forward(in, false);
        x = dilate.forward(x, false);
        x = erode.forward(x, false);
        x = mix.forward(x, false);
        return norm.forward(x, false);
    }
};

using Check = std::pair<std::string, std::function<Outcome()>>;

std::vector<Check> core_checks() {
    std::vector<Check> out;
    for (const auto& k : axiom_kinds()) {
        out.push_back({"axioms " + k.name(), [k] { return axioms(k, 2000, 11); }});
    }
    out.push_back({"tropical integral is sup/inf", [] {
                       Rng rng(5);
                       for (int i = 0; i < 200; ++i) {
                           Grid2 f = random_field(rng, 7, 5, -10, 10);
                           double mx = *std::max_element(f.values().begin(), f.values().end());
                           double mn = *std::min_element(f.values().begin(), f.values().end());
                           if (integrate(SemifieldKind::tropical_max(), f.values(), 0.3) != mx ||
                               integrate(SemifieldKind::tropical_min(), f.values(), 0.3) != mn) {
                               return Outcome{false, "mismatch on field " + std::to_string(i)};
                           }
                       }
                       return Outcome{true, "200 fields exact"};
                   }});
    return out;
}

std::vector<Check> kernel_checks() {
    std::vector<Check> out;
    struct Case {
        SemifieldKind kind;
        double alpha;
    };
    std::vector<Case> cases = {{SemifieldKind::linear(), 2},          {SemifieldKind::root(2), 2},
                               {SemifieldKind::root(0.5), 2},         {SemifieldKind::log(1), 2},
                               {SemifieldKind::log(-0.5), 2},         {SemifieldKind::tropical_max(), 2},
                               {SemifieldKind::tropical_max(), 1.5},  {SemifieldKind::tropical_max(), 3},
                               {SemifieldKind::tropical_min(), 2},    {SemifieldKind::tropical_min(), 1.5},
                               {SemifieldKind::tropical_min(), 3}};
    for (const auto& c : cases) {
        out.push_back({"fourier kernel " + c.kind.name() + " alpha " + num(c.alpha), [c] {
                           Rng rng(17);
                           std::uniform_real_distribution<double> u(0.0, 1.0);
                           double worst = 0.0;
                           for (int i = 0; i < 100; ++i) {
                               KernelSpec spec{c.kind, c.alpha, 0.1 + 2.0 * u(rng), Mat2::identity()};
                               Vec2 w{-1.0 + 2.0 * u(rng), -1.0 + 2.0 * u(rng)};
                               double lhs = fourier_kernel_value(spec, w);
                               double rhs = exp_semifield(
                                   c.kind, fourier_time_scale(c.kind, c.alpha) * std::pow(norm(w), c.alpha) * spec.t);
                               worst = std::max(worst, metric(c.kind, lhs, rhs));
                           }
                           return within(worst, 1e-12);
                       }});
    }
    out.push_back({"window mass is one", [] {
                       double worst = 0.0;
                       for (auto k : {SemifieldKind::linear(), SemifieldKind::root(2), SemifieldKind::root(0.5)}) {
                           for (double t : {0.3, 1.0, 4.0}) {
                               auto s = sample_kernel({k, 2.0, t, Mat2{1.2, 0.3, -0.1, 0.9}});
                               worst = std::max(worst, std::abs(accumulate(k, s.values) - 1.0));
                           }
                       }
                       return within(worst, 1e-12);
                   }});
    out.push_back({"large metric gives the identity", [] {
                       Rng rng(3);
                       Grid2 f = random_field(rng, 16, 16, 0.1, 1.0);
                       double worst = 0.0;
                       for (auto k : {SemifieldKind::linear(), SemifieldKind::tropical_max(), SemifieldKind::tropical_min()}) {
                           auto kernel = sample_kernel({k, 2.0, 1.0, Mat2::scaled(100.0)}, 2);
                           Grid2 g = convolve(k, kernel, f, BoundaryPolicy::Replicate);
                           worst = std::max(worst, max_abs_difference(f, g));
                       }
                       return within(worst, 1e-12);
                   }});
    out.push_back({"metric scaling equals time scaling", [] {
                       // k_1(s H x) = k_{s^-alpha}(H x) after window normalisation;
                       // Log kernels differ by the constant -(2/mu) ln s.
                       double worst = 0.0;
                       Mat2 h{1.1, 0.2, -0.3, 0.8};
                       for (const auto& c : std::vector<Case>{{SemifieldKind::linear(), 2}, {SemifieldKind::root(2), 2},
                                                              {SemifieldKind::log(1.5), 2}, {SemifieldKind::tropical_max(), 2},
                                                              {SemifieldKind::tropical_min(), 1.5}, {SemifieldKind::tropical_max(), 3}}) {
                           for (double s : {0.5, 1.7, 3.0}) {
                               Mat2 hs{s * h.a, s * h.b, s * h.c, s * h.d};
                               auto a = sample_kernel({c.kind, c.alpha, 1.0, hs}, 3);
                               auto b = sample_kernel({c.kind, c.alpha, std::pow(s, -c.alpha), h}, 3);
                               double shift = c.kind.tag() == SemifieldTag::Log ? -2.0 * std::log(s) / c.kind.parameter() : 0.0;
                               for (std::size_t i = 0; i < a.values.size(); ++i) {
                                   double scale = std::max(1.0, std::abs(b.values[i]));
                                   worst = std::max(worst, std::abs(a.values[i] - b.values[i] - shift) / scale);
                               }
                           }
                       }
                       return within(worst, 1e-9);
                   }});
    out.push_back({"log and linear are isomorphic, linear and tropical are not", [] {
                       Rng rng(8);
                       Grid2 f = random_field(rng, 6, 6, -2, 2);
                       auto lin = cole_hopf_transport(SemifieldKind::log(0.7), SemifieldKind::linear(), f);
                       auto back = cole_hopf_transport(SemifieldKind::linear(), SemifieldKind::log(0.7), lin);
                       double err = max_abs_difference(f, back);
                       bool threw = false;
                       try {
                           (void)cole_hopf_transport(SemifieldKind::linear(), SemifieldKind::tropical_max(), lin);
                       } catch (const NoIsomorphismError&) {
                           threw = true;
                       }
                       return Outcome{err <= 1e-12 && threw,
                                      "round trip error " + num(err) + (threw ? "" : ", tropical transport accepted")};
                   }});
    return out;
}

std::vector<Check> transform_checks() {
    std::vector<Check> out;
    for (auto k : {SemifieldKind::linear(), SemifieldKind::root(2), SemifieldKind::root(0.5), SemifieldKind::log(1),
                   SemifieldKind::log(-0.8)}) {
        out.push_back({"round trip " + k.name(), [k] {
                           Rng rng(21);
                           bool positive = k.tag() != SemifieldTag::Linear;
                           Grid2 base = even_field(rng, 16, positive);
                           Grid2 f = base;
                           if (k.tag() == SemifieldTag::Root) {
                               for (double& v : f.values()) v = std::pow(v, 1.0 / k.parameter());
                           } else if (k.tag() == SemifieldTag::Log) {
                               for (double& v : f.values()) v = std::log(v) / k.parameter();
                           }
                           auto spec = semifield_fourier(k, f, 0.5);
                           Grid2 g = semifield_fourier_inverse(k, spec);
                           return within(normwise_relative(k, g, f, 0), 1e-10);
                       }});
    }
    for (auto k : {SemifieldKind::tropical_max(), SemifieldKind::tropical_min()}) {
        out.push_back({"hull transform equals brute force " + k.name(), [k] {
                           Rng rng(4);
                           double worst = 0.0;
                           for (int i = 0; i < 20; ++i) {
                               Grid2 f = random_field(rng, 9, 11, -3, 3);
                               Lattice freq{13, 13, 0.37, 0.41};
                               auto a = semifield_fourier(k, f, 0.7, freq);
                               auto b = tropical_fourier_bruteforce(k, f, 0.7, freq);
                               worst = std::max(worst, max_abs_difference(a.values, b.values));
                           }
                           return within(worst, 1e-12);
                       }});
        out.push_back({"inverse on the image " + k.name(), [k] {
                           Rng rng(6);
                           double worst = 0.0;
                           for (int i = 0; i < 10; ++i) {
                               Grid2 f = random_field(rng, 10, 10, -2, 2);
                               auto spec = semifield_fourier(k, f, 1.0);
                               Grid2 g = semifield_fourier_inverse(k, spec);
                               auto again = semifield_fourier(k, g, 1.0);
                               worst = std::max(worst, max_abs_difference(spec.values, again.values));
                           }
                           return within(worst, 1e-12);
                       }});
        out.push_back({"non-image spectrum rejected " + k.name(), [k] {
                           Rng rng(9);
                           Grid2 f = random_field(rng, 9, 9, -2, 2);
                           auto spec = semifield_fourier(k, f, 1.0);
                           double bump = k.tag() == SemifieldTag::TropicalMax ? 5.0 : -5.0;
                           spec.values(4, 4) += bump;
                           try {
                               (void)semifield_fourier_inverse(k, spec);
                           } catch (const NonInvertibleError&) {
                               return Outcome{true, "rejected"};
                           }
                           return Outcome{false, "perturbed spectrum accepted"};
                       }});
    }
    return out;
}

std::vector<Check> conv_checks() {
    std::vector<Check> out;
    for (auto k : {SemifieldKind::linear(), SemifieldKind::root(2), SemifieldKind::log(1)}) {
        out.push_back({"semigroup " + k.name(), [k] {
                           Rng rng(13);
                           double lo = k.tag() == SemifieldTag::Log ? -1.0 : 0.1;
                           Grid2 f = smooth_random_field(rng, 32, 32, lo, 1.0);
                           auto half = sample_kernel({k, 2.0, 0.5, Mat2::identity()}, 5);
                           auto one = sample_kernel({k, 2.0, 1.0, Mat2::identity()}, 7);
                           Grid2 twice = convolve(k, half, convolve(k, half, f, BoundaryPolicy::Replicate),
                                                  BoundaryPolicy::Replicate);
                           Grid2 once = convolve(k, one, f, BoundaryPolicy::Replicate);
                           return within(normwise_relative(k, twice, once, 10), 1e-3);
                       }});
    }
    for (auto k : {SemifieldKind::tropical_max(), SemifieldKind::tropical_min()}) {
        out.push_back({"semigroup sandwich " + k.name(), [k] {
                           // Composition of sampled quadratics can only lose
                           // ground against the one-shot kernel, by at most
                           // (s + t) / (4 s t) for s = t = 1/2.
                           Rng rng(14);
                           Grid2 f = random_field(rng, 24, 24, -1, 1);
                           auto a = convolve_fast_quadratic_morphological(k, 0.5, Mat2::identity(), f).field;
                           a = convolve_fast_quadratic_morphological(k, 0.5, Mat2::identity(), a).field;
                           auto b = convolve_fast_quadratic_morphological(k, 1.0, Mat2::identity(), f).field;
                           const double slack = (0.5 + 0.5) / (4 * 0.5 * 0.5);
                           double sign = k.tag() == SemifieldTag::TropicalMax ? 1.0 : -1.0;
                           double worst_violation = 0.0;
                           for (std::size_t i = 0; i < a.size(); ++i) {
                               double gap = sign * (b.values()[i] - a.values()[i]);  // >= 0
                               worst_violation = std::max({worst_violation, -gap, gap - slack});
                           }
                           return within(worst_violation, 1e-12);
                       }});
        out.push_back({"separable morphology equals direct " + k.name(), [k] {
                           Rng rng(15);
                           Grid2 f = random_field(rng, 20, 17, -2, 2);
                           Mat2 h{0.8, 0.0, 0.0, 1.3};
                           auto fast = convolve_fast_quadratic_morphological(k, 1.5, h, f);
                           auto kernel = sample_kernel({k, 2.0, 1.5, h}, 20);
                           Grid2 direct = convolve(k, kernel, f, BoundaryPolicy::ZeroPad);
                           Outcome o = within(max_abs_difference(fast.field, direct), 1e-12);
                           if (fast.used_fallback) o = {false, "fallback used for a diagonal metric"};
                           return o;
                       }});
    }
    for (auto k : {SemifieldKind::linear(), SemifieldKind::root(0.5), SemifieldKind::log(-1), SemifieldKind::tropical_max(),
                   SemifieldKind::tropical_min()}) {
        out.push_back({"translation equivariance " + k.name(), [k] {
                           Rng rng(16);
                           Grid2 f = random_field(rng, 24, 24, 0.1, 1.0);
                           auto kernel = sample_kernel({k, 2.0, 1.0, Mat2{1.0, 0.4, -0.2, 0.9}});
                           Grid2 a = shifted(convolve(k, kernel, f, BoundaryPolicy::Replicate), 3, -2, 0.0);
                           Grid2 b = convolve(k, kernel, shifted(f, 3, -2, 0.5), BoundaryPolicy::Replicate);
                           return within(max_abs_difference(a, b, kernel.radius + 4), 0.0);
                       }});
    }
    return out;
}

std::vector<Check> layer_checks() {
    std::vector<Check> out;
    auto batch = [](Rng& rng, int n, int c, double lo, double hi) {
        Batch b;
        for (int e = 0; e < n; ++e) {
            FeatureStack s;
            for (int i = 0; i < c; ++i) s.push_back(random_field(rng, 10, 10, lo, hi));
            b.push_back(std::move(s));
        }
        return b;
    };
    auto grad_case = [batch](std::function<std::unique_ptr<Sublayer>(Rng&)> make, double lo, double hi, int inputs) {
        return [make, batch, lo, hi, inputs] {
            Rng rng(23);
            double worst = 0.0;
            std::string where;
            int resampled = 0;
            for (int inst = 0; inst < 3; ++inst) {
                for (int attempt = 0;; ++attempt) {
                    auto layer = make(rng);
                    auto r = check_gradients(*layer, batch(rng, 2, inputs, lo, hi), rng());
                    if (r.kink && attempt < 5) {
                        ++resampled;
                        continue;
                    }
                    if (r.max_relative_error > worst) {
                        worst = r.max_relative_error;
                        where = r.worst;
                    }
                    break;
                }
            }
            Outcome o = within(worst, 1e-3);
            if (!where.empty()) o.detail += " at " + where;
            if (resampled) o.detail += ", " + std::to_string(resampled) + " resampled";
            return o;
        };
    };
    out.push_back({"gradient convection", grad_case([](Rng& rng) {
                       auto l = std::make_unique<ConvectionSublayer>(2);
                       l->initialize(rng);
                       return std::unique_ptr<Sublayer>(std::move(l));
                   }, -1, 1, 2)});
    for (std::string token : {"linear", "root:2", "log:1", "log:-0.5", "tmax", "tmin"}) {
        double lo = token.starts_with("root") ? 0.1 : -1.0;
        out.push_back({"gradient " + token, grad_case([token](Rng& rng) {
                           ScaleSpaceOptions o;
                           o.kind = SemifieldKind::parse(token);
                           o.radius = 3;
                           auto l = std::make_unique<ScaleSpaceSublayer>(2, o);
                           l->initialize(rng);
                           return std::unique_ptr<Sublayer>(std::move(l));
                       }, lo, 1, 2)});
    }
    out.push_back({"gradient affine", grad_case([](Rng& rng) {
                       auto l = std::make_unique<AffineSublayer>(3, 2, true);
                       l->initialize(rng);
                       return std::unique_ptr<Sublayer>(std::move(l));
                   }, -1, 1, 3)});
    out.push_back({"gradient channel norm", grad_case([](Rng&) {
                       return std::unique_ptr<Sublayer>(std::make_unique<ChannelNormSublayer>(2));
                   }, -1, 1, 2)});
    out.push_back({"pde layer translation equivariance", [] {
                       Rng rng(31);
                       PdeLayer layer(3, rng);
                       double worst = 0.0;
                       for (int i = 0; i < 5; ++i) {
                           FeatureStack s;
                           for (int c = 0; c < 3; ++c) s.push_back(random_field(rng, 24, 24, -1, 1));
                           FeatureStack moved;
                           for (auto& g : s) moved.push_back(shifted(g, 2, 3, 0.0));
                           auto a = layer.run({s})[0];
                           auto b = layer.run({moved})[0];
                           for (int c = 0; c < 3; ++c) {
                               worst = std::max(worst, max_abs_difference(shifted(a[c], 2, 3, 0.0), b[c], 10));
                           }
                       }
                       return within(worst, 0.0);
                   }});
    out.push_back({"pde layer rotation equivariance", [] {
                       Rng rng(32);
                       PdeLayer layer(3, rng);
                       for (int c = 0; c < 3; ++c) {
                           layer.conv.set_shift(c, {0.0, 0.0});
                           layer.dilate.set_metric(c, Mat2::scaled(0.8 + 0.2 * c));
                           layer.erode.set_metric(c, Mat2::scaled(1.1 - 0.1 * c));
                       }
                       double worst = 0.0;
                       for (int i = 0; i < 5; ++i) {
                           FeatureStack s;
                           for (int c = 0; c < 3; ++c) s.push_back(random_field(rng, 20, 20, -1, 1));
                           FeatureStack turned;
                           for (auto& g : s) turned.push_back(rotated90(g));
                           auto a = layer.run({s})[0];
                           auto b = layer.run({turned})[0];
                           for (int c = 0; c < 3; ++c) worst = std::max(worst, max_abs_difference(rotated90(a[c]), b[c]));
                       }
                       return within(worst, 0.0);
                   }});
    return out;
}

std::vector<Check> checks_for(const std::string& suite) {
    if (suite == "core") return core_checks();
    if (suite == "kernels") return kernel_checks();
    if (suite == "transforms") return transform_checks();
    if (suite == "conv") return conv_checks();
    if (suite == "layers") return layer_checks();
    throw std::invalid_argument("unknown suite '" + suite + "'");
}

}  // namespace

std::vector<std::string> suite_names() { return {"core", "kernels", "transforms", "conv", "layers"}; }

std::vector<CheckResult> run_suite(const std::string& suite) {
    std::vector<std::string> suites = suite == "all" ? suite_names() : std::vector<std::string>{suite};
    std::vector<CheckResult> results;
    for (const auto& s : suites) {
        for (auto& [name, fn] : checks_for(s)) {
            auto start = std::chrono::steady_clock::now();
            CheckResult r{s, name, false, "", 0.0};
            try {
                Outcome o = fn();
                r.passed = o.passed;
                r.detail = o.detail;
            } catch (const std::exception& e) {
                r.detail = std::string("exception: ") + e.what();
            }
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            results.push_back(std::move(r));
        }
    }
    return results;
}

}  // namespace semiscale::tools

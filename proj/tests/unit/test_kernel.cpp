#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "semiscale/kernel.hpp"

using namespace semiscale;
using oracle::Rng;

namespace {

std::vector<KernelSpec> specs_with_alpha() {
    std::vector<KernelSpec> out;
    for (auto k : {SemifieldKind::linear(), SemifieldKind::root(2), SemifieldKind::root(0.5), SemifieldKind::log(1),
                   SemifieldKind::log(-0.5)}) {
        out.push_back({k, 2.0, 1.0, Mat2::identity()});
    }
    for (auto k : {SemifieldKind::tropical_max(), SemifieldKind::tropical_min()}) {
        for (double a : {1.5, 2.0, 3.0}) out.push_back({k, a, 1.0, Mat2::identity()});
    }
    return out;
}

}  // namespace

TEST_SUITE("kernel") {

TEST_CASE("kernel_value examples") {
    CHECK(kernel_value({SemifieldKind::linear(), 2, 1, Mat2::identity()}, {0, 0}) ==
          doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-15));
    CHECK(kernel_value({SemifieldKind::tropical_max(), 2, 1, Mat2::identity()}, {1, 0}) == -0.5);
    CHECK(kernel_value({SemifieldKind::tropical_min(), 2, 2, Mat2::identity()}, {2, 0}) == 1.0);
    CHECK(kernel_value({SemifieldKind::tropical_min(), 2, 1, Mat2::scaled(2)}, {1, 0}) == 2.0);
}

TEST_CASE("fourier_kernel_value examples") {
    CHECK(fourier_kernel_value({SemifieldKind::linear(), 2, 1, Mat2::identity()}, {0, 0}) == 1.0);
    CHECK(fourier_kernel_value({SemifieldKind::tropical_max(), 2, 1, Mat2::identity()}, {2, 0}) == 2.0);
    CHECK(fourier_kernel_value({SemifieldKind::log(1), 2, 1, Mat2::identity()}, {0, 1}) == -0.5);
    CHECK_THROWS_AS(fourier_kernel_value({SemifieldKind::linear(), 2, 1, Mat2::scaled(2)}, {0, 1}),
                    std::invalid_argument);
}

TEST_CASE("sample_kernel examples") {
    auto k = sample_kernel({SemifieldKind::tropical_max(), 2, 1, Mat2::identity()}, 1);
    CHECK(k.at(0, 0) == 0.0);
    CHECK(k.at(1, 0) == -0.5);
    CHECK(k.at(0, -1) == -0.5);
    CHECK(k.at(1, 1) == -1.0);
    CHECK(k.at(-1, 1) == -1.0);
    for (double t : {0.2, 1.0, 5.0}) {
        auto g = sample_kernel({SemifieldKind::linear(), 2, t, Mat2::identity()}, 3);
        double sum = 0.0;
        for (double v : g.values) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("root kernels integrate to one in their own semifield") {
    for (double p : {0.5, 2.0, 3.0}) {
        auto k = SemifieldKind::root(p);
        auto s = sample_kernel({k, 2, 0.7, Mat2{1.1, 0.2, 0.0, 0.9}}, 4);
        double lifted = 0.0;
        for (double v : s.values) lifted += std::pow(v, p);
        CHECK(lifted == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(KernelSpec({SemifieldKind::linear(), 3.0, 1.0, Mat2::identity()}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec({SemifieldKind::tropical_max(), 1.0, 1.0, Mat2::identity()}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec({SemifieldKind::tropical_max(), 2.0, 0.0, Mat2::identity()}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec({SemifieldKind::linear(), 2.0, 1.0, Mat2{1, 2, 2, 4}}).validate(),
                    std::invalid_argument);
}

TEST_CASE("theorem form of the frequency-domain kernel") {
    for (const auto& base : specs_with_alpha()) {
        CAPTURE(base.kind.name());
        CAPTURE(base.alpha);
        Rng rng(17);
        for (int i = 0; i < 100; ++i) {
            KernelSpec spec = base;
            spec.t = oracle::uniform(rng, 0.1, 2.1);
            Vec2 w{oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1)};
            double r = std::pow(std::hypot(w.x, w.y), spec.alpha);
            double expected = exp_semifield(spec.kind, fourier_time_scale(spec.kind, spec.alpha) * r * spec.t);
            CHECK(metric(spec.kind, fourier_kernel_value(spec, w), expected) <= 1e-12);
        }
    }
}

TEST_CASE("frequency-domain semigroup") {
    for (const auto& base : specs_with_alpha()) {
        CAPTURE(base.kind.name());
        Rng rng(19);
        for (int i = 0; i < 50; ++i) {
            double s = oracle::uniform(rng, 0.1, 1.5), t = oracle::uniform(rng, 0.1, 1.5);
            Vec2 w{oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1)};
            KernelSpec a = base, b = base, c = base;
            a.t = s;
            b.t = t;
            c.t = s + t;
            double lhs = mul(base.kind, fourier_kernel_value(a, w), fourier_kernel_value(b, w));
            CHECK(metric(base.kind, lhs, fourier_kernel_value(c, w)) <= 1e-12);
        }
    }
}

TEST_CASE("rotoreflection invariance") {
    Rng rng(23);
    for (const auto& spec : specs_with_alpha()) {
        for (int i = 0; i < 50; ++i) {
            double angle = oracle::uniform(rng, 0, 2 * std::numbers::pi);
            Mat2 q = Mat2::rotation(angle);
            if (i % 2) q = q * Mat2{1, 0, 0, -1};
            Vec2 x{oracle::uniform(rng, -3, 3), oracle::uniform(rng, -3, 3)};
            double a = kernel_value(spec, q * x);
            double b = kernel_value(spec, x);
            CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)));
        }
    }
}

TEST_CASE("scale invariance") {
    Rng rng(29);
    for (int i = 0; i < 100; ++i) {
        double s = oracle::uniform(rng, 0.5, 2.0);
        double t = oracle::uniform(rng, 0.3, 2.0);
        Vec2 x{oracle::uniform(rng, -2, 2), oracle::uniform(rng, -2, 2)};
        for (auto kind : {SemifieldKind::tropical_max(), SemifieldKind::tropical_min()}) {
            for (double a : {1.5, 2.0, 3.0}) {
                double lhs = kernel_value({kind, a, std::pow(s, a) * t, Mat2::identity()}, {s * x.x, s * x.y});
                double rhs = kernel_value({kind, a, t, Mat2::identity()}, x);
                CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
            }
        }
        double lhs = s * s * kernel_value({SemifieldKind::linear(), 2, s * s * t, Mat2::identity()}, {s * x.x, s * x.y});
        double rhs = kernel_value({SemifieldKind::linear(), 2, t, Mat2::identity()}, x);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("Gaussian kernel transported to Log is the Log kernel") {
    for (double mu : {0.5, 1.0, -2.0}) {
        Grid2 gauss(9, 9), logk(9, 9);
        for (int y = 0; y < 9; ++y) {
            for (int x = 0; x < 9; ++x) {
                Vec2 p{x - 4.0, y - 4.0};
                gauss(x, y) = kernel_value({SemifieldKind::linear(), 2, 1.3, Mat2::identity()}, p);
                logk(x, y) = kernel_value({SemifieldKind::log(mu), 2, 1.3, Mat2::identity()}, p);
            }
        }
        Grid2 moved = cole_hopf_transport(SemifieldKind::linear(), SemifieldKind::log(mu), gauss);
        CHECK(oracle::max_abs(moved, logk) <= 1e-9);
    }
}

TEST_CASE("cole_hopf_transport examples") {
    Grid2 zeros(3, 3, 0.0);
    Grid2 ones = cole_hopf_transport(SemifieldKind::log(1), SemifieldKind::linear(), zeros);
    for (double v : ones.values()) CHECK(v == 1.0);

    Rng rng(2);
    Grid2 f = oracle::random_grid(rng, 4, 4, -3, 3);
    Grid2 g = cole_hopf_transport(SemifieldKind::tropical_min(), SemifieldKind::tropical_max(), f);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(g.values()[i] == -f.values()[i]);

    Grid2 threes(2, 2, 3.0);
    Grid2 nines = cole_hopf_transport(SemifieldKind::root(2), SemifieldKind::linear(), threes);
    for (double v : nines.values()) CHECK(v == doctest::Approx(9.0));

    CHECK_THROWS_AS(cole_hopf_transport(SemifieldKind::linear(), SemifieldKind::tropical_max(), f),
                    NoIsomorphismError);
    CHECK_THROWS_AS(cole_hopf_transport(SemifieldKind::log(1), SemifieldKind::tropical_min(), f),
                    NoIsomorphismError);
}

TEST_CASE("default radius") {
    CHECK(default_radius({SemifieldKind::linear(), 2, 1, Mat2::identity()}) == 3);
    CHECK(default_radius({SemifieldKind::linear(), 2, 1, Mat2::scaled(100)}) == 2);
    CHECK(default_radius({SemifieldKind::linear(), 2, 100, Mat2::identity()}) == 7);
    CHECK(default_radius({SemifieldKind::tropical_max(), 2, 1, Mat2{1, 0, 0, 0.5}}) == 6);
    auto s = sample_kernel({SemifieldKind::tropical_min(), 2, 1, Mat2::identity()});
    CHECK(s.radius == 3);
    CHECK(s.values.size() == 49u);
}

TEST_CASE("kernels are even") {
    for (const auto& base : specs_with_alpha()) {
        KernelSpec spec = base;
        spec.metric = Mat2::scaled(0.8) * Mat2::rotation(0.3);
        auto s = sample_kernel(spec, 3);
        for (int dy = -3; dy <= 3; ++dy) {
            for (int dx = -3; dx <= 3; ++dx) {
                CHECK(s.at(dx, dy) == doctest::Approx(s.at(-dx, -dy)).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("metric gradient matches finite differences") {
    Rng rng(31);
    for (const auto& base : specs_with_alpha()) {
        CAPTURE(base.kind.name());
        CAPTURE(base.alpha);
        KernelSpec spec = base;
        spec.metric = Mat2{oracle::uniform(rng, 0.7, 1.3), oracle::uniform(rng, -0.2, 0.2),
                           oracle::uniform(rng, -0.2, 0.2), oracle::uniform(rng, 0.7, 1.3)};
        const int r = 2;
        std::vector<double> u(25);
        for (double& v : u) v = oracle::uniform(rng, -1, 1);
        auto probe = [&](const Mat2& h) {
            KernelSpec s = spec;
            s.metric = h;
            auto k = sample_kernel(s, r);
            double acc = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * k.values[i];
            return acc;
        };
        Mat2 g = sample_kernel_metric_gradient(spec, r, u);
        double analytic[4] = {g.a, g.b, g.c, g.d};
        for (int e = 0; e < 4; ++e) {
            const double eps = 1e-6;
            Mat2 up = spec.metric, down = spec.metric;
            double* pu[4] = {&up.a, &up.b, &up.c, &up.d};
            double* pd[4] = {&down.a, &down.b, &down.c, &down.d};
            *pu[e] += eps;
            *pd[e] -= eps;
            double numeric = (probe(up) - probe(down)) / (2 * eps);
            double denom = std::max({std::abs(numeric), std::abs(analytic[e]), 1e-6});
            CHECK(std::abs(numeric - analytic[e]) / denom <= 1e-5);
        }
    }
}

}  // TEST_SUITE

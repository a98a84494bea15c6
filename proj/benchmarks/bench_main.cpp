#include <benchmark/benchmark.h>

#include <cmath>

#include "semiscale/kernel.hpp"
#include "semiscale/network.hpp"
#include "semiscale/semiconv.hpp"
#include "semiscale/transforms.hpp"

using namespace semiscale;

namespace {

Grid2 smooth_field(int n) {
    Grid2 g(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) g(x, y) = 0.5 + 0.4 * std::sin(0.3 * x) * std::cos(0.2 * y);
    return g;
}

SemifieldKind kind_for(int index) {
    switch (index) {
        case 0: return SemifieldKind::linear();
        case 1: return SemifieldKind::root(2.0);
        case 2: return SemifieldKind::log(1.0);
        case 3: return SemifieldKind::tropical_max();
        default: return SemifieldKind::tropical_min();
    }
}

}  // namespace

// Windowed reference convolution, one kind per arg(0), field side arg(1).
static void BM_Convolve(benchmark::State& state) {
    auto kind = kind_for(static_cast<int>(state.range(0)));
    int n = static_cast<int>(state.range(1));
    KernelSpec spec{kind, 2.0, 1.0, Mat2::identity()};
    auto kernel = sample_kernel(spec, 3);
    Grid2 field = smooth_field(n);
    for (auto _ : state) benchmark::DoNotOptimize(convolve(kind, kernel, field, BoundaryPolicy::Replicate));
    state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_Convolve)->ArgsProduct({{0, 1, 2, 3, 4}, {32, 64, 128}});

static void BM_ConvolveBackward(benchmark::State& state) {
    auto kind = kind_for(static_cast<int>(state.range(0)));
    KernelSpec spec{kind, 2.0, 1.0, Mat2::identity()};
    auto kernel = sample_kernel(spec, 3);
    Grid2 field = smooth_field(64);
    TropicalTrace trace;
    Grid2 out = kind.is_tropical() ? convolve_tropical_traced(kind, kernel, field, BoundaryPolicy::Replicate, trace)
                                   : convolve(kind, kernel, field, BoundaryPolicy::Replicate);
    Grid2 upstream(64, 64, 1.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(convolve_backward(kind, kernel, field, out, upstream, BoundaryPolicy::Replicate,
                                                   kind.is_tropical() ? &trace : nullptr));
}
BENCHMARK(BM_ConvolveBackward)->DenseRange(0, 4);

// Separable lower-envelope morphology against the whole-grid brute force.
static void BM_FastMorphology(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    Grid2 field = smooth_field(n);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            convolve_fast_quadratic_morphological(SemifieldKind::tropical_max(), 1.0, Mat2{1, 0, 0, 2}, field));
    state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_FastMorphology)->RangeMultiplier(2)->Range(32, 256);

static void BM_WindowedMorphology(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    Grid2 field = smooth_field(n);
    auto kind = SemifieldKind::tropical_max();
    auto kernel = sample_kernel({kind, 2.0, 1.0, Mat2{1, 0, 0, 2}}, n - 1);
    for (auto _ : state) benchmark::DoNotOptimize(convolve(kind, kernel, field, BoundaryPolicy::ZeroPad));
}
BENCHMARK(BM_WindowedMorphology)->Arg(32)->Arg(64);

static void BM_Fourier(benchmark::State& state) {
    auto kind = kind_for(static_cast<int>(state.range(0)));
    Grid2 field = smooth_field(static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(semifield_fourier(kind, field));
}
BENCHMARK(BM_Fourier)->ArgsProduct({{0, 1, 2, 3}, {16, 32}});

static void BM_QuadraticErosion1d(benchmark::State& state) {
    std::vector<double> samples(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = std::sin(0.1 * static_cast<double>(i));
    for (auto _ : state) benchmark::DoNotOptimize(quadratic_erosion_1d(samples, 0.5));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QuadraticErosion1d)->RangeMultiplier(4)->Range(64, 16384);

// One training step worth of work for the small reference network.
static void BM_NetworkStep(benchmark::State& state) {
    auto config = NetworkConfig::uniform(4, 12, 1, {"convection", "tmax", "tmin"});
    Network net(config);
    Batch input(4, FeatureStack{smooth_field(64)});
    Batch upstream(4, FeatureStack{Grid2(64, 64, 1.0)});
    for (auto _ : state) {
        benchmark::DoNotOptimize(net.forward(input, true));
        net.zero_grad();
        net.backward(upstream);
    }
}
BENCHMARK(BM_NetworkStep)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

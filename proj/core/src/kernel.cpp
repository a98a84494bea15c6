#include "semiscale/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace semiscale {

namespace {

bool is_quadratic_family(const SemifieldKind& kind) { return !kind.is_tropical(); }

// dk/d(|y|^2) of the raw (unnormalised) kernel at squared radius r2, used with
// dk/dH = 2 * dk/d(r2) * y x^T.
double raw_derivative_r2(const KernelSpec& spec, double raw_value, double r2) {
    const double t = spec.t;
    switch (spec.kind.tag()) {
        case SemifieldTag::Linear: return -raw_value / (2.0 * t);
        case SemifieldTag::Root: return -raw_value / (2.0 * spec.kind.parameter() * t);
        case SemifieldTag::Log: return -1.0 / (2.0 * spec.kind.parameter() * t);
        case SemifieldTag::TropicalMax:
        case SemifieldTag::TropicalMin: {
            double sign = spec.kind.tag() == SemifieldTag::TropicalMax ? -1.0 : 1.0;
            if (spec.alpha == 2.0) return sign / (2.0 * t);
            if (r2 == 0.0) return 0.0;
            double r = std::sqrt(r2);
            // d/dr [(t/beta) (r/t)^beta] = (r/t)^(beta-1); d r / d r2 = 1/(2r)
            return sign * std::pow(r / t, spec.beta() - 1.0) / (2.0 * r);
        }
    }
    return 0.0;
}

int reference_class(const SemifieldKind& kind) { return kind.is_tropical() ? 1 : 0; }

}  // namespace

void KernelSpec::validate() const {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("kernel time t must be > 0");
    if (!std::isfinite(alpha)) throw std::invalid_argument("kernel alpha must be finite");
    if (is_quadratic_family(kind) && alpha != 2.0) {
        throw std::invalid_argument("only alpha = 2 is available for the " + kind.name() +
                                    " scale-space");
    }
    if (kind.is_tropical() && !(alpha > 1.0)) {
        throw std::invalid_argument("tropical kernels need alpha > 1");
    }
    double det = metric.det();
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
        throw std::invalid_argument("kernel metric H must be finite and nonsingular");
    }
}

double kernel_value(const KernelSpec& spec, Vec2 x) {
    spec.validate();
    const double t = spec.t;
    const double r2 = norm_squared(spec.metric * x);
    const double two_pi_t = 2.0 * std::numbers::pi * t;
    switch (spec.kind.tag()) {
        case SemifieldTag::Linear: return std::exp(-r2 / (2.0 * t)) / two_pi_t;
        case SemifieldTag::Root: {
            double p = spec.kind.parameter();
            return std::pow(two_pi_t, -1.0 / p) * std::exp(-r2 / (2.0 * p * t));
        }
        case SemifieldTag::Log: {
            double mu = spec.kind.parameter();
            return -std::log(two_pi_t) / mu - r2 / (2.0 * mu * t);
        }
        case SemifieldTag::TropicalMax:
        case SemifieldTag::TropicalMin: {
            double sign = spec.kind.tag() == SemifieldTag::TropicalMax ? -1.0 : 1.0;
            if (spec.alpha == 2.0) return sign * r2 / (2.0 * t);
            double beta = spec.beta();
            return sign * (t / beta) * std::pow(std::sqrt(r2) / t, beta);
        }
    }
    return 0.0;
}

double fourier_time_scale(const SemifieldKind& kind, double alpha) {
    switch (kind.tag()) {
        case SemifieldTag::Linear: return 0.5;
        case SemifieldTag::Root: return 1.0 / (2.0 * kind.parameter());
        case SemifieldTag::Log: return 1.0 / (2.0 * std::abs(kind.parameter()));
        default: return -1.0 / alpha;
    }
}

double fourier_kernel_value(const KernelSpec& spec, Vec2 omega) {
    spec.validate();
    if (!(spec.metric == Mat2::identity())) {
        throw std::invalid_argument("the frequency-domain kernel is defined for H = I only");
    }
    const double t = spec.t;
    switch (spec.kind.tag()) {
        case SemifieldTag::Linear: return std::exp(-0.5 * t * norm_squared(omega));
        case SemifieldTag::Root:
            return std::exp(-t * norm_squared(omega) / (2.0 * spec.kind.parameter()));
        case SemifieldTag::Log: return -t * norm_squared(omega) / (2.0 * spec.kind.parameter());
        case SemifieldTag::TropicalMax:
            return t * std::pow(norm(omega), spec.alpha) / spec.alpha;
        case SemifieldTag::TropicalMin:
            return -t * std::pow(norm(omega), spec.alpha) / spec.alpha;
    }
    return 0.0;
}

SampledKernel SampledKernel::delta(const SemifieldKind& kind, int radius) {
    SampledKernel k;
    k.kind = kind;
    k.radius = radius;
    k.values.assign(static_cast<std::size_t>(k.side() * k.side()), kind.zero());
    k.at(0, 0) = kind.one();
    return k;
}

int default_radius(const KernelSpec& spec) {
    spec.validate();
    double smallest = singular_values(spec.metric)[1];
    double reach = 3.0 * std::pow(spec.t, 1.0 / spec.alpha) / smallest;
    if (!std::isfinite(reach)) return 7;
    return std::clamp(static_cast<int>(std::ceil(reach - 1e-9)), 2, 7);
}

SampledKernel sample_kernel(const KernelSpec& spec) { return sample_kernel(spec, default_radius(spec)); }

SampledKernel sample_kernel(const KernelSpec& spec, int radius) {
    spec.validate();
    if (radius < 1) throw std::invalid_argument("kernel radius must be >= 1");
    SampledKernel k;
    k.kind = spec.kind;
    k.radius = radius;
    k.values.resize(static_cast<std::size_t>(k.side() * k.side()));
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            k.at(dx, dy) = kernel_value(spec, {static_cast<double>(dx), static_cast<double>(dy)});
        }
    }
    if (spec.kind.tag() == SemifieldTag::Linear || spec.kind.tag() == SemifieldTag::Root) {
        double mass = accumulate(spec.kind, k.values);
        if (!(mass > 0.0)) throw std::domain_error("kernel window has no mass");
        for (double& v : k.values) v /= mass;
    }
    return k;
}

Mat2 sample_kernel_metric_gradient(const KernelSpec& spec, int radius,
                                   std::span<const double> tap_gradient) {
    spec.validate();
    const int side = 2 * radius + 1;
    if (tap_gradient.size() != static_cast<std::size_t>(side * side)) {
        throw std::invalid_argument("tap gradient does not match the kernel window");
    }
    std::vector<double> raw(tap_gradient.size());
    std::vector<Vec2> offsets(tap_gradient.size());
    std::vector<Vec2> images(tap_gradient.size());
    std::size_t i = 0;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx, ++i) {
            offsets[i] = {static_cast<double>(dx), static_cast<double>(dy)};
            images[i] = spec.metric * offsets[i];
            raw[i] = kernel_value(spec, offsets[i]);
        }
    }

    // dL/d(raw tap), undoing the renormalisation where there is one.
    std::vector<double> raw_grad(tap_gradient.begin(), tap_gradient.end());
    if (spec.kind.tag() == SemifieldTag::Linear) {
        double mass = 0.0;
        for (double v : raw) mass += v;
        double weighted = 0.0;
        for (std::size_t a = 0; a < raw.size(); ++a) weighted += tap_gradient[a] * raw[a];
        weighted /= mass;
        for (std::size_t b = 0; b < raw.size(); ++b) raw_grad[b] = (tap_gradient[b] - weighted) / mass;
    } else if (spec.kind.tag() == SemifieldTag::Root) {
        double p = spec.kind.parameter();
        double mass = accumulate(spec.kind, raw);
        double weighted = 0.0;
        for (std::size_t a = 0; a < raw.size(); ++a) weighted += tap_gradient[a] * raw[a];
        double coupling = weighted / std::pow(mass, 1.0 + p);
        for (std::size_t b = 0; b < raw.size(); ++b) {
            raw_grad[b] = tap_gradient[b] / mass - coupling * std::pow(raw[b], p - 1.0);
        }
    }

    Mat2 grad{0.0, 0.0, 0.0, 0.0};
    for (std::size_t a = 0; a < raw.size(); ++a) {
        if (raw_grad[a] == 0.0) continue;
        double s = 2.0 * raw_grad[a] * raw_derivative_r2(spec, raw[a], norm_squared(images[a]));
        grad.a += s * images[a].x * offsets[a].x;
        grad.b += s * images[a].x * offsets[a].y;
        grad.c += s * images[a].y * offsets[a].x;
        grad.d += s * images[a].y * offsets[a].y;
    }
    return grad;
}

Grid2 cole_hopf_transport(const SemifieldKind& source, const SemifieldKind& target,
                          const Grid2& field) {
    if (reference_class(source) != reference_class(target)) {
        throw NoIsomorphismError("no semifield isomorphism between " + source.name() + " and " +
                                 target.name());
    }
    auto into = isomorphism_to_reference(source);
    auto outof = isomorphism_to_reference(target);
    Grid2 out = field;
    for (double& v : out.values()) {
        require_valid(source, v);
        double reference = into.forward(v);
        if (reference_class(source) == 0 && (!into.identity || !outof.identity) && reference < 0.0) {
            throw DomainError("negative linear value cannot be transported to " + target.name());
        }
        v = outof.backward(reference);
    }
    return out;
}

}  // namespace semiscale

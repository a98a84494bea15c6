#include "semiscale/semifield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace semiscale {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double checked_parameter(const std::string& text, std::size_t colon) {
    if (colon == std::string::npos || colon + 1 >= text.size()) {
        throw std::invalid_argument("semifield '" + text + "' needs a parameter, e.g. root:2");
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text.substr(colon + 1), &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad semifield parameter in '" + text + "'");
    }
    if (used != text.size() - colon - 1) {
        throw std::invalid_argument("bad semifield parameter in '" + text + "'");
    }
    return value;
}

// Log(mu) addition in max-shifted form; `a` and `b` are finite.
double log_add_finite(double mu, double a, double b) {
    double hi = mu * a >= mu * b ? a : b;
    return hi + std::log1p(std::exp(-std::abs(mu * (a - b)))) / mu;
}

}  // namespace

SemifieldKind SemifieldKind::root(double p) {
    if (!(p != 0.0) || !std::isfinite(p)) {
        throw std::invalid_argument("root semifield requires a finite nonzero p");
    }
    return SemifieldKind(SemifieldTag::Root, p);
}

SemifieldKind SemifieldKind::log(double mu) {
    if (!(mu != 0.0) || !std::isfinite(mu)) {
        throw std::invalid_argument("log semifield requires a finite nonzero mu");
    }
    return SemifieldKind(SemifieldTag::Log, mu);
}

SemifieldKind SemifieldKind::parse(const std::string& text) {
    if (text == "linear") return linear();
    if (text == "tmax") return tropical_max();
    if (text == "tmin") return tropical_min();
    auto colon = text.find(':');
    auto head = text.substr(0, colon);
    if (head == "root") return root(checked_parameter(text, colon));
    if (head == "log") return log(checked_parameter(text, colon));
    throw std::invalid_argument("unknown semifield '" + text +
                                "' (expected linear, root:p, log:mu, tmax or tmin)");
}

double SemifieldKind::zero() const {
    switch (tag_) {
        case SemifieldTag::Linear: return 0.0;
        case SemifieldTag::Root: return param_ > 0 ? 0.0 : kInf;
        case SemifieldTag::Log: return param_ > 0 ? -kInf : kInf;
        case SemifieldTag::TropicalMax: return -kInf;
        case SemifieldTag::TropicalMin: return kInf;
    }
    return 0.0;
}

double SemifieldKind::one() const {
    switch (tag_) {
        case SemifieldTag::Linear:
        case SemifieldTag::Root: return 1.0;
        default: return 0.0;
    }
}

bool SemifieldKind::contains(double a) const {
    if (std::isnan(a)) return false;
    switch (tag_) {
        case SemifieldTag::Linear: return std::isfinite(a);
        case SemifieldTag::Root: return a >= 0.0 && (std::isfinite(a) || a == zero());
        case SemifieldTag::Log:
        case SemifieldTag::TropicalMax:
        case SemifieldTag::TropicalMin: return std::isfinite(a) || a == zero();
    }
    return false;
}

std::string SemifieldKind::name() const {
    std::ostringstream out;
    switch (tag_) {
        case SemifieldTag::Linear: out << "linear"; break;
        case SemifieldTag::Root: out << "root:" << param_; break;
        case SemifieldTag::Log: out << "log:" << param_; break;
        case SemifieldTag::TropicalMax: out << "tmax"; break;
        case SemifieldTag::TropicalMin: out << "tmin"; break;
    }
    return out.str();
}

void require_valid(const SemifieldKind& kind, double a) {
    if (!kind.contains(a)) {
        std::ostringstream msg;
        msg << "value " << a << " is not an element of the " << kind.name() << " semifield";
        throw DomainError(msg.str());
    }
}

double add(const SemifieldKind& kind, double a, double b) {
    require_valid(kind, a);
    require_valid(kind, b);
    if (kind.is_zero(a)) return b;
    if (kind.is_zero(b)) return a;
    switch (kind.tag()) {
        case SemifieldTag::Linear: return a + b;
        case SemifieldTag::Root: {
            double p = kind.parameter();
            double scale = std::max(a, b);
            if (scale == 0.0) return 0.0;
            double ra = a / scale;
            double rb = b / scale;
            return scale * std::pow(std::pow(ra, p) + std::pow(rb, p), 1.0 / p);
        }
        case SemifieldTag::Log: return log_add_finite(kind.parameter(), a, b);
        case SemifieldTag::TropicalMax: return std::max(a, b);
        case SemifieldTag::TropicalMin: return std::min(a, b);
    }
    return 0.0;
}

double mul(const SemifieldKind& kind, double a, double b) {
    require_valid(kind, a);
    require_valid(kind, b);
    if (kind.is_zero(a) || kind.is_zero(b)) return kind.zero();
    switch (kind.tag()) {
        case SemifieldTag::Linear:
        case SemifieldTag::Root: return a * b;
        default: return a + b;
    }
}

double inverse(const SemifieldKind& kind, double a) {
    require_valid(kind, a);
    if (kind.is_zero(a)) {
        throw DomainError("the semifield zero of " + kind.name() + " has no inverse");
    }
    switch (kind.tag()) {
        case SemifieldTag::Linear:
        case SemifieldTag::Root: return 1.0 / a;
        default: return -a;
    }
}

double exp_semifield(const SemifieldKind& kind, double t) {
    switch (kind.tag()) {
        case SemifieldTag::Linear:
        case SemifieldTag::Root: return std::exp(-t);
        case SemifieldTag::Log: return kind.parameter() > 0 ? -t : t;
        case SemifieldTag::TropicalMax: return -t;
        case SemifieldTag::TropicalMin: return t;
    }
    return 0.0;
}

double metric(const SemifieldKind& kind, double a, double b) {
    require_valid(kind, a);
    require_valid(kind, b);
    if (a == b) return 0.0;
    switch (kind.tag()) {
        case SemifieldTag::Linear: return std::abs(a - b);
        case SemifieldTag::Root: {
            double p = kind.parameter();
            return std::abs(std::pow(a, p) - std::pow(b, p));
        }
        case SemifieldTag::Log: {
            double mu = kind.parameter();
            return std::abs(std::exp(mu * a) - std::exp(mu * b));
        }
        case SemifieldTag::TropicalMax: return std::abs(std::exp(a) - std::exp(b));
        case SemifieldTag::TropicalMin: return std::abs(std::exp(-a) - std::exp(-b));
    }
    return 0.0;
}

double measure_scaling(const SemifieldKind& kind, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("measure scaling needs s > 0");
    return measure_of_area(kind, s * s);
}

double measure_of_area(const SemifieldKind& kind, double area) {
    if (!(area > 0.0)) throw std::invalid_argument("measure needs a positive area");
    switch (kind.tag()) {
        case SemifieldTag::Linear: return area;
        case SemifieldTag::Root: return std::pow(area, 1.0 / kind.parameter());
        case SemifieldTag::Log: return std::log(area) / kind.parameter();
        default: return 0.0;
    }
}

Isomorphism isomorphism_to_reference(const SemifieldKind& kind) {
    switch (kind.tag()) {
        case SemifieldTag::Root: {
            double p = kind.parameter();
            return {kind, SemifieldKind::linear(), [p](double x) { return std::pow(x, p); },
                    [p](double y) {
                        if (y < 0.0) throw DomainError("negative value has no p-th root");
                        return std::pow(y, 1.0 / p);
                    },
                    false};
        }
        case SemifieldTag::Log: {
            double mu = kind.parameter();
            return {kind, SemifieldKind::linear(), [mu](double x) { return std::exp(mu * x); },
                    [mu](double y) {
                        if (y < 0.0) throw DomainError("negative value has no logarithm");
                        return std::log(y) / mu;
                    },
                    false};
        }
        case SemifieldTag::TropicalMin:
            return {kind, SemifieldKind::tropical_max(), [](double x) { return -x; },
                    [](double y) { return -y; }, false};
        default:
            return {kind, kind, [](double x) { return x; }, [](double y) { return y; }, true};
    }
}

double accumulate(const SemifieldKind& kind, std::span<const double> values) {
    for (double v : values) require_valid(kind, v);
    switch (kind.tag()) {
        case SemifieldTag::Linear: {
            double sum = 0.0;
            for (double v : values) sum += v;
            return sum;
        }
        case SemifieldTag::Root: {
            double p = kind.parameter();
            if (p < 0.0) {
                double acc = kind.zero();
                for (double v : values) acc = add(kind, acc, v);
                return acc;
            }
            double scale = 0.0;
            for (double v : values) scale = std::max(scale, v);
            if (scale == 0.0) return 0.0;
            double sum = 0.0;
            for (double v : values) sum += std::pow(v / scale, p);
            return scale * std::pow(sum, 1.0 / p);
        }
        case SemifieldTag::Log: {
            double mu = kind.parameter();
            double best = kind.zero();
            for (double v : values) {
                if (mu * v > mu * best || kind.is_zero(best)) {
                    if (!kind.is_zero(v)) best = v;
                }
            }
            if (kind.is_zero(best)) return best;
            double sum = 0.0;
            for (double v : values) {
                if (!kind.is_zero(v)) sum += std::exp(mu * (v - best));
            }
            return best + std::log(sum) / mu;
        }
        case SemifieldTag::TropicalMax: {
            double acc = -kInf;
            for (double v : values) acc = std::max(acc, v);
            return acc;
        }
        case SemifieldTag::TropicalMin: {
            double acc = kInf;
            for (double v : values) acc = std::min(acc, v);
            return acc;
        }
    }
    return 0.0;
}

double integrate(const SemifieldKind& kind, std::span<const double> values, double cell_area) {
    return mul(kind, accumulate(kind, values), measure_of_area(kind, cell_area));
}

}  // namespace semiscale

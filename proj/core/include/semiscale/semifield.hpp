#pragma once

// The five scalar semifields used throughout the library: linear, root(p),
// logarithmic(mu), tropical max and tropical min.
//
// Values are plain doubles. The additive identity of the tropical and
// logarithmic semifields is represented by a floating-point infinity, and
// every operation below treats that sentinel explicitly:
//
//   kind          zero    one   a (+) zero   a (x) zero
//   Linear        0       1     a            0
//   Root(p>0)     0       1     a            0
//   Root(p<0)     +inf    1     a            +inf
//   Log(mu>0)     -inf    0     a            -inf
//   Log(mu<0)     +inf    0     a            +inf
//   TropicalMax   -inf    0     a            -inf
//   TropicalMin   +inf    0     a            +inf

#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace semiscale {

/// Raised when a value lies outside the carrier set of a semifield.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class SemifieldTag { Linear, Root, Log, TropicalMax, TropicalMin };

class SemifieldKind {
public:
    static SemifieldKind linear() { return SemifieldKind(SemifieldTag::Linear, 0.0); }
    static SemifieldKind root(double p);
    static SemifieldKind log(double mu);
    static SemifieldKind tropical_max() { return SemifieldKind(SemifieldTag::TropicalMax, 0.0); }
    static SemifieldKind tropical_min() { return SemifieldKind(SemifieldTag::TropicalMin, 0.0); }

    /// Parses "linear", "root:p", "log:mu", "tmax", "tmin".
    static SemifieldKind parse(const std::string& text);

    SemifieldTag tag() const { return tag_; }
    /// p for Root, mu for Log, 0 otherwise.
    double parameter() const { return param_; }

    bool is_tropical() const {
        return tag_ == SemifieldTag::TropicalMax || tag_ == SemifieldTag::TropicalMin;
    }

    double zero() const;
    double one() const;

    /// True when `a` belongs to the carrier set (sentinel included).
    bool contains(double a) const;
    bool is_zero(double a) const { return a == zero(); }

    std::string name() const;

    bool operator==(const SemifieldKind&) const = default;

private:
    SemifieldKind(SemifieldTag tag, double param) : tag_(tag), param_(param) {}

    SemifieldTag tag_;
    double param_;
};

/// Throws DomainError when `a` is not a valid element of `kind`.
void require_valid(const SemifieldKind& kind, double a);

double add(const SemifieldKind& kind, double a, double b);
double mul(const SemifieldKind& kind, double a, double b);

/// Multiplicative inverse; throws DomainError for the semifield zero.
double inverse(const SemifieldKind& kind, double a);

/// Semifield exponentiation exp_R(t): exp(-t) for Linear/Root,
/// -sign(mu) t for Log, -t for TropicalMax and +t for TropicalMin.
double exp_semifield(const SemifieldKind& kind, double t);

/// The employed semifield metric rho(a, b).
double metric(const SemifieldKind& kind, double a, double b);

/// Measure scaling chi(s) for a dilation of the plane by s > 0.
double measure_scaling(const SemifieldKind& kind, double s);

/// Semifield measure of a set with Lebesgue measure `area` > 0.
double measure_of_area(const SemifieldKind& kind, double area);

/// Pointwise isomorphism into a reference semifield and back.
///   Root(p)     -> Linear>=0   x -> x^p
///   Log(mu)     -> Linear>=0   x -> exp(mu x)
///   TropicalMin -> TropicalMax x -> -x
/// Linear and TropicalMax are their own reference; identity maps are returned.
struct Isomorphism {
    SemifieldKind source;
    SemifieldKind target;
    std::function<double(double)> forward;
    std::function<double(double)> backward;
    bool identity = false;
};

Isomorphism isomorphism_to_reference(const SemifieldKind& kind);

/// Discrete semifield integral of samples on cells of area `cell_area`:
/// (+)_i f_i (x) mu(cell). For the tropical kinds this is the max/min.
double integrate(const SemifieldKind& kind, std::span<const double> values, double cell_area = 1.0);

/// Semifield sum (+)_i f_i of the samples (no measure factor).
double accumulate(const SemifieldKind& kind, std::span<const double> values);

}  // namespace semiscale

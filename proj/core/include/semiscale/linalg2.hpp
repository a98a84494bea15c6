#pragma once

// 2-vectors and 2x2 matrices for kernel metrics. Small enough that a
// dependency would cost more than it saves.

#include <array>
#include <cmath>

namespace semiscale {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm_squared(Vec2 a) { return a.x * a.x + a.y * a.y; }
inline double norm(Vec2 a) { return std::sqrt(norm_squared(a)); }

/// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double d = 1.0;

    static Mat2 identity() { return {}; }
    static Mat2 scaled(double s) { return {s, 0.0, 0.0, s}; }
    static Mat2 rotation(double angle) {
        double cs = std::cos(angle);
        double sn = std::sin(angle);
        return {cs, -sn, sn, cs};
    }

    double det() const { return a * d - b * c; }
    Mat2 transposed() const { return {a, c, b, d}; }
    Mat2 inverse() const {
        double det_inv = 1.0 / det();
        return {d * det_inv, -b * det_inv, -c * det_inv, a * det_inv};
    }

    std::array<double, 4> entries() const { return {a, b, c, d}; }
    static Mat2 from_entries(const std::array<double, 4>& e) { return {e[0], e[1], e[2], e[3]}; }

    bool operator==(const Mat2&) const = default;
};

inline Vec2 operator*(const Mat2& m, Vec2 v) { return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y}; }

inline Mat2 operator*(const Mat2& l, const Mat2& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c,
            l.c * r.b + l.d * r.d};
}

/// Singular values (largest first) of a 2x2 matrix.
inline std::array<double, 2> singular_values(const Mat2& m) {
    double e = (m.a + m.d) / 2.0;
    double f = (m.a - m.d) / 2.0;
    double g = (m.c + m.b) / 2.0;
    double h = (m.c - m.b) / 2.0;
    double q = std::hypot(e, h);
    double r = std::hypot(f, g);
    return {q + r, std::abs(q - r)};
}

/// Rescales the singular values of `m` so that the condition number does not
/// exceed `max_condition`; the singular vectors are kept.
Mat2 clamp_condition(const Mat2& m, double max_condition);

}  // namespace semiscale

#include "semiscale/grid.hpp"

#include <algorithm>
#include <cmath>

#include "semiscale/linalg2.hpp"

namespace semiscale {

Grid2 shifted(const Grid2& field, int dx, int dy, double fill) {
    Grid2 out(field.width(), field.height(), fill);
    for (int y = 0; y < field.height(); ++y) {
        for (int x = 0; x < field.width(); ++x) {
            if (out.inside(x + dx, y + dy)) out(x + dx, y + dy) = field(x, y);
        }
    }
    return out;
}

Grid2 rotated90(const Grid2& field) {
    int w = field.width();
    int h = field.height();
    Grid2 out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) out(y, w - 1 - x) = field(x, y);
    }
    return out;
}

Grid2 flipped_x(const Grid2& field) {
    Grid2 out(field.width(), field.height());
    for (int y = 0; y < field.height(); ++y) {
        for (int x = 0; x < field.width(); ++x) out(field.width() - 1 - x, y) = field(x, y);
    }
    return out;
}

double max_abs_difference(const Grid2& a, const Grid2& b, int margin) {
    if (!a.same_shape(b)) throw std::invalid_argument("grids differ in shape");
    double worst = 0.0;
    for (int y = margin; y < a.height() - margin; ++y) {
        for (int x = margin; x < a.width() - margin; ++x) {
            double u = a(x, y);
            double v = b(x, y);
            if (u == v) continue;
            worst = std::max(worst, std::abs(u - v));
        }
    }
    return worst;
}

Mat2 clamp_condition(const Mat2& m, double max_condition) {
    double e = (m.a + m.d) / 2.0;
    double f = (m.a - m.d) / 2.0;
    double g = (m.c + m.b) / 2.0;
    double h = (m.c - m.b) / 2.0;
    double q = std::hypot(e, h);
    double r = std::hypot(f, g);
    double sx = q + r;
    double sy = q - r;
    if (!(sx > 0.0) || !std::isfinite(sx)) return Mat2::scaled(1e-6);
    double floor = sx / max_condition;
    if (std::abs(sy) >= floor) return m;
    sy = sy < 0.0 ? -floor : floor;
    double a1 = std::atan2(g, f);
    double a2 = std::atan2(h, e);
    double theta = (a2 - a1) / 2.0;
    double phi = (a2 + a1) / 2.0;
    Mat2 sigma{sx, 0.0, 0.0, sy};
    return Mat2::rotation(phi) * sigma * Mat2::rotation(theta);
}

}  // namespace semiscale

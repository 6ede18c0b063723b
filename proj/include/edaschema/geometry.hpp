#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>

namespace eda {

// All layout geometry is kept in DEF database units (DBU) as 64-bit
// integers; conversion to microns happens only at presentation
// boundaries.
using Dbu = std::int64_t;

struct PointDbu {
    Dbu x = 0, y = 0;
    friend bool operator==(const PointDbu&, const PointDbu&) = default;
};

struct RectDbu {
    Dbu x_min = 0, y_min = 0, x_max = 0, y_max = 0;

    Dbu width() const { return x_max - x_min; }
    Dbu height() const { return y_max - y_min; }
    bool empty() const { return x_min >= x_max || y_min >= y_max; }

    bool contains(const RectDbu& r) const {
        return r.x_min >= x_min && r.y_min >= y_min && r.x_max <= x_max &&
               r.y_max <= y_max;
    }
    bool contains(PointDbu p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }

    friend bool operator==(const RectDbu&, const RectDbu&) = default;
};

inline RectDbu intersect(const RectDbu& a, const RectDbu& b) {
    RectDbu r;
    r.x_min = std::max(a.x_min, b.x_min);
    r.y_min = std::max(a.y_min, b.y_min);
    r.x_max = std::min(a.x_max, b.x_max);
    r.y_max = std::min(a.y_max, b.y_max);
    return r;
}

// Axis-aligned box in microns, used for pin extents and net bounding
// boxes once geometry leaves the DBU domain.
struct BoxUm {
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double center_x() const { return 0.5 * (x_min + x_max); }
    double center_y() const { return 0.5 * (y_min + y_max); }

    void expand(double x, double y) {
        x_min = std::min(x_min, x);
        y_min = std::min(y_min, y);
        x_max = std::max(x_max, x);
        y_max = std::max(y_max, y);
    }

    friend bool operator==(const BoxUm&, const BoxUm&) = default;
};

inline double dbu_to_um(Dbu v, int dbu_per_micron) {
    return static_cast<double>(v) / dbu_per_micron;
}

inline Dbu ceil_div(Dbu num, Dbu den) {
    if (den <= 0) throw std::invalid_argument("ceil_div: non-positive divisor");
    return (num + den - 1) / den;
}

}  // namespace eda

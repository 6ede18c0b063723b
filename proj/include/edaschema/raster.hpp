#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "edaschema/errors.hpp"
#include "edaschema/geometry.hpp"

namespace eda {

// Tile grid anchored at the core lower-left. Pixel side is exactly
// k * w_M1; the last row/column may cover area beyond the core edge.
struct GridSpec {
    Dbu origin_x = 0, origin_y = 0;
    Dbu length = 0, width = 0;  // core extent, DBU
    Dbu w_m1 = 0;
    int k = 1;
    int resolution_x = 0, resolution_y = 0;
    int dbu_per_micron = 0;

    Dbu pixel() const { return static_cast<Dbu>(k) * w_m1; }
    double pixel_um() const { return dbu_to_um(pixel(), dbu_per_micron); }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline GridSpec make_grid(const RectDbu& core_box, Dbu w_m1, int k,
                          int dbu_per_micron) {
    if (core_box.empty()) throw ValidationError("degenerate core box");
    if (w_m1 <= 0) throw std::invalid_argument("w_M1 must be positive");
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    GridSpec grid;
    grid.origin_x = core_box.x_min;
    grid.origin_y = core_box.y_min;
    grid.length = core_box.width();
    grid.width = core_box.height();
    grid.w_m1 = w_m1;
    grid.k = k;
    grid.dbu_per_micron = dbu_per_micron;
    grid.resolution_x = static_cast<int>(ceil_div(grid.length, grid.pixel()));
    grid.resolution_y = static_cast<int>(ceil_div(grid.width, grid.pixel()));
    return grid;
}

// Binary occupancy grid. Row 0 is the bottom row.
struct SpatialMap {
    std::string name;
    GridSpec grid;
    std::vector<std::uint8_t> bits;  // resolution_x * resolution_y

    bool at(int ix, int iy) const { return bits[size_t(iy) * grid.resolution_x + ix] != 0; }
    void set(int ix, int iy) { bits[size_t(iy) * grid.resolution_x + ix] = 1; }
    size_t count() const {
        size_t n = 0;
        for (auto b : bits) n += b;
        return n;
    }

    friend bool operator==(const SpatialMap&, const SpatialMap&) = default;
};

// Real-valued tile grid with an emptiness mask so unsampled tiles are
// distinguishable from measured zeros.
struct ScalarMap {
    std::string name;
    std::string unit;
    GridSpec grid;
    std::vector<double> values;
    std::vector<std::uint8_t> occupied;  // 1 where at least one sample landed

    double at(int ix, int iy) const { return values[size_t(iy) * grid.resolution_x + ix]; }
    double& at(int ix, int iy) { return values[size_t(iy) * grid.resolution_x + ix]; }

    friend bool operator==(const ScalarMap&, const ScalarMap&) = default;
};

inline SpatialMap make_spatial_map(std::string name, const GridSpec& grid) {
    SpatialMap m;
    m.name = std::move(name);
    m.grid = grid;
    m.bits.assign(size_t(grid.resolution_x) * grid.resolution_y, 0);
    return m;
}

inline ScalarMap make_scalar_map(std::string name, const GridSpec& grid,
                                 std::string unit = {}) {
    ScalarMap m;
    m.name = std::move(name);
    m.unit = std::move(unit);
    m.grid = grid;
    m.values.assign(size_t(grid.resolution_x) * grid.resolution_y, 0.0);
    m.occupied.assign(m.values.size(), 0);
    return m;
}

// Sets every pixel whose cell intersects a rectangle with positive
// area. Rectangles outside the grid are clipped away.
inline void rasterize_into(SpatialMap& map, std::span<const RectDbu> rects) {
    const GridSpec& grid = map.grid;
    const Dbu p = grid.pixel();
    const Dbu cover_x = static_cast<Dbu>(grid.resolution_x) * p;
    const Dbu cover_y = static_cast<Dbu>(grid.resolution_y) * p;
    for (const RectDbu& r : rects) {
        Dbu x0 = std::max(r.x_min - grid.origin_x, Dbu{0});
        Dbu y0 = std::max(r.y_min - grid.origin_y, Dbu{0});
        Dbu x1 = std::min(r.x_max - grid.origin_x, cover_x);
        Dbu y1 = std::min(r.y_max - grid.origin_y, cover_y);
        if (x0 >= x1 || y0 >= y1) continue;
        int ix0 = static_cast<int>(x0 / p);
        int iy0 = static_cast<int>(y0 / p);
        int ix1 = static_cast<int>(ceil_div(x1, p)) - 1;
        int iy1 = static_cast<int>(ceil_div(y1, p)) - 1;
        for (int iy = iy0; iy <= iy1; ++iy)
            for (int ix = ix0; ix <= ix1; ++ix) map.set(ix, iy);
    }
}

inline SpatialMap rasterize_rects(std::span<const RectDbu> rects, const GridSpec& grid,
                                  std::string name = "map") {
    SpatialMap map = make_spatial_map(std::move(name), grid);
    rasterize_into(map, rects);
    return map;
}

// Pixelwise OR; grids must match.
inline SpatialMap or_maps(std::span<const SpatialMap> maps, std::string name) {
    if (maps.empty()) throw ValidationError("or_maps over an empty set");
    SpatialMap out = make_spatial_map(std::move(name), maps[0].grid);
    for (const auto& m : maps) {
        if (!(m.grid == out.grid)) throw ValidationError("or_maps grid mismatch");
        for (size_t i = 0; i < out.bits.size(); ++i) out.bits[i] |= m.bits[i];
    }
    return out;
}

// a subset-of b, pixelwise.
inline bool map_subset(const SpatialMap& a, const SpatialMap& b) {
    if (!(a.grid == b.grid)) return false;
    for (size_t i = 0; i < a.bits.size(); ++i)
        if (a.bits[i] && !b.bits[i]) return false;
    return true;
}

enum class Aggregator { mean, max };

struct GridSampleUm {
    double x_um, y_um, value;
};

// Bins point samples into tiles; tile value is the mean or max of the
// samples inside. Tiles without samples stay 0 with occupied = 0.
// Binning is lower-left inclusive.
inline ScalarMap bin_samples(std::span<const GridSampleUm> samples, const GridSpec& grid,
                             Aggregator agg, std::string name, std::string unit = {}) {
    ScalarMap map = make_scalar_map(std::move(name), grid, std::move(unit));
    std::vector<int> counts(map.values.size(), 0);
    size_t in_range = 0;
    const double p_um = grid.pixel_um();
    const double ox = dbu_to_um(grid.origin_x, grid.dbu_per_micron);
    const double oy = dbu_to_um(grid.origin_y, grid.dbu_per_micron);
    for (const auto& s : samples) {
        int ix = static_cast<int>(std::floor((s.x_um - ox) / p_um));
        int iy = static_cast<int>(std::floor((s.y_um - oy) / p_um));
        if (ix < 0 || iy < 0 || ix >= grid.resolution_x || iy >= grid.resolution_y)
            continue;
        ++in_range;
        size_t idx = size_t(iy) * grid.resolution_x + ix;
        if (agg == Aggregator::mean) {
            map.values[idx] += s.value;
            ++counts[idx];
        } else {
            if (!counts[idx] || s.value > map.values[idx]) map.values[idx] = s.value;
            ++counts[idx];
        }
        map.occupied[idx] = 1;
    }
    if (!samples.empty() && in_range == 0)
        throw ValidationError("all samples fall outside the grid");
    if (agg == Aggregator::mean)
        for (size_t i = 0; i < map.values.size(); ++i)
            if (counts[i]) map.values[i] /= counts[i];
    return map;
}

}  // namespace eda

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "edaschema/graphs.hpp"
#include "edaschema/raster.hpp"

namespace eda {

// Wire-density estimate of a net bounding box, (w + h) / (w * h), with
// both dimensions clamped to at least one pixel side so degenerate
// boxes stay finite.
inline double net_density(double w_um, double h_um, double pixel_um) {
    double w = std::max(w_um, pixel_um);
    double h = std::max(h_um, pixel_um);
    return (w + h) / (w * h);
}

// Box expanded about its center so each side is at least `pixel_um`.
inline BoxUm clamp_net_box(const BoxUm& box, double pixel_um) {
    BoxUm out = box;
    if (out.width() < pixel_um) {
        double cx = out.center_x();
        out.x_min = cx - 0.5 * pixel_um;
        out.x_max = cx + 0.5 * pixel_um;
    }
    if (out.height() < pixel_um) {
        double cy = out.center_y();
        out.y_min = cy - 0.5 * pixel_um;
        out.y_max = cy + 0.5 * pixel_um;
    }
    return out;
}

enum class NetSpan { short_range, long_range };

namespace rudy_detail {

struct TileRange {
    int ix0, ix1, iy0, iy1;  // inclusive, clipped to the grid
    bool empty;
};

inline TileRange candidate_tiles(const BoxUm& box, const GridSpec& grid) {
    const double p = grid.pixel_um();
    const double ox = dbu_to_um(grid.origin_x, grid.dbu_per_micron);
    const double oy = dbu_to_um(grid.origin_y, grid.dbu_per_micron);
    TileRange r{};
    r.ix0 = std::max(0, static_cast<int>(std::floor((box.x_min - ox) / p)));
    r.iy0 = std::max(0, static_cast<int>(std::floor((box.y_min - oy) / p)));
    r.ix1 = std::min(grid.resolution_x - 1,
                     static_cast<int>(std::ceil((box.x_max - ox) / p)));
    r.iy1 = std::min(grid.resolution_y - 1,
                     static_cast<int>(std::ceil((box.y_max - oy) / p)));
    r.empty = r.ix0 > r.ix1 || r.iy0 > r.iy1;
    return r;
}

inline double tile_overlap(const BoxUm& box, const GridSpec& grid, int ix, int iy) {
    const double p = grid.pixel_um();
    const double ox = dbu_to_um(grid.origin_x, grid.dbu_per_micron);
    const double oy = dbu_to_um(grid.origin_y, grid.dbu_per_micron);
    double x0 = ox + ix * p, y0 = oy + iy * p;
    double w = std::min(box.x_max, x0 + p) - std::max(box.x_min, x0);
    double h = std::min(box.y_max, y0 + p) - std::max(box.y_min, y0);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

}  // namespace rudy_detail

// A net spans long range when its box overlaps at least two tiles with
// positive area. The same overlap arithmetic drives the accumulation,
// so boundary cases classify consistently.
inline NetSpan classify_net_span(const BoxUm& box, const GridSpec& grid) {
    auto range = rudy_detail::candidate_tiles(box, grid);
    if (range.empty) return NetSpan::short_range;
    int covered = 0;
    for (int iy = range.iy0; iy <= range.iy1; ++iy)
        for (int ix = range.ix0; ix <= range.ix1; ++ix)
            if (rudy_detail::tile_overlap(box, grid, ix, iy) > 0.0) {
                if (++covered >= 2) return NetSpan::long_range;
            }
    return NetSpan::short_range;
}

struct RudyNetInput {
    BoxUm box;             // pin-center bounding box, microns
    bool has_box = false;  // nets with no placed endpoint contribute nothing
    std::vector<std::pair<double, double>> pins_um;
};

struct RudyMaps {
    ScalarMap rudy_net;
    ScalarMap rudy_pin;
    ScalarMap rudy_net_long;
    ScalarMap rudy_net_short;

    friend bool operator==(const RudyMaps&, const RudyMaps&) = default;
};

// The four RUDY maps over one grid. Per net: density times per-tile
// overlap area of the clamped box, accumulated into the long- or
// short-range map by tile span; rudy_net is their elementwise sum, so
// the partition identity is exact. Pin RUDY adds the owning net's
// density at each pin's tile, lower-left inclusive.
inline RudyMaps compute_rudy_maps(std::span<const RudyNetInput> nets,
                                  const GridSpec& grid) {
    RudyMaps out{make_scalar_map("rudy_net", grid), make_scalar_map("rudy_pin", grid),
                 make_scalar_map("rudy_net_long", grid),
                 make_scalar_map("rudy_net_short", grid)};
    const double p = grid.pixel_um();
    const double ox = dbu_to_um(grid.origin_x, grid.dbu_per_micron);
    const double oy = dbu_to_um(grid.origin_y, grid.dbu_per_micron);

    for (const auto& net : nets) {
        if (!net.has_box) continue;
        BoxUm box = clamp_net_box(net.box, p);
        double density = net_density(net.box.width(), net.box.height(), p);
        ScalarMap& target = classify_net_span(box, grid) == NetSpan::long_range
                                ? out.rudy_net_long
                                : out.rudy_net_short;
        auto range = rudy_detail::candidate_tiles(box, grid);
        if (!range.empty) {
            for (int iy = range.iy0; iy <= range.iy1; ++iy)
                for (int ix = range.ix0; ix <= range.ix1; ++ix) {
                    double a = rudy_detail::tile_overlap(box, grid, ix, iy);
                    if (a > 0.0) {
                        target.at(ix, iy) += density * a;
                        target.occupied[size_t(iy) * grid.resolution_x + ix] = 1;
                    }
                }
        }
        for (const auto& [px, py] : net.pins_um) {
            int ix = static_cast<int>(std::floor((px - ox) / p));
            int iy = static_cast<int>(std::floor((py - oy) / p));
            if (ix < 0 || iy < 0 || ix >= grid.resolution_x || iy >= grid.resolution_y)
                continue;
            out.rudy_pin.at(ix, iy) += density;
            out.rudy_pin.occupied[size_t(iy) * grid.resolution_x + ix] = 1;
        }
    }

    for (size_t i = 0; i < out.rudy_net.values.size(); ++i) {
        out.rudy_net.values[i] =
            out.rudy_net_long.values[i] + out.rudy_net_short.values[i];
        out.rudy_net.occupied[i] =
            out.rudy_net_long.occupied[i] | out.rudy_net_short.occupied[i];
    }
    return out;
}

// RUDY inputs from a netlist graph: pin-center boxes and pin locations
// of every regular net.
inline std::vector<RudyNetInput> rudy_inputs(const NetlistGraph& g) {
    std::vector<RudyNetInput> nets;
    nets.reserve(g.nets.size());
    for (const auto& net : g.nets) {
        RudyNetInput in;
        if (net.is_special) {
            nets.push_back(std::move(in));
            continue;
        }
        if (net.box) {
            in.box = *net.box;
            in.has_box = true;
        }
        for (int pid : net.pin_ids) {
            const PinNode& pin = g.pins[pid];
            if (pin.box) in.pins_um.emplace_back(pin.x_um(), pin.y_um());
        }
        for (int pid : net.port_ids) {
            const PortNode& port = g.ports[pid];
            if (port.x_um) in.pins_um.emplace_back(*port.x_um, *port.y_um);
        }
        nets.push_back(std::move(in));
    }
    return nets;
}

}  // namespace eda

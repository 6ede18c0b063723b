#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "edaschema/def.hpp"
#include "edaschema/graphs.hpp"
#include "edaschema/lef.hpp"
#include "edaschema/raster.hpp"
#include "edaschema/stage.hpp"

namespace eda {

// Named binary maps in a stable order: downstream exports and the
// per-layer OR identity rely on iteration order.
struct NamedMaps {
    std::vector<SpatialMap> maps;

    const SpatialMap* find(const std::string& name) const {
        for (const auto& m : maps)
            if (m.name == name) return &m;
        return nullptr;
    }
    SpatialMap& add(SpatialMap m) {
        maps.push_back(std::move(m));
        return maps.back();
    }

    friend bool operator==(const NamedMaps&, const NamedMaps&) = default;
};

namespace map_detail {

inline RectDbu component_rect(const Component& c, const Macro& m, int dbu) {
    return {c.x, c.y, c.x + static_cast<Dbu>(std::llround(m.width_um * dbu)),
            c.y + static_cast<Dbu>(std::llround(m.height_um * dbu))};
}

inline void append_pin_rects(std::vector<RectDbu>& out, const Component& c,
                             const Macro& m, int dbu) {
    for (const auto& pin : m.pins)
        for (const auto& [layer, r] : pin.rects)
            out.push_back(graph_detail::place_pin_rect(c, m, r, dbu));
}

}  // namespace map_detail

// Netlist map set per stage: cell/pin placements from global placement
// on, routing from detailed routing on, the filler map only on the
// final layout. Per-layer routing maps cover every routing layer of the
// technology, empty layers included.
inline NamedMaps render_netlist_maps(const PhysicalNetlist& pn, const TechLibrary& tech,
                                     const CellCatalog& catalog, const GridSpec& grid,
                                     Stage stage) {
    if (!window::placement.covers(stage))
        throw ValidationError("netlist maps are available from global_place on");
    const int dbu = pn.dbu_per_micron;
    NamedMaps out;

    std::vector<RectDbu> all, comb, seq, filler, pins;
    for (const auto& c : pn.components) {
        if (c.status == PlaceStatus::unplaced) continue;
        const Macro& m = tech.macros.at(c.cell);
        const CatalogCell& cell = catalog.at(c.cell);
        RectDbu r = map_detail::component_rect(c, m, dbu);
        all.push_back(r);
        if (cell.is_sequential)
            seq.push_back(r);
        else if (cell.is_filler)
            filler.push_back(r);
        else if (!cell.is_tap && !cell.is_diode && !cell.is_macro)
            comb.push_back(r);
        map_detail::append_pin_rects(pins, c, m, dbu);
    }
    for (const auto& p : pn.ports)
        if (p.placed && p.has_shape)
            pins.push_back({p.shape.x_min + p.x, p.shape.y_min + p.y, p.shape.x_max + p.x,
                            p.shape.y_max + p.y});

    out.add(rasterize_rects(all, grid, "cell_placement"));
    out.add(rasterize_rects(comb, grid, "cell_placement_combinational"));
    out.add(rasterize_rects(seq, grid, "cell_placement_sequential"));
    if (window::filler_map.covers(stage))
        out.add(rasterize_rects(filler, grid, "cell_placement_filler"));
    out.add(rasterize_rects(pins, grid, "pin_placement"));

    if (window::routed.covers(stage)) {
        std::vector<RectDbu> routing;
        for (const auto& n : pn.nets) {
            if (n.is_special) continue;
            for (const auto& seg : n.segments) routing.push_back(seg.rect);
        }
        out.add(rasterize_rects(routing, grid, "routing"));
        for (const LefLayer* layer : tech.routing_layers()) {
            std::vector<RectDbu> rects;
            for (const auto& n : pn.nets) {
                if (n.is_special) continue;
                for (const auto& seg : n.segments)
                    if (seg.layer == layer->name) rects.push_back(seg.rect);
            }
            out.add(rasterize_rects(rects, grid, "routing_" + layer->name));
        }
    }
    return out;
}

// Clock network maps: buffer and sink placements from CTS on, clock
// routing from detailed routing on.
inline NamedMaps render_clock_maps(const ClockNetworkGraph& cng, const NetlistGraph& g,
                                   const PhysicalNetlist& pn, const TechLibrary& tech,
                                   const CellCatalog& catalog, const GridSpec& grid,
                                   Stage stage) {
    if (!window::clock_tree.covers(stage))
        throw ValidationError("clock maps are available from cts on");
    const int dbu = pn.dbu_per_micron;
    NamedMaps out;

    std::vector<RectDbu> buffers, sinks, pins;
    for (int gid : cng.gate_ids) {
        const GateNode& gate = g.gates[gid];
        const Component* c = pn.find_component(gate.name);
        if (!c || c->status == PlaceStatus::unplaced) continue;
        const Macro& m = tech.macros.at(c->cell);
        RectDbu r = map_detail::component_rect(*c, m, dbu);
        if (catalog.at(gate.cell).is_sequential)
            sinks.push_back(r);
        else
            buffers.push_back(r);
    }
    for (int pid : cng.pin_ids) {
        const PinNode& pin = g.pins[pid];
        if (!pin.box) continue;
        RectDbu r{static_cast<Dbu>(std::llround(pin.box->x_min * dbu)),
                  static_cast<Dbu>(std::llround(pin.box->y_min * dbu)),
                  static_cast<Dbu>(std::llround(pin.box->x_max * dbu)),
                  static_cast<Dbu>(std::llround(pin.box->y_max * dbu))};
        pins.push_back(r);
    }
    out.add(rasterize_rects(buffers, grid, "cell_placement"));
    out.add(rasterize_rects(sinks, grid, "cell_placement_sequential"));
    out.add(rasterize_rects(pins, grid, "pin_placement"));

    if (window::routed.covers(stage)) {
        std::vector<RectDbu> routing;
        for (int nid : cng.net_ids) {
            const DefNet* n = nullptr;
            for (const auto& cand : pn.nets)
                if (cand.name == g.nets[nid].name) n = &cand;
            if (!n) continue;
            for (const auto& seg : n->segments) routing.push_back(seg.rect);
        }
        out.add(rasterize_rects(routing, grid, "routing"));
        for (const LefLayer* layer : tech.routing_layers()) {
            std::vector<RectDbu> rects;
            for (int nid : cng.net_ids) {
                const DefNet* n = nullptr;
                for (const auto& cand : pn.nets)
                    if (cand.name == g.nets[nid].name) n = &cand;
                if (!n) continue;
                for (const auto& seg : n->segments)
                    if (seg.layer == layer->name) rects.push_back(seg.rect);
            }
            out.add(rasterize_rects(rects, grid, "routing_" + layer->name));
        }
    }
    return out;
}

// Voltage source sites: the core lower-left corner plus a regular grid
// at the given spacing in both dimensions.
inline std::vector<PointDbu> voltage_source_points(const RectDbu& core_box, Dbu spacing) {
    std::vector<PointDbu> pts;
    if (spacing <= 0) throw std::invalid_argument("non-positive source spacing");
    for (Dbu y = core_box.y_min; y <= core_box.y_max; y += spacing)
        for (Dbu x = core_box.x_min; x <= core_box.x_max; x += spacing)
            pts.push_back({x, y});
    return pts;
}

// PDN binary maps from special-net geometry, split by VDD/VSS name.
inline NamedMaps render_pdn_maps(const PhysicalNetlist& pn, const GridSpec& grid,
                                 std::span<const PointDbu> source_points) {
    NamedMaps out;
    std::vector<RectDbu> vdd, vss;
    bool any_special = false;
    for (const auto& n : pn.nets) {
        if (!n.is_special) continue;
        any_special = true;
        std::string upper = n.name;
        for (auto& c : upper) c = static_cast<char>(std::toupper(c));
        std::vector<RectDbu>* side = nullptr;
        if (upper.find("VDD") != std::string::npos)
            side = &vdd;
        else if (upper.find("VSS") != std::string::npos || upper.find("GND") != std::string::npos)
            side = &vss;
        if (!side) continue;
        for (const auto& seg : n.segments) side->push_back(seg.rect);
    }
    if (!any_special) throw ValidationError("design has no special nets");

    out.add(rasterize_rects(vdd, grid, "pdn_routing_vdd"));
    out.add(rasterize_rects(vss, grid, "pdn_routing_vss"));

    SpatialMap sources = make_spatial_map("voltage_source", grid);
    const Dbu p = grid.pixel();
    for (const auto& pt : source_points) {
        Dbu dx = pt.x - grid.origin_x;
        Dbu dy = pt.y - grid.origin_y;
        if (dx < 0 || dy < 0) continue;
        int ix = static_cast<int>(dx / p);
        int iy = static_cast<int>(dy / p);
        if (ix >= grid.resolution_x || iy >= grid.resolution_y) continue;
        sources.set(ix, iy);
    }
    out.add(std::move(sources));
    return out;
}

}  // namespace eda

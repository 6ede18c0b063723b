#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "edaschema/gridded_csv.hpp"
#include "edaschema/graphs.hpp"
#include "edaschema/maps.hpp"
#include "edaschema/rudy.hpp"
#include "edaschema/stage.hpp"

namespace eda {

struct DesignConstraint {
    double clock_period_ns = 0.0;
    double clock_uncertainty_ns = 0.0;
    double clock_latency_ns = 0.0;
    double clock_transition_ns = 0.0;
    double input_delay_ns = 0.0;
    double output_delay_ns = 0.0;
    double aspect_ratio = 1.0;
    double utilization = 0.0;
    double placement_density = 1.0;  // multiple of uniform

    friend bool operator==(const DesignConstraint&, const DesignConstraint&) = default;
};

struct DesignFlow {
    std::string id;
    std::string toolchain;
    std::string design;
    std::string run_status;
    std::vector<Stage> stages;  // subsequence of the canonical order

    friend bool operator==(const DesignFlow&, const DesignFlow&) = default;
};

inline bool stages_canonical(const std::vector<Stage>& stages) {
    for (size_t i = 1; i < stages.size(); ++i)
        if (stages[i] <= stages[i - 1]) return false;
    return true;
}

struct CellMetrics {
    long long no_of_combinational_cells = 0;
    long long no_of_sequential_cells = 0;
    long long no_of_buffers = 0;
    long long no_of_inverters = 0;
    long long no_of_fillers = 0;
    long long no_of_tap_cells = 0;
    long long no_of_diodes = 0;
    long long no_of_macros = 0;
    long long no_of_total_cells = 0;

    friend bool operator==(const CellMetrics&, const CellMetrics&) = default;
};

struct AreaMetrics {
    double combinational_cell_area = 0.0;
    double sequential_cell_area = 0.0;
    double buffer_area = 0.0;
    double inverter_area = 0.0;
    double filler_area = 0.0;
    double tap_cell_area = 0.0;
    double diode_area = 0.0;
    double macro_area = 0.0;
    double cell_area = 0.0;   // sum of the categories
    double total_area = 0.0;  // die area

    friend bool operator==(const AreaMetrics&, const AreaMetrics&) = default;
};

struct PowerMetrics {
    double combinational_power_uw = 0.0;
    double sequential_power_uw = 0.0;
    double macro_power_uw = 0.0;
    double internal_power_uw = 0.0;
    double switching_power_uw = 0.0;
    double leakage_power_uw = 0.0;
    double total_power_uw = 0.0;

    friend bool operator==(const PowerMetrics&, const PowerMetrics&) = default;
};

struct TimingMetrics {
    double total_negative_slack_ns = 0.0;
    double worst_slack_ns = 0.0;
    double worst_arrival_time_ns = 0.0;
    double worst_required_time_ns = 0.0;
    std::string critical_path_startpoint;
    std::string critical_path_endpoint;
    long long no_of_endpoints = 0;
    long long no_of_violating_endpoints = 0;

    friend bool operator==(const TimingMetrics&, const TimingMetrics&) = default;
};

// Stage-level netlist scalars.
struct NetlistStats {
    double width_um = 0.0, height_um = 0.0;  // die extent
    long long no_of_inputs = 0, no_of_outputs = 0;
    long long no_of_cells = 0, no_of_nets = 0, no_of_pins = 0;
    std::optional<double> utilization;       // placed non-filler area / core area
    std::optional<double> total_wirelength_um;  // DR onward
    std::optional<double> total_hpwl_um;        // once endpoints are placed

    friend bool operator==(const NetlistStats&, const NetlistStats&) = default;
};

struct PdnModel {
    std::vector<PointDbu> source_points;
    std::optional<GridSamples> ir_drop_vdd, ir_drop_vss;  // DR onward
    std::optional<GridSamples> em_vdd, em_vss;

    friend bool operator==(const PdnModel&, const PdnModel&) = default;
};

struct StageSnapshot {
    Stage stage = Stage::floorplan;
    std::string run_status = "success";
    GridSpec grid;  // binary-map grid (k = 1)
    NetlistGraph netlist;
    NetlistStats stats;
    std::optional<ClockNetworkGraph> clock_tree;  // CTS onward
    std::optional<PdnModel> pdn;
    std::vector<TimingPathGraph> timing_paths;
    CellMetrics cell_metrics;
    AreaMetrics area_metrics;
    std::optional<PowerMetrics> power_metrics;
    std::optional<TimingMetrics> timing_metrics;
    std::optional<RudyMaps> routability;  // DR onward
    NamedMaps netlist_maps;               // GP onward
    NamedMaps clock_maps;                 // CTS onward
    NamedMaps pdn_maps;                   // FP onward
    std::vector<ScalarMap> heatmaps;      // ir/em scalar maps, DR onward

    friend bool operator==(const StageSnapshot&, const StageSnapshot&) = default;
};

// Table-driven cell classification. Buckets are exclusive with the
// precedence filler > tap > diode > macro > sequential > buffer >
// inverter > combinational, which keeps the count identity exact.
enum class CellBucket { filler, tap, diode, macro_cell, sequential, buffer, inverter, comb };

inline CellBucket classify_cell(const CatalogCell& cell) {
    if (cell.is_filler) return CellBucket::filler;
    if (cell.is_tap) return CellBucket::tap;
    if (cell.is_diode) return CellBucket::diode;
    if (cell.is_macro) return CellBucket::macro_cell;
    if (cell.is_sequential) return CellBucket::sequential;
    if (cell.is_buffer) return CellBucket::buffer;
    if (cell.is_inverter) return CellBucket::inverter;
    return CellBucket::comb;
}

inline CellMetrics compute_cell_metrics(const NetlistGraph& g, const CellCatalog& catalog) {
    CellMetrics m;
    for (const auto& gate : g.gates) {
        switch (classify_cell(catalog.at(gate.cell))) {
            case CellBucket::filler: ++m.no_of_fillers; break;
            case CellBucket::tap: ++m.no_of_tap_cells; break;
            case CellBucket::diode: ++m.no_of_diodes; break;
            case CellBucket::macro_cell: ++m.no_of_macros; break;
            case CellBucket::sequential: ++m.no_of_sequential_cells; break;
            case CellBucket::buffer: ++m.no_of_buffers; break;
            case CellBucket::inverter: ++m.no_of_inverters; break;
            case CellBucket::comb: ++m.no_of_combinational_cells; break;
        }
    }
    m.no_of_total_cells = static_cast<long long>(g.gates.size());
    return m;
}

inline AreaMetrics compute_area_metrics(const NetlistGraph& g, const CellCatalog& catalog,
                                        double die_area_um2) {
    AreaMetrics m;
    for (const auto& gate : g.gates) {
        const CatalogCell& cell = catalog.at(gate.cell);
        double area = cell.width_um * cell.height_um;
        switch (classify_cell(cell)) {
            case CellBucket::filler: m.filler_area += area; break;
            case CellBucket::tap: m.tap_cell_area += area; break;
            case CellBucket::diode: m.diode_area += area; break;
            case CellBucket::macro_cell: m.macro_area += area; break;
            case CellBucket::sequential: m.sequential_cell_area += area; break;
            case CellBucket::buffer: m.buffer_area += area; break;
            case CellBucket::inverter: m.inverter_area += area; break;
            case CellBucket::comb: m.combinational_cell_area += area; break;
        }
    }
    m.cell_area = m.combinational_cell_area + m.sequential_cell_area + m.buffer_area +
                  m.inverter_area + m.filler_area + m.tap_cell_area + m.diode_area +
                  m.macro_area;
    m.total_area = die_area_um2;
    return m;
}

// Endpoint-level aggregation over the setup records of an STA report.
inline TimingMetrics derive_timing_metrics(const StaReport& sta) {
    TimingMetrics m;
    std::map<std::string, double> endpoint_worst;
    bool any = false;
    for (const auto& rec : sta.records) {
        if (rec.check_type != CheckType::setup) continue;
        auto [it, fresh] = endpoint_worst.try_emplace(rec.endpoint, rec.slack_ns);
        if (!fresh) it->second = std::min(it->second, rec.slack_ns);
        if (!any || rec.slack_ns < m.worst_slack_ns) {
            m.worst_slack_ns = rec.slack_ns;
            m.critical_path_startpoint = rec.startpoint;
            m.critical_path_endpoint = rec.endpoint;
        }
        m.worst_arrival_time_ns = std::max(m.worst_arrival_time_ns, rec.arrival_ns);
        if (!any)
            m.worst_required_time_ns = rec.required_ns;
        else
            m.worst_required_time_ns = std::min(m.worst_required_time_ns, rec.required_ns);
        any = true;
    }
    for (const auto& [endpoint, slack] : endpoint_worst) {
        ++m.no_of_endpoints;
        if (slack < 0) {
            ++m.no_of_violating_endpoints;
            m.total_negative_slack_ns += slack;
        }
    }
    return m;
}

// Stage-level QoR values supplied from tool reports. Anything absent
// stays absent in the snapshot; absence differs from a measured zero.
struct QorValues {
    std::optional<PowerMetrics> power;
    std::optional<TimingMetrics> timing;
};

struct Violation {
    std::string entity_path;
    std::string message;
};

struct AssembleInputs {
    Stage stage = Stage::floorplan;
    std::string run_status = "success";
    const PhysicalNetlist* netlist = nullptr;
    const TechLibrary* tech = nullptr;
    const CellCatalog* catalog = nullptr;
    const ParasiticSet* parasitics = nullptr;  // DR onward
    const StaReport* sta = nullptr;
    const QorValues* qor = nullptr;
    std::string clock_source;                   // CNG extraction from CTS on
    const GridSamples* ir_drop_vdd = nullptr;   // DR onward
    const GridSamples* ir_drop_vss = nullptr;
    const GridSamples* em_vdd = nullptr;
    const GridSamples* em_vss = nullptr;
    int scalar_k = 50;
    std::optional<Dbu> w_m1_override;
    Dbu source_spacing = 0;  // 0: no voltage-source sites
    bool render_maps = true;
};

inline StageSnapshot assemble_stage(const AssembleInputs& in) {
    if (!in.netlist || !in.tech || !in.catalog)
        throw ValidationError("assemble_stage needs netlist, tech, and catalog");
    const Stage stage = in.stage;
    if (in.parasitics && !window::routed.covers(stage))
        throw ValidationError(
            "net resistance/capacitance is available only from detailed_route on");
    if ((in.ir_drop_vdd || in.ir_drop_vss || in.em_vdd || in.em_vss) &&
        !window::routed.covers(stage))
        throw ValidationError("IR-drop and EM data are available only from detailed_route on");

    const PhysicalNetlist& pn = *in.netlist;
    StageSnapshot s;
    s.stage = stage;
    s.run_status = in.run_status;

    NetlistGraphInputs gin;
    gin.netlist = in.netlist;
    gin.tech = in.tech;
    gin.catalog = in.catalog;
    gin.parasitics = in.parasitics;
    gin.sta = in.sta;
    gin.stage = stage;
    s.netlist = build_netlist_graph(gin);

    const int dbu = pn.dbu_per_micron;
    const Dbu w_m1 = in.w_m1_override.value_or(in.tech->w_m1());
    s.grid = make_grid(pn.core_box, w_m1, 1, dbu);

    // stage scalars
    s.stats.width_um = dbu_to_um(pn.die_box.width(), dbu);
    s.stats.height_um = dbu_to_um(pn.die_box.height(), dbu);
    s.stats.no_of_cells = static_cast<long long>(s.netlist.gates.size());
    s.stats.no_of_nets = static_cast<long long>(s.netlist.nets.size());
    s.stats.no_of_pins = static_cast<long long>(s.netlist.pins.size());
    for (const auto& p : s.netlist.ports)
        (p.direction == PinDirection::input ? s.stats.no_of_inputs
                                            : s.stats.no_of_outputs)++;
    if (window::placement.covers(stage)) {
        double placed_area = 0.0;
        bool any = false;
        for (const auto& gate : s.netlist.gates) {
            if (!gate.box) continue;
            const CatalogCell& cell = in.catalog->at(gate.cell);
            if (cell.is_filler) continue;
            placed_area += cell.width_um * cell.height_um;
            any = true;
        }
        double core_area = dbu_to_um(pn.core_box.width(), dbu) *
                           dbu_to_um(pn.core_box.height(), dbu);
        if (any && core_area > 0) s.stats.utilization = placed_area / core_area;

        double hpwl = 0.0;
        bool any_hpwl = false;
        for (const auto& net : s.netlist.nets) {
            if (net.is_special) continue;
            if (net.hpwl_um) {
                hpwl += *net.hpwl_um;
                any_hpwl = true;
            }
        }
        if (any_hpwl) s.stats.total_hpwl_um = hpwl;
    }
    if (window::routed.covers(stage)) {
        double total = 0.0;
        for (const auto& net : s.netlist.nets)
            if (!net.is_special && net.length_um) total += *net.length_um;
        s.stats.total_wirelength_um = total;
    }

    // metric bundles
    s.cell_metrics = compute_cell_metrics(s.netlist, *in.catalog);
    s.area_metrics = compute_area_metrics(s.netlist, *in.catalog,
                                          s.stats.width_um * s.stats.height_um);
    if (in.qor && in.qor->power) s.power_metrics = in.qor->power;
    if (in.qor && in.qor->timing)
        s.timing_metrics = in.qor->timing;
    else if (in.sta && !in.sta->records.empty())
        s.timing_metrics = derive_timing_metrics(*in.sta);

    // timing path graphs
    if (in.sta) {
        for (const auto& rec : in.sta->records)
            s.timing_paths.push_back(build_timing_path_graph(rec, s.netlist));
        mark_critical_paths(s.timing_paths);
    }

    // clock network
    if (!in.clock_source.empty() && window::clock_tree.covers(stage))
        s.clock_tree = extract_clock_network(s.netlist, in.clock_source, *in.catalog);

    // power delivery network
    bool has_special = false;
    for (const auto& n : pn.nets) has_special |= n.is_special;
    if (has_special || in.ir_drop_vdd || in.ir_drop_vss) {
        PdnModel pdn;
        if (in.source_spacing > 0)
            pdn.source_points = voltage_source_points(pn.core_box, in.source_spacing);
        if (in.ir_drop_vdd) pdn.ir_drop_vdd = *in.ir_drop_vdd;
        if (in.ir_drop_vss) pdn.ir_drop_vss = *in.ir_drop_vss;
        if (in.em_vdd) pdn.em_vdd = *in.em_vdd;
        if (in.em_vss) pdn.em_vss = *in.em_vss;
        s.pdn = std::move(pdn);
    }

    // spatial maps and heatmaps
    if (in.render_maps) {
        if (window::placement.covers(stage))
            s.netlist_maps =
                render_netlist_maps(pn, *in.tech, *in.catalog, s.grid, stage);
        if (s.clock_tree)
            s.clock_maps = render_clock_maps(*s.clock_tree, s.netlist, pn, *in.tech,
                                             *in.catalog, s.grid, stage);
        if (s.pdn && has_special)
            s.pdn_maps = render_pdn_maps(pn, s.grid,
                                         std::span<const PointDbu>(s.pdn->source_points));

        GridSpec scalar_grid = make_grid(pn.core_box, w_m1, in.scalar_k, dbu);
        auto add_heatmap = [&](const GridSamples* samples, const char* name) {
            if (!samples) return;
            std::vector<GridSampleUm> pts;
            pts.reserve(samples->samples.size());
            for (const auto& gs : samples->samples)
                pts.push_back({gs.x_um, gs.y_um, gs.value});
            s.heatmaps.push_back(bin_samples(pts, scalar_grid, Aggregator::mean, name,
                                             samples->value_unit));
        };
        add_heatmap(in.ir_drop_vdd, "ir_drop_vdd");
        add_heatmap(in.ir_drop_vss, "ir_drop_vss");
        add_heatmap(in.em_vdd, "em_vdd");
        add_heatmap(in.em_vss, "em_vss");

        if (window::routed.covers(stage)) {
            auto inputs = rudy_inputs(s.netlist);
            s.routability = compute_rudy_maps(inputs, scalar_grid);
        }
    }
    return s;
}

// Every invariant breach paired with the entity path it names; an empty
// list means a valid snapshot.
inline std::vector<Violation> validate_snapshot(const StageSnapshot& s) {
    std::vector<Violation> out;
    auto fail = [&](std::string path, std::string message) {
        out.push_back({std::move(path), std::move(message)});
    };

    const CellMetrics& c = s.cell_metrics;
    long long bucket_sum = c.no_of_combinational_cells + c.no_of_sequential_cells +
                           c.no_of_buffers + c.no_of_inverters + c.no_of_fillers +
                           c.no_of_tap_cells + c.no_of_diodes + c.no_of_macros;
    if (bucket_sum != c.no_of_total_cells)
        fail("CellMetrics.no_of_total_cells",
             "bucket sum " + std::to_string(bucket_sum) + " != total " +
                 std::to_string(c.no_of_total_cells));

    const AreaMetrics& a = s.area_metrics;
    double cat_sum = a.combinational_cell_area + a.sequential_cell_area + a.buffer_area +
                     a.inverter_area + a.filler_area + a.tap_cell_area + a.diode_area +
                     a.macro_area;
    if (std::abs(cat_sum - a.cell_area) > 1e-9 * std::max(1.0, std::abs(a.cell_area)))
        fail("AreaMetrics.cell_area", "category areas do not sum to cell_area");
    if (a.total_area + 1e-9 < a.cell_area)
        fail("AreaMetrics.total_area", "total_area is below cell_area");

    if (s.power_metrics) {
        const PowerMetrics& p = *s.power_metrics;
        double parts = p.internal_power_uw + p.switching_power_uw + p.leakage_power_uw;
        if (std::abs(parts - p.total_power_uw) >
            0.01 * std::max(std::abs(p.total_power_uw), 1e-12))
            fail("PowerMetrics.total_power", "internal+switching+leakage off by over 1%");
    }
    if (s.timing_metrics) {
        const TimingMetrics& t = *s.timing_metrics;
        if (t.total_negative_slack_ns > 0)
            fail("TimingMetrics.total_negative_slack", "TNS must be non-positive");
        if (t.total_negative_slack_ns == 0 && t.worst_slack_ns < 0)
            fail("TimingMetrics.total_negative_slack",
                 "zero TNS with negative worst slack");
        if (t.total_negative_slack_ns < 0 && t.worst_slack_ns >= 0)
            fail("TimingMetrics.worst_slack", "negative TNS with non-negative worst slack");
        if (t.no_of_violating_endpoints > t.no_of_endpoints)
            fail("TimingMetrics.no_of_violating_endpoints", "more violating than endpoints");
    }

    // availability windows
    bool routed_ok = window::routed.covers(s.stage);
    for (const auto& net : s.netlist.nets) {
        if (!routed_ok && net.length_um)
            fail("Net." + net.name + ".length", "net length before detailed_route");
        if (!routed_ok && net.resistance_ohm)
            fail("Net." + net.name + ".resistance", "parasitics before detailed_route");
    }
    if (!window::placement.covers(s.stage)) {
        for (const auto& gate : s.netlist.gates)
            if (gate.box) fail("Gate." + gate.name + ".box", "placement before global_place");
        if (!s.netlist_maps.maps.empty())
            fail("Netlist.maps", "placement maps before global_place");
    }
    if (!window::clock_tree.covers(s.stage) && s.clock_tree)
        fail("ClockTree", "clock network before cts");
    if (!routed_ok && s.routability)
        fail("RoutabilityMetrics", "RUDY maps before detailed_route");
    if (!routed_ok && !s.heatmaps.empty())
        fail("Pdn.heatmaps", "IR/EM heatmaps before detailed_route");

    // geometry sanity
    for (const auto& pin : s.netlist.pins)
        if (pin.box && (pin.box->x_min > pin.box->x_max || pin.box->y_min > pin.box->y_max))
            fail("Pin." + pin.name + ".box", "inverted box");

    // clock network containment
    if (s.clock_tree) {
        const auto& cng = *s.clock_tree;
        auto in_range = [](int id, size_t n) { return id >= 0 && size_t(id) < n; };
        for (int gid : cng.gate_ids)
            if (!in_range(gid, s.netlist.gates.size()))
                fail("ClockTree.gates", "gate id outside the parent netlist");
        for (int nid : cng.net_ids)
            if (!in_range(nid, s.netlist.nets.size()))
                fail("ClockTree.nets", "net id outside the parent netlist");
        for (int pid : cng.pin_ids)
            if (!in_range(pid, s.netlist.pins.size()))
                fail("ClockTree.pins", "pin id outside the parent netlist");
    }

    // timing paths
    for (const auto& path : s.timing_paths) {
        double prev = -1e300;
        for (const auto& node : path.nodes) {
            if (node.kind == TpgNodeKind::pin || node.kind == TpgNodeKind::port) {
                if (node.arrival_ns + 1e-9 < prev) {
                    fail("TimingPath." + path.startpoint + "->" + path.endpoint,
                         "arrival times decrease along the path");
                    break;
                }
                prev = node.arrival_ns;
            }
        }
        if (!path.nodes.empty()) {
            double last = path.nodes.back().arrival_ns;
            if (std::abs(last - path.arrival_ns) > 1e-3)
                fail("TimingPath." + path.startpoint + "->" + path.endpoint,
                     "path arrival differs from the last point arrival");
        }
    }

    // sink conservation
    long long fanout_sum = 0;
    for (const auto& net : s.netlist.nets) fanout_sum += net.no_of_fanouts;
    long long sink_sum = 0;
    for (const auto& pin : s.netlist.pins)
        if (pin.direction == PinDirection::input) ++sink_sum;
    for (const auto& port : s.netlist.ports)
        if (port.direction == PinDirection::output && port.net_id >= 0) ++sink_sum;
    if (fanout_sum != sink_sum)
        fail("Netlist.no_of_fanouts", "fanout sum does not match input pins plus output ports");

    return out;
}

}  // namespace eda

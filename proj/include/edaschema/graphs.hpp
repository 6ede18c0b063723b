#pragma once

#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "edaschema/def.hpp"
#include "edaschema/errors.hpp"
#include "edaschema/geometry.hpp"
#include "edaschema/liberty.hpp"
#include "edaschema/spef.hpp"
#include "edaschema/sta_report.hpp"
#include "edaschema/stage.hpp"

namespace eda {

struct PinTiming {
    std::optional<double> setup_rise_slew, setup_fall_slew;
    std::optional<double> hold_rise_slew, hold_fall_slew;
    std::optional<double> setup_rise_slack, setup_fall_slack;
    std::optional<double> hold_rise_slack, hold_fall_slack;

    friend bool operator==(const PinTiming&, const PinTiming&) = default;
};

struct GateNode {
    std::string name;
    std::string cell;
    std::optional<BoxUm> box;  // GP onward
    std::optional<double> internal_power_uw, switching_power_uw, leakage_power_uw,
        total_power_uw;
    std::optional<double> ir_drop_vdd_mv, ir_drop_vss_mv;  // DR onward
    std::vector<int> pin_ids;

    friend bool operator==(const GateNode&, const GateNode&) = default;
};

struct PinNode {
    std::string name;  // instance/pin
    int gate_id = -1;
    int net_id = -1;
    PinDirection direction = PinDirection::unknown;
    std::optional<BoxUm> box;  // GP onward
    PinTiming timing;
    std::optional<double> load_capacitance_ff;
    std::optional<double> switching_activity;  // absent unless a source supplies it
    bool is_startpoint = false;
    bool is_endpoint = false;

    double x_um() const { return box ? box->center_x() : 0.0; }
    double y_um() const { return box ? box->center_y() : 0.0; }

    friend bool operator==(const PinNode&, const PinNode&) = default;
};

struct NetNode {
    std::string name;
    bool is_special = false;
    int no_of_fanouts = 0;  // sink pins: gate inputs plus output ports
    std::optional<BoxUm> box;
    std::optional<double> hpwl_um;    // GP onward
    std::optional<double> length_um;  // DR onward, routed center-lines
    std::optional<double> resistance_ohm;
    std::optional<double> capacitance_ff;
    std::optional<double> total_coupling_capacitance_ff;
    std::vector<int> pin_ids;
    std::vector<int> port_ids;

    friend bool operator==(const NetNode&, const NetNode&) = default;
};

struct PortNode {
    std::string name;
    PinDirection direction = PinDirection::unknown;
    std::optional<double> x_um, y_um;  // GP onward
    int net_id = -1;
    bool is_startpoint = false;
    bool is_endpoint = false;

    friend bool operator==(const PortNode&, const PortNode&) = default;
};

struct NetlistGraph {
    std::vector<GateNode> gates;
    std::vector<PinNode> pins;
    std::vector<NetNode> nets;
    std::vector<PortNode> ports;
    std::map<std::string, int> gate_index;
    std::map<std::string, int> pin_index;  // keyed instance/pin
    std::map<std::string, int> net_index;
    std::map<std::string, int> port_index;
    int dbu_per_micron = 0;

    int find_gate(const std::string& name) const {
        auto it = gate_index.find(name);
        return it == gate_index.end() ? -1 : it->second;
    }
    int find_pin(const std::string& name) const {
        auto it = pin_index.find(name);
        return it == pin_index.end() ? -1 : it->second;
    }
    int find_net(const std::string& name) const {
        auto it = net_index.find(name);
        return it == net_index.end() ? -1 : it->second;
    }
    int find_port(const std::string& name) const {
        auto it = port_index.find(name);
        return it == port_index.end() ? -1 : it->second;
    }

    friend bool operator==(const NetlistGraph&, const NetlistGraph&) = default;
};

// HPWL over the net's connected pin centers and port locations;
// nullopt when nothing on the net is placed.
inline std::optional<double> net_hpwl(const NetlistGraph& g, int net_id) {
    const NetNode& net = g.nets.at(net_id);
    bool any = false;
    BoxUm box;
    auto add = [&](double x, double y) {
        if (!any) {
            box = {x, y, x, y};
            any = true;
        } else {
            box.expand(x, y);
        }
    };
    for (int pid : net.pin_ids) {
        const PinNode& p = g.pins.at(pid);
        if (p.box) add(p.x_um(), p.y_um());
    }
    for (int pid : net.port_ids) {
        const PortNode& p = g.ports.at(pid);
        if (p.x_um && p.y_um) add(*p.x_um, *p.y_um);
    }
    if (!any) return std::nullopt;
    return box.width() + box.height();
}

struct NetlistGraphInputs {
    const PhysicalNetlist* netlist = nullptr;
    const TechLibrary* tech = nullptr;
    const CellCatalog* catalog = nullptr;
    const ParasiticSet* parasitics = nullptr;  // DR onward only
    const StaReport* sta = nullptr;
    Stage stage = Stage::floorplan;
};

namespace graph_detail {

// Pin rectangle in die coordinates for a placed component, honoring the
// mirrored orientations (N, S, FN, FS). Rotated orients are outside the
// supported subset.
inline RectDbu place_pin_rect(const Component& c, const Macro& m, const RectDbu& r,
                              int dbu) {
    bool flip_x = (c.orient == "S" || c.orient == "FN");
    bool flip_y = (c.orient == "S" || c.orient == "FS");
    if (c.orient != "N" && c.orient != "S" && c.orient != "FN" && c.orient != "FS")
        throw ValidationError("unsupported orientation " + c.orient + " on " + c.name);
    Dbu w = static_cast<Dbu>(std::llround(m.width_um * dbu));
    Dbu h = static_cast<Dbu>(std::llround(m.height_um * dbu));
    RectDbu out = r;
    if (flip_x) out = {w - r.x_max, out.y_min, w - r.x_min, out.y_max};
    if (flip_y) out = {out.x_min, h - r.y_max, out.x_max, h - r.y_min};
    out.x_min += c.x;
    out.x_max += c.x;
    out.y_min += c.y;
    out.y_max += c.y;
    return out;
}

inline BoxUm to_um(const RectDbu& r, int dbu) {
    return {dbu_to_um(r.x_min, dbu), dbu_to_um(r.y_min, dbu), dbu_to_um(r.x_max, dbu),
            dbu_to_um(r.y_max, dbu)};
}

inline void apply_point_timing(PinTiming& t, CheckType check, bool rise, double slew,
                               double slack) {
    auto worst_slew = [&](std::optional<double>& slot) {
        if (!slot || slew > *slot) slot = slew;
    };
    auto worst_slack = [&](std::optional<double>& slot) {
        if (!slot || slack < *slot) slot = slack;
    };
    if (check == CheckType::setup) {
        worst_slew(rise ? t.setup_rise_slew : t.setup_fall_slew);
        worst_slack(rise ? t.setup_rise_slack : t.setup_fall_slack);
    } else {
        worst_slew(rise ? t.hold_rise_slew : t.hold_fall_slew);
        worst_slack(rise ? t.hold_rise_slack : t.hold_fall_slack);
    }
}

}  // namespace graph_detail

// Materializes the heterogeneous netlist graph: one gate per component,
// one port per DEF pin, one net per DEF net, and a pin node per
// connected (instance, pin).
inline NetlistGraph build_netlist_graph(const NetlistGraphInputs& in) {
    if (!in.netlist || !in.tech || !in.catalog)
        throw ValidationError("netlist, tech, and catalog inputs are required");
    if (in.parasitics && !window::routed.covers(in.stage))
        throw ValidationError("net parasitics are available only from detailed_route on");

    const PhysicalNetlist& pn = *in.netlist;
    const bool placed = window::placement.covers(in.stage);
    const bool routed = window::routed.covers(in.stage);
    const int dbu = pn.dbu_per_micron;

    NetlistGraph g;
    g.dbu_per_micron = dbu;

    for (const auto& c : pn.components) {
        if (!in.catalog->find(c.cell))
            throw ValidationError("component " + c.name + " references cell " + c.cell +
                                  " missing from the catalog");
        GateNode gate;
        gate.name = c.name;
        gate.cell = c.cell;
        if (placed && c.status != PlaceStatus::unplaced) {
            const Macro& m = in.tech->macros.at(c.cell);
            RectDbu r{c.x, c.y, c.x + static_cast<Dbu>(std::llround(m.width_um * dbu)),
                      c.y + static_cast<Dbu>(std::llround(m.height_um * dbu))};
            gate.box = graph_detail::to_um(r, dbu);
        }
        g.gate_index[gate.name] = static_cast<int>(g.gates.size());
        g.gates.push_back(std::move(gate));
    }

    for (const auto& p : pn.ports) {
        PortNode port;
        port.name = p.name;
        port.direction = p.direction;
        if (placed && p.placed) {
            port.x_um = dbu_to_um(p.x, dbu);
            port.y_um = dbu_to_um(p.y, dbu);
        }
        g.port_index[port.name] = static_cast<int>(g.ports.size());
        g.ports.push_back(std::move(port));
    }

    for (const auto& n : pn.nets) {
        NetNode net;
        net.name = n.name;
        net.is_special = n.is_special;
        int net_id = static_cast<int>(g.nets.size());

        for (const auto& conn : n.connections) {
            if (conn.is_port()) {
                int port_id = g.find_port(conn.pin);
                if (port_id < 0)
                    throw ValidationError("net " + n.name + " connects to unknown port " +
                                          conn.pin);
                g.ports[port_id].net_id = net_id;
                net.port_ids.push_back(port_id);
                if (g.ports[port_id].direction == PinDirection::output) ++net.no_of_fanouts;
                continue;
            }
            int gate_id = g.find_gate(conn.instance);
            if (gate_id < 0)
                throw ValidationError("net " + n.name + " connects to unknown instance " +
                                      conn.instance);
            const Component& c = *pn.find_component(conn.instance);
            const Macro& m = in.tech->macros.at(c.cell);
            const MacroPin* mp = m.find_pin(conn.pin);
            if (!mp)
                throw ValidationError("net " + n.name + " connects to unknown pin " +
                                      conn.instance + "/" + conn.pin);

            PinNode pin;
            pin.name = conn.instance + "/" + conn.pin;
            pin.gate_id = gate_id;
            pin.net_id = net_id;
            pin.direction = mp->direction;
            if (placed && c.status != PlaceStatus::unplaced && !mp->rects.empty()) {
                RectDbu r = graph_detail::place_pin_rect(c, m, mp->rects[0].second, dbu);
                for (size_t i = 1; i < mp->rects.size(); ++i) {
                    RectDbu r2 = graph_detail::place_pin_rect(c, m, mp->rects[i].second, dbu);
                    r.x_min = std::min(r.x_min, r2.x_min);
                    r.y_min = std::min(r.y_min, r2.y_min);
                    r.x_max = std::max(r.x_max, r2.x_max);
                    r.y_max = std::max(r.y_max, r2.y_max);
                }
                pin.box = graph_detail::to_um(r, dbu);
            }
            if (pin.direction == PinDirection::input) ++net.no_of_fanouts;

            int pin_id = static_cast<int>(g.pins.size());
            g.pin_index[pin.name] = pin_id;
            g.pins.push_back(std::move(pin));
            g.gates[gate_id].pin_ids.push_back(pin_id);
            net.pin_ids.push_back(pin_id);
        }

        if (routed) {
            double length = 0.0;
            for (const auto& seg : n.segments) length += dbu_to_um(seg.length(), dbu);
            net.length_um = length;
        }
        if (in.parasitics) {
            if (const NetParasitics* rc = in.parasitics->find(n.name)) {
                net.resistance_ohm = rc->total_resistance;
                net.capacitance_ff = rc->total_capacitance;
                net.total_coupling_capacitance_ff = rc->total_coupling_capacitance;
            }
        }
        g.net_index[net.name] = net_id;
        g.nets.push_back(std::move(net));
    }

    // HPWL once all endpoints exist.
    if (placed) {
        for (size_t i = 0; i < g.nets.size(); ++i) {
            NetNode& net = g.nets[i];
            bool any = false;
            BoxUm box;
            for (int pid : net.pin_ids) {
                const PinNode& p = g.pins[pid];
                if (!p.box) continue;
                if (!any) {
                    box = {p.x_um(), p.y_um(), p.x_um(), p.y_um()};
                    any = true;
                } else {
                    box.expand(p.x_um(), p.y_um());
                }
            }
            for (int pid : net.port_ids) {
                const PortNode& p = g.ports[pid];
                if (!p.x_um) continue;
                if (!any) {
                    box = {*p.x_um, *p.y_um, *p.x_um, *p.y_um};
                    any = true;
                } else {
                    box.expand(*p.x_um, *p.y_um);
                }
            }
            if (any) {
                net.box = box;
                net.hpwl_um = box.width() + box.height();
            }
        }
    }

    // Driver pin load: net ground capacitance plus the sink input caps.
    if (in.parasitics) {
        for (auto& pin : g.pins) {
            if (pin.direction != PinDirection::output || pin.net_id < 0) continue;
            const NetNode& net = g.nets[pin.net_id];
            if (!net.capacitance_ff) continue;
            double load = *net.capacitance_ff;
            for (int pid : net.pin_ids) {
                const PinNode& sink = g.pins[pid];
                if (sink.direction != PinDirection::input) continue;
                auto slash = sink.name.find('/');
                const CatalogCell& cell = in.catalog->at(g.gates[sink.gate_id].cell);
                for (const auto& cp : cell.pins)
                    if (cp.name == sink.name.substr(slash + 1)) load += cp.capacitance_ff;
            }
            pin.load_capacitance_ff = load;
        }
    }

    // Pin timing annotations from the STA report points.
    if (in.sta) {
        for (const auto& rec : in.sta->records) {
            for (const auto& pt : rec.points) {
                int pin_id = g.find_pin(pt.pin);
                if (pin_id >= 0)
                    graph_detail::apply_point_timing(g.pins[pin_id].timing, rec.check_type,
                                                     pt.rise, pt.slew_ns, rec.slack_ns);
            }
            int sp = g.find_pin(rec.startpoint);
            if (sp >= 0) g.pins[sp].is_startpoint = true;
            int ep = g.find_pin(rec.endpoint);
            if (ep >= 0) g.pins[ep].is_endpoint = true;
            int spp = g.find_port(rec.startpoint);
            if (spp >= 0) g.ports[spp].is_startpoint = true;
            int epp = g.find_port(rec.endpoint);
            if (epp >= 0) g.ports[epp].is_endpoint = true;
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Clock network graph

struct ClockNetworkGraph {
    int source_port = -1;  // exactly one of the two is set
    int source_pin = -1;
    std::vector<int> gate_ids;  // buffers/inverters in the fan-out cone
    std::vector<int> net_ids;
    std::vector<int> pin_ids;
    std::vector<int> sink_pin_ids;  // sequential clock pins
    int no_of_buffers = 0;
    int no_of_clock_sinks = 0;
    bool empty_flagged = false;  // source reaches no sequential sink

    friend bool operator==(const ClockNetworkGraph&, const ClockNetworkGraph&) = default;
};

// Breadth-first walk of the buffer/inverter fan-out cone from the clock
// source. Sinks are clock pins of sequential gates.
inline ClockNetworkGraph extract_clock_network(const NetlistGraph& g,
                                               const std::string& clock_source,
                                               const CellCatalog& catalog) {
    ClockNetworkGraph cng;
    std::queue<int> net_frontier;

    int port_id = g.find_port(clock_source);
    int pin_id = port_id < 0 ? g.find_pin(clock_source) : -1;
    if (port_id >= 0) {
        cng.source_port = port_id;
        if (g.ports[port_id].net_id >= 0) net_frontier.push(g.ports[port_id].net_id);
    } else if (pin_id >= 0) {
        cng.source_pin = pin_id;
        if (g.pins[pin_id].net_id >= 0) net_frontier.push(g.pins[pin_id].net_id);
    } else {
        throw ValidationError("clock source " + clock_source + " not found in the netlist");
    }

    std::vector<bool> net_seen(g.nets.size(), false);
    std::vector<bool> gate_seen(g.gates.size(), false);
    while (!net_frontier.empty()) {
        int net_id = net_frontier.front();
        net_frontier.pop();
        if (net_seen[net_id]) continue;
        net_seen[net_id] = true;
        cng.net_ids.push_back(net_id);
        for (int pid : g.nets[net_id].pin_ids) {
            const PinNode& pin = g.pins[pid];
            if (pin.direction != PinDirection::input) continue;
            const GateNode& gate = g.gates[pin.gate_id];
            const CatalogCell& cell = catalog.at(gate.cell);
            if (cell.is_sequential) {
                // honor the liberty clock-pin marking when the cell has one
                bool cell_declares_clock = false;
                bool pin_is_clock = false;
                std::string leaf = pin.name.substr(pin.name.find('/') + 1);
                for (const auto& cp : cell.pins) {
                    cell_declares_clock |= cp.is_clock;
                    if (cp.name == leaf) pin_is_clock = cp.is_clock;
                }
                if (cell_declares_clock && !pin_is_clock) continue;
                cng.pin_ids.push_back(pid);
                cng.sink_pin_ids.push_back(pid);
                if (!gate_seen[pin.gate_id]) {
                    gate_seen[pin.gate_id] = true;
                    cng.gate_ids.push_back(pin.gate_id);
                }
            } else if (cell.is_buffer || cell.is_inverter) {
                cng.pin_ids.push_back(pid);
                if (!gate_seen[pin.gate_id]) {
                    gate_seen[pin.gate_id] = true;
                    cng.gate_ids.push_back(pin.gate_id);
                    ++cng.no_of_buffers;
                    for (int out_pid : gate.pin_ids) {
                        const PinNode& out = g.pins[out_pid];
                        if (out.direction == PinDirection::output && out.net_id >= 0) {
                            cng.pin_ids.push_back(out_pid);
                            net_frontier.push(out.net_id);
                        }
                    }
                }
            }
            // other combinational gates end the clock cone
        }
    }
    cng.no_of_clock_sinks = static_cast<int>(cng.sink_pin_ids.size());
    cng.empty_flagged = cng.sink_pin_ids.empty();
    return cng;
}

// ---------------------------------------------------------------------------
// Timing path graph

enum class TpgNodeKind { pin, port, cell_arc, net_arc };

struct TpgNode {
    TpgNodeKind kind = TpgNodeKind::pin;
    std::string name;  // pin/port name, or owning cell/net for arcs
    int nlg_id = -1;   // pin or port id in the parent graph
    bool resolved = false;
    double delay_ns = 0.0;
    double arrival_ns = 0.0;
    double slew_ns = 0.0;
    std::optional<double> capacitance_ff;  // net arcs

    friend bool operator==(const TpgNode&, const TpgNode&) = default;
};

struct TimingPathGraph {
    std::string startpoint;
    std::string endpoint;
    CheckType path_type = CheckType::setup;
    double arrival_ns = 0.0;
    double required_ns = 0.0;
    double slack_ns = 0.0;
    int no_of_pins = 0;
    bool is_critical_path = false;
    bool has_unresolved = false;
    std::vector<TpgNode> nodes;  // pin, arc, pin, arc, ..., pin

    friend bool operator==(const TimingPathGraph&, const TimingPathGraph&) = default;
};

// Expands a path record into the directed pin/arc chain. Pins that do
// not resolve in the netlist graph are kept with a flag; stages differ
// in which pins exist.
inline TimingPathGraph build_timing_path_graph(const TimingPathRecord& rec,
                                               const NetlistGraph& g) {
    TimingPathGraph tpg;
    tpg.startpoint = rec.startpoint;
    tpg.endpoint = rec.endpoint;
    tpg.path_type = rec.check_type;
    tpg.arrival_ns = rec.arrival_ns;
    tpg.required_ns = rec.required_ns;
    tpg.slack_ns = rec.slack_ns;

    auto add_pin = [&](const std::string& name, double arrival, double slew) {
        TpgNode node;
        node.name = name;
        node.arrival_ns = arrival;
        node.slew_ns = slew;
        int pin_id = g.find_pin(name);
        if (pin_id >= 0) {
            node.kind = TpgNodeKind::pin;
            node.nlg_id = pin_id;
            node.resolved = true;
        } else {
            int port_id = g.find_port(name);
            node.kind = port_id >= 0 ? TpgNodeKind::port : TpgNodeKind::pin;
            node.nlg_id = port_id;
            node.resolved = port_id >= 0;
        }
        if (!node.resolved) tpg.has_unresolved = true;
        tpg.nodes.push_back(std::move(node));
        ++tpg.no_of_pins;
    };

    std::optional<PointKind> prev_arc;
    for (size_t i = 0; i < rec.points.size(); ++i) {
        const PathPoint& pt = rec.points[i];
        if (i == 0) {
            add_pin(pt.pin, pt.arrival_ns, pt.slew_ns);
            continue;
        }
        if (pt.kind == PointKind::startpoint)
            throw ValidationError("interior point marked as a startpoint");
        if (prev_arc && *prev_arc == pt.kind)
            throw ValidationError("non-alternating arc kinds on path " + rec.startpoint +
                                  " -> " + rec.endpoint);
        prev_arc = pt.kind;

        TpgNode arc;
        arc.kind = pt.kind == PointKind::cell_arc ? TpgNodeKind::cell_arc
                                                  : TpgNodeKind::net_arc;
        arc.name = pt.descriptor;
        arc.delay_ns = pt.delay_ns;
        arc.arrival_ns = pt.arrival_ns;
        arc.slew_ns = pt.slew_ns;
        arc.capacitance_ff = pt.capacitance_ff;
        if (pt.kind == PointKind::net_arc) {
            int net_id = g.find_net(pt.descriptor);
            arc.nlg_id = net_id;
            arc.resolved = net_id >= 0;
        } else {
            int gate_id = i > 0 ? g.find_pin(pt.pin) : -1;
            if (gate_id >= 0) {
                arc.nlg_id = g.pins[gate_id].gate_id;
                arc.resolved = true;
            }
        }
        tpg.nodes.push_back(std::move(arc));
        add_pin(pt.pin, pt.arrival_ns, pt.slew_ns);
    }
    return tpg;
}

// Flags every path whose slack ties the minimum of its check type.
inline void mark_critical_paths(std::vector<TimingPathGraph>& paths) {
    for (CheckType check : {CheckType::setup, CheckType::hold}) {
        double worst = 0.0;
        bool any = false;
        for (const auto& p : paths) {
            if (p.path_type != check) continue;
            if (!any || p.slack_ns < worst) worst = p.slack_ns;
            any = true;
        }
        if (!any) continue;
        for (auto& p : paths)
            if (p.path_type == check && p.slack_ns == worst) p.is_critical_path = true;
    }
}

}  // namespace eda

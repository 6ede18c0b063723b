#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "edaschema/analysis.hpp"
#include "edaschema/npy.hpp"
#include "edaschema/parquet.hpp"
#include "edaschema/schema.hpp"
#include "edaschema/sha256.hpp"

namespace eda {

namespace fs = std::filesystem;
using Json = nlohmann::json;

inline constexpr int kStoreSchemaVersion = 2;

struct ManifestEntry {
    std::string id;
    std::string design;
    std::string pdk;
    DesignConstraint constraints;
    std::string grid_anchor = "core";
    int scalar_k = 50;
    std::vector<std::pair<std::string, std::string>> stages;  // name, run_status
    std::map<std::string, std::string> digests;               // relpath -> sha256
};

namespace store_detail {

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("missing artifact " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const fs::path& path, const std::string& data) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << data;
    if (!out) throw ValidationError("short write on " + path.string());
}

inline std::span<const std::uint8_t> as_bytes(const std::string& s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// --- json codecs -------------------------------------------------------------

inline Json constraints_json(const DesignConstraint& c) {
    return Json{{"clock_period_ns", c.clock_period_ns},
                {"clock_uncertainty_ns", c.clock_uncertainty_ns},
                {"clock_latency_ns", c.clock_latency_ns},
                {"clock_transition_ns", c.clock_transition_ns},
                {"input_delay_ns", c.input_delay_ns},
                {"output_delay_ns", c.output_delay_ns},
                {"aspect_ratio", c.aspect_ratio},
                {"utilization", c.utilization},
                {"placement_density", c.placement_density}};
}

inline DesignConstraint constraints_from_json(const Json& j) {
    DesignConstraint c;
    c.clock_period_ns = j.value("clock_period_ns", 0.0);
    c.clock_uncertainty_ns = j.value("clock_uncertainty_ns", 0.0);
    c.clock_latency_ns = j.value("clock_latency_ns", 0.0);
    c.clock_transition_ns = j.value("clock_transition_ns", 0.0);
    c.input_delay_ns = j.value("input_delay_ns", 0.0);
    c.output_delay_ns = j.value("output_delay_ns", 0.0);
    c.aspect_ratio = j.value("aspect_ratio", 1.0);
    c.utilization = j.value("utilization", 0.0);
    c.placement_density = j.value("placement_density", 1.0);
    return c;
}

inline Json grid_json(const GridSpec& g) {
    return Json{{"origin_x", g.origin_x},   {"origin_y", g.origin_y},
                {"length", g.length},       {"width", g.width},
                {"w_m1", g.w_m1},           {"k", g.k},
                {"resolution_x", g.resolution_x}, {"resolution_y", g.resolution_y},
                {"dbu_per_micron", g.dbu_per_micron}};
}

inline GridSpec grid_from_json(const Json& j) {
    GridSpec g;
    g.origin_x = j.at("origin_x").get<Dbu>();
    g.origin_y = j.at("origin_y").get<Dbu>();
    g.length = j.at("length").get<Dbu>();
    g.width = j.at("width").get<Dbu>();
    g.w_m1 = j.at("w_m1").get<Dbu>();
    g.k = j.at("k").get<int>();
    g.resolution_x = j.at("resolution_x").get<int>();
    g.resolution_y = j.at("resolution_y").get<int>();
    g.dbu_per_micron = j.at("dbu_per_micron").get<int>();
    return g;
}

// --- table codecs ------------------------------------------------------------

struct ColumnBuilder {
    parquet::Column col;

    explicit ColumnBuilder(std::string name, parquet::Type type, bool optional = false) {
        col.name = std::move(name);
        col.type = type;
        col.optional = optional;
    }
    void add(double v) { col.f64s.push_back(v); }
    void add(std::int64_t v) { col.i64s.push_back(v); }
    void add(const std::string& v) { col.strings.push_back(v); }
    void add_bool(bool v) { col.bools.push_back(v ? 1 : 0); }
    void add_opt(const std::optional<double>& v) {
        col.present.push_back(v.has_value());
        if (v) col.f64s.push_back(*v);
    }
};

inline std::string join_ids(const std::vector<int>& ids) {
    std::string out;
    for (int id : ids) {
        if (!out.empty()) out += ' ';
        out += std::to_string(id);
    }
    return out;
}

inline std::vector<int> split_ids(const std::string& s) {
    std::vector<int> out;
    size_t i = 0;
    while (i < s.size()) {
        size_t j = s.find(' ', i);
        if (j == std::string::npos) j = s.size();
        out.push_back(std::stoi(s.substr(i, j - i)));
        i = j + 1;
    }
    return out;
}

inline parquet::Table gates_table(const NetlistGraph& g) {
    using parquet::Type;
    ColumnBuilder name("name", Type::byte_array), cell("cell", Type::byte_array),
        pin_ids("pin_ids", Type::byte_array);
    ColumnBuilder x0("x_min", Type::float64, true), y0("y_min", Type::float64, true),
        x1("x_max", Type::float64, true), y1("y_max", Type::float64, true);
    ColumnBuilder pi("internal_power", Type::float64, true),
        ps("switching_power", Type::float64, true),
        pl("leakage_power", Type::float64, true), pt("total_power", Type::float64, true),
        irv("ir_drop_vdd", Type::float64, true), irs("ir_drop_vss", Type::float64, true);
    for (const auto& gate : g.gates) {
        name.add(gate.name);
        cell.add(gate.cell);
        pin_ids.add(join_ids(gate.pin_ids));
        x0.add_opt(gate.box ? std::optional(gate.box->x_min) : std::nullopt);
        y0.add_opt(gate.box ? std::optional(gate.box->y_min) : std::nullopt);
        x1.add_opt(gate.box ? std::optional(gate.box->x_max) : std::nullopt);
        y1.add_opt(gate.box ? std::optional(gate.box->y_max) : std::nullopt);
        pi.add_opt(gate.internal_power_uw);
        ps.add_opt(gate.switching_power_uw);
        pl.add_opt(gate.leakage_power_uw);
        pt.add_opt(gate.total_power_uw);
        irv.add_opt(gate.ir_drop_vdd_mv);
        irs.add_opt(gate.ir_drop_vss_mv);
    }
    parquet::Table t;
    t.num_rows = std::int64_t(g.gates.size());
    for (auto* b : {&name, &cell, &pin_ids, &x0, &y0, &x1, &y1, &pi, &ps, &pl, &pt, &irv,
                    &irs})
        t.columns.push_back(std::move(b->col));
    return t;
}

inline parquet::Table pins_table(const NetlistGraph& g) {
    using parquet::Type;
    ColumnBuilder name("name", Type::byte_array), dir("direction", Type::byte_array);
    ColumnBuilder gate_id("gate_id", Type::int64), net_id("net_id", Type::int64);
    ColumnBuilder x0("x_min", Type::float64, true), y0("y_min", Type::float64, true),
        x1("x_max", Type::float64, true), y1("y_max", Type::float64, true);
    ColumnBuilder srs("setup_rise_slew", Type::float64, true),
        sfs("setup_fall_slew", Type::float64, true),
        hrs("hold_rise_slew", Type::float64, true),
        hfs("hold_fall_slew", Type::float64, true),
        srk("setup_rise_slack", Type::float64, true),
        sfk("setup_fall_slack", Type::float64, true),
        hrk("hold_rise_slack", Type::float64, true),
        hfk("hold_fall_slack", Type::float64, true);
    ColumnBuilder load("load_capacitance", Type::float64, true),
        activity("switching_activity", Type::float64, true);
    ColumnBuilder sp("is_startpoint", Type::boolean), ep("is_endpoint", Type::boolean);
    for (const auto& pin : g.pins) {
        name.add(pin.name);
        dir.add(std::string(pin_direction_name(pin.direction)));
        gate_id.add(std::int64_t(pin.gate_id));
        net_id.add(std::int64_t(pin.net_id));
        x0.add_opt(pin.box ? std::optional(pin.box->x_min) : std::nullopt);
        y0.add_opt(pin.box ? std::optional(pin.box->y_min) : std::nullopt);
        x1.add_opt(pin.box ? std::optional(pin.box->x_max) : std::nullopt);
        y1.add_opt(pin.box ? std::optional(pin.box->y_max) : std::nullopt);
        srs.add_opt(pin.timing.setup_rise_slew);
        sfs.add_opt(pin.timing.setup_fall_slew);
        hrs.add_opt(pin.timing.hold_rise_slew);
        hfs.add_opt(pin.timing.hold_fall_slew);
        srk.add_opt(pin.timing.setup_rise_slack);
        sfk.add_opt(pin.timing.setup_fall_slack);
        hrk.add_opt(pin.timing.hold_rise_slack);
        hfk.add_opt(pin.timing.hold_fall_slack);
        load.add_opt(pin.load_capacitance_ff);
        activity.add_opt(pin.switching_activity);
        sp.add_bool(pin.is_startpoint);
        ep.add_bool(pin.is_endpoint);
    }
    parquet::Table t;
    t.num_rows = std::int64_t(g.pins.size());
    for (auto* b : {&name, &dir, &gate_id, &net_id, &x0, &y0, &x1, &y1, &srs, &sfs, &hrs,
                    &hfs, &srk, &sfk, &hrk, &hfk, &load, &activity, &sp, &ep})
        t.columns.push_back(std::move(b->col));
    return t;
}

inline parquet::Table nets_table(const NetlistGraph& g) {
    using parquet::Type;
    ColumnBuilder name("name", Type::byte_array);
    ColumnBuilder special("is_special", Type::boolean);
    ColumnBuilder fanouts("no_of_fanouts", Type::int64);
    ColumnBuilder x0("x_min", Type::float64, true), y0("y_min", Type::float64, true),
        x1("x_max", Type::float64, true), y1("y_max", Type::float64, true);
    ColumnBuilder hpwl("hpwl", Type::float64, true), length("length", Type::float64, true),
        res("resistance", Type::float64, true), cap("capacitance", Type::float64, true),
        coup("total_coupling_capacitance", Type::float64, true);
    ColumnBuilder pin_ids("pin_ids", Type::byte_array),
        port_ids("port_ids", Type::byte_array);
    for (const auto& net : g.nets) {
        name.add(net.name);
        special.add_bool(net.is_special);
        fanouts.add(std::int64_t(net.no_of_fanouts));
        x0.add_opt(net.box ? std::optional(net.box->x_min) : std::nullopt);
        y0.add_opt(net.box ? std::optional(net.box->y_min) : std::nullopt);
        x1.add_opt(net.box ? std::optional(net.box->x_max) : std::nullopt);
        y1.add_opt(net.box ? std::optional(net.box->y_max) : std::nullopt);
        hpwl.add_opt(net.hpwl_um);
        length.add_opt(net.length_um);
        res.add_opt(net.resistance_ohm);
        cap.add_opt(net.capacitance_ff);
        coup.add_opt(net.total_coupling_capacitance_ff);
        pin_ids.add(join_ids(net.pin_ids));
        port_ids.add(join_ids(net.port_ids));
    }
    parquet::Table t;
    t.num_rows = std::int64_t(g.nets.size());
    for (auto* b : {&name, &special, &fanouts, &x0, &y0, &x1, &y1, &hpwl, &length, &res,
                    &cap, &coup, &pin_ids, &port_ids})
        t.columns.push_back(std::move(b->col));
    return t;
}

inline parquet::Table ports_table(const NetlistGraph& g) {
    using parquet::Type;
    ColumnBuilder name("name", Type::byte_array), dir("direction", Type::byte_array);
    ColumnBuilder x("x", Type::float64, true), y("y", Type::float64, true);
    ColumnBuilder net_id("net_id", Type::int64);
    ColumnBuilder sp("is_startpoint", Type::boolean), ep("is_endpoint", Type::boolean);
    for (const auto& port : g.ports) {
        name.add(port.name);
        dir.add(std::string(pin_direction_name(port.direction)));
        x.add_opt(port.x_um);
        y.add_opt(port.y_um);
        net_id.add(std::int64_t(port.net_id));
        sp.add_bool(port.is_startpoint);
        ep.add_bool(port.is_endpoint);
    }
    parquet::Table t;
    t.num_rows = std::int64_t(g.ports.size());
    for (auto* b : {&name, &dir, &x, &y, &net_id, &sp, &ep})
        t.columns.push_back(std::move(b->col));
    return t;
}

inline parquet::Table paths_table(const std::vector<TimingPathGraph>& paths) {
    using parquet::Type;
    ColumnBuilder sp("startpoint", Type::byte_array), ep("endpoint", Type::byte_array),
        ty("path_type", Type::byte_array);
    ColumnBuilder arr("arrival_time", Type::float64), req("required_time", Type::float64),
        slack("slack", Type::float64);
    ColumnBuilder pins("no_of_pins", Type::int64);
    ColumnBuilder crit("is_critical_path", Type::boolean),
        unres("has_unresolved", Type::boolean);
    for (const auto& p : paths) {
        sp.add(p.startpoint);
        ep.add(p.endpoint);
        ty.add(std::string(check_type_name(p.path_type)));
        arr.add(p.arrival_ns);
        req.add(p.required_ns);
        slack.add(p.slack_ns);
        pins.add(std::int64_t(p.no_of_pins));
        crit.add_bool(p.is_critical_path);
        unres.add_bool(p.has_unresolved);
    }
    parquet::Table t;
    t.num_rows = std::int64_t(paths.size());
    for (auto* b : {&sp, &ep, &ty, &arr, &req, &slack, &pins, &crit, &unres})
        t.columns.push_back(std::move(b->col));
    return t;
}

inline parquet::Table arcs_table(const std::vector<TimingPathGraph>& paths) {
    using parquet::Type;
    ColumnBuilder path_idx("path_idx", Type::int64), seq("seq", Type::int64);
    ColumnBuilder kind("kind", Type::byte_array), name("name", Type::byte_array);
    ColumnBuilder nlg("nlg_id", Type::int64);
    ColumnBuilder resolved("resolved", Type::boolean);
    ColumnBuilder delay("delay", Type::float64), arr("arrival_time", Type::float64),
        slew("slew", Type::float64);
    ColumnBuilder cap("capacitance", Type::float64, true);
    std::int64_t rows = 0;
    for (size_t pi = 0; pi < paths.size(); ++pi) {
        const auto& nodes = paths[pi].nodes;
        for (size_t ni = 0; ni < nodes.size(); ++ni) {
            const TpgNode& n = nodes[ni];
            path_idx.add(std::int64_t(pi));
            seq.add(std::int64_t(ni));
            switch (n.kind) {
                case TpgNodeKind::pin: kind.add("pin"); break;
                case TpgNodeKind::port: kind.add("port"); break;
                case TpgNodeKind::cell_arc: kind.add("cell_arc"); break;
                case TpgNodeKind::net_arc: kind.add("net_arc"); break;
            }
            name.add(n.name);
            nlg.add(std::int64_t(n.nlg_id));
            resolved.add_bool(n.resolved);
            delay.add(n.delay_ns);
            arr.add(n.arrival_ns);
            slew.add(n.slew_ns);
            cap.add_opt(n.capacitance_ff);
            ++rows;
        }
    }
    parquet::Table t;
    t.num_rows = rows;
    for (auto* b : {&path_idx, &seq, &kind, &name, &nlg, &resolved, &delay, &arr, &slew,
                    &cap})
        t.columns.push_back(std::move(b->col));
    return t;
}

inline parquet::Table metrics_table(const StageSnapshot& s) {
    using parquet::Type;
    ColumnBuilder bundle("bundle", Type::byte_array), name("name", Type::byte_array);
    ColumnBuilder num("num", Type::float64, true), text("text", Type::byte_array, true);
    auto put = [&](const std::string& b, const std::string& n, double v) {
        bundle.add(b);
        name.add(n);
        num.add_opt(v);
        text.col.present.push_back(0);
    };
    auto put_text = [&](const std::string& b, const std::string& n, const std::string& v) {
        bundle.add(b);
        name.add(n);
        num.col.present.push_back(0);
        text.col.present.push_back(1);
        text.col.strings.push_back(v);
    };

    const CellMetrics& c = s.cell_metrics;
    put("cell", "no_of_combinational_cells", double(c.no_of_combinational_cells));
    put("cell", "no_of_sequential_cells", double(c.no_of_sequential_cells));
    put("cell", "no_of_buffers", double(c.no_of_buffers));
    put("cell", "no_of_inverters", double(c.no_of_inverters));
    put("cell", "no_of_fillers", double(c.no_of_fillers));
    put("cell", "no_of_tap_cells", double(c.no_of_tap_cells));
    put("cell", "no_of_diodes", double(c.no_of_diodes));
    put("cell", "no_of_macros", double(c.no_of_macros));
    put("cell", "no_of_total_cells", double(c.no_of_total_cells));
    const AreaMetrics& a = s.area_metrics;
    put("area", "combinational_cell_area", a.combinational_cell_area);
    put("area", "sequential_cell_area", a.sequential_cell_area);
    put("area", "buffer_area", a.buffer_area);
    put("area", "inverter_area", a.inverter_area);
    put("area", "filler_area", a.filler_area);
    put("area", "tap_cell_area", a.tap_cell_area);
    put("area", "diode_area", a.diode_area);
    put("area", "macro_area", a.macro_area);
    put("area", "cell_area", a.cell_area);
    put("area", "total_area", a.total_area);
    if (s.power_metrics) {
        const PowerMetrics& p = *s.power_metrics;
        put("power", "combinational_power", p.combinational_power_uw);
        put("power", "sequential_power", p.sequential_power_uw);
        put("power", "macro_power", p.macro_power_uw);
        put("power", "internal_power", p.internal_power_uw);
        put("power", "switching_power", p.switching_power_uw);
        put("power", "leakage_power", p.leakage_power_uw);
        put("power", "total_power", p.total_power_uw);
    }
    if (s.timing_metrics) {
        const TimingMetrics& t = *s.timing_metrics;
        put("timing", "total_negative_slack", t.total_negative_slack_ns);
        put("timing", "worst_slack", t.worst_slack_ns);
        put("timing", "worst_arrival_time", t.worst_arrival_time_ns);
        put("timing", "worst_required_time", t.worst_required_time_ns);
        put("timing", "no_of_endpoints", double(t.no_of_endpoints));
        put("timing", "no_of_violating_endpoints", double(t.no_of_violating_endpoints));
        put_text("timing", "critical_path_startpoint", t.critical_path_startpoint);
        put_text("timing", "critical_path_endpoint", t.critical_path_endpoint);
    }
    parquet::Table t;
    t.num_rows = std::int64_t(bundle.col.strings.size());
    for (auto* b : {&bundle, &name, &num, &text}) t.columns.push_back(std::move(b->col));
    return t;
}

inline parquet::Table pdn_samples_table(const PdnModel& pdn) {
    using parquet::Type;
    ColumnBuilder kind("kind", Type::byte_array);
    ColumnBuilder x("x", Type::float64), y("y", Type::float64), v("value", Type::float64);
    std::int64_t rows = 0;
    auto put = [&](const char* k, const std::optional<GridSamples>& gs) {
        if (!gs) return;
        for (const auto& s : gs->samples) {
            kind.add(k);
            x.add(s.x_um);
            y.add(s.y_um);
            v.add(s.value);
            ++rows;
        }
    };
    put("ir_drop_vdd", pdn.ir_drop_vdd);
    put("ir_drop_vss", pdn.ir_drop_vss);
    put("em_vdd", pdn.em_vdd);
    put("em_vss", pdn.em_vss);
    parquet::Table t;
    t.num_rows = rows;
    for (auto* b : {&kind, &x, &y, &v}) t.columns.push_back(std::move(b->col));
    return t;
}

// --- decode helpers ----------------------------------------------------------

class RowReader {
  public:
    RowReader(const parquet::Table& t, const std::string& name) : col_(t.find(name)) {
        if (!col_) throw ValidationError("table is missing column " + name);
    }

    std::optional<double> opt_f64(size_t row) {
        if (!col_->optional) return col_->f64s.at(row);
        if (!col_->present.at(row)) {
            return std::nullopt;
        }
        return col_->f64s.at(cursor_++);
    }
    double f64(size_t row) { return col_->f64s.at(row); }
    std::int64_t i64(size_t row) { return col_->i64s.at(row); }
    bool boolean(size_t row) { return col_->bools.at(row) != 0; }
    const std::string& str(size_t row) { return col_->strings.at(row); }
    std::optional<std::string> opt_str(size_t row) {
        if (!col_->optional) return col_->strings.at(row);
        if (!col_->present.at(row)) return std::nullopt;
        return col_->strings.at(cursor_++);
    }

  private:
    const parquet::Column* col_;
    size_t cursor_ = 0;  // walks the defined values of optional columns
};

inline PinDirection direction_from_name(const std::string& s) {
    if (s == "INPUT") return PinDirection::input;
    if (s == "OUTPUT") return PinDirection::output;
    if (s == "INOUT") return PinDirection::inout;
    return PinDirection::unknown;
}

inline std::optional<BoxUm> box_from(std::optional<double> x0, std::optional<double> y0,
                                     std::optional<double> x1, std::optional<double> y1) {
    if (!x0) return std::nullopt;
    return BoxUm{*x0, *y0, *x1, *y1};
}

}  // namespace store_detail

// Lazily loads the stages of one stored instance.
class InstanceBundle {
  public:
    InstanceBundle(fs::path root, ManifestEntry entry)
        : root_(std::move(root)), entry_(std::move(entry)) {}

    const ManifestEntry& entry() const { return entry_; }

    std::vector<std::string> stage_names() const {
        std::vector<std::string> out;
        for (const auto& [name, status] : entry_.stages) out.push_back(name);
        return out;
    }

    bool has_stage(const std::string& name) const {
        for (const auto& [stage, status] : entry_.stages)
            if (stage == name) return true;
        return false;
    }

    StageSnapshot load_stage(const std::string& stage_name) const;

  private:
    std::string verified_read(const std::string& relpath) const {
        std::string data = store_detail::read_file(root_ / entry_.id / relpath);
        auto it = entry_.digests.find(relpath);
        if (it == entry_.digests.end())
            throw ValidationError("artifact not in the manifest: " + relpath);
        if (sha256_hex(data) != it->second)
            throw ValidationError("digest mismatch on " + relpath);
        return data;
    }

    fs::path root_;
    ManifestEntry entry_;
};

namespace store_detail {

inline Json manifest_entry_json(const ManifestEntry& e) {
    Json stages = Json::array();
    for (const auto& [name, status] : e.stages)
        stages.push_back(Json{{"name", name}, {"run_status", status}});
    Json digests = Json::object();
    for (const auto& [path, digest] : e.digests) digests[path] = digest;
    return Json{{"id", e.id},
                {"design", e.design},
                {"pdk", e.pdk},
                {"constraints", constraints_json(e.constraints)},
                {"grid_anchor", e.grid_anchor},
                {"k", e.scalar_k},
                {"stages", stages},
                {"digests", digests}};
}

inline ManifestEntry manifest_entry_from_json(const Json& j) {
    ManifestEntry e;
    e.id = j.at("id").get<std::string>();
    e.design = j.at("design").get<std::string>();
    e.pdk = j.at("pdk").get<std::string>();
    e.constraints = constraints_from_json(j.at("constraints"));
    e.grid_anchor = j.value("grid_anchor", "core");
    e.scalar_k = j.value("k", 50);
    for (const auto& s : j.at("stages"))
        e.stages.emplace_back(s.at("name").get<std::string>(),
                              s.value("run_status", "success"));
    if (j.contains("digests"))
        for (const auto& [path, digest] : j.at("digests").items())
            e.digests[path] = digest.get<std::string>();
    return e;
}

}  // namespace store_detail

struct Manifest {
    int schema_version = kStoreSchemaVersion;
    std::vector<ManifestEntry> instances;

    const ManifestEntry* find(const std::string& id) const {
        for (const auto& e : instances)
            if (e.id == id) return &e;
        return nullptr;
    }
};

inline Manifest load_manifest(const fs::path& root) {
    Manifest m;
    fs::path path = root / "manifest.json";
    if (!fs::exists(path)) return m;
    Json j = Json::parse(store_detail::read_file(path));
    m.schema_version = j.value("schema_version", kStoreSchemaVersion);
    if (j.contains("instances"))
        for (const auto& e : j.at("instances"))
            m.instances.push_back(store_detail::manifest_entry_from_json(e));
    return m;
}

// Write-temp-rename keeps a crashed update from tearing the manifest.
inline void save_manifest(const fs::path& root, const Manifest& m) {
    Json j;
    j["schema_version"] = m.schema_version;
    Json instances = Json::array();
    for (const auto& e : m.instances)
        instances.push_back(store_detail::manifest_entry_json(e));
    j["instances"] = instances;
    fs::create_directories(root);
    fs::path tmp = root / "manifest.json.tmp";
    store_detail::write_file(tmp, j.dump(2));
    fs::rename(tmp, root / "manifest.json");
}

inline std::string instance_id(const std::string& design, const std::string& pdk,
                               const DesignConstraint& constraints) {
    std::string hash = sha256_hex(store_detail::constraints_json(constraints).dump());
    return design + "__" + pdk + "__" + hash.substr(0, 8);
}

// Persists one design instance: per-stage columnar tables, dense map
// arrays, and the refreshed manifest entry.
inline ManifestEntry write_instance(const fs::path& root, const std::string& design,
                                    const std::string& pdk,
                                    const DesignConstraint& constraints,
                                    std::span<const StageSnapshot> snapshots,
                                    bool overwrite = false) {
    ManifestEntry entry;
    entry.id = instance_id(design, pdk, constraints);
    entry.design = design;
    entry.pdk = pdk;
    entry.constraints = constraints;

    for (const auto& s : snapshots) {
        auto violations = validate_snapshot(s);
        if (!violations.empty())
            throw ValidationError("snapshot " + std::string(stage_name(s.stage)) +
                                  " fails validation: " + violations[0].entity_path + ": " +
                                  violations[0].message);
        entry.scalar_k = s.routability ? s.routability->rudy_net.grid.k : entry.scalar_k;
    }

    fs::path dir = root / entry.id;
    if (fs::exists(dir)) {
        if (!overwrite)
            throw ValidationError("instance path already exists: " + dir.string());
        fs::remove_all(dir);
    }

    auto put = [&](const std::string& relpath, const std::string& data) {
        store_detail::write_file(dir / relpath, data);
        entry.digests[relpath] = sha256_hex(data);
    };

    for (const auto& s : snapshots) {
        std::string stage_dir = std::string(stage_name(s.stage));
        entry.stages.emplace_back(stage_dir, s.run_status);

        put(stage_dir + "/gates.parquet", parquet::encode_table(store_detail::gates_table(s.netlist)));
        put(stage_dir + "/pins.parquet", parquet::encode_table(store_detail::pins_table(s.netlist)));
        put(stage_dir + "/nets.parquet", parquet::encode_table(store_detail::nets_table(s.netlist)));
        put(stage_dir + "/ports.parquet", parquet::encode_table(store_detail::ports_table(s.netlist)));
        put(stage_dir + "/paths.parquet",
            parquet::encode_table(store_detail::paths_table(s.timing_paths)));
        put(stage_dir + "/arcs.parquet",
            parquet::encode_table(store_detail::arcs_table(s.timing_paths)));
        put(stage_dir + "/metrics.parquet",
            parquet::encode_table(store_detail::metrics_table(s)));

        Json meta;
        meta["stage"] = std::string(stage_name(s.stage));
        meta["run_status"] = s.run_status;
        meta["grid"] = store_detail::grid_json(s.grid);
        meta["stats"] = Json{{"width_um", s.stats.width_um},
                             {"height_um", s.stats.height_um},
                             {"no_of_inputs", s.stats.no_of_inputs},
                             {"no_of_outputs", s.stats.no_of_outputs},
                             {"no_of_cells", s.stats.no_of_cells},
                             {"no_of_nets", s.stats.no_of_nets},
                             {"no_of_pins", s.stats.no_of_pins}};
        if (s.stats.utilization) meta["stats"]["utilization"] = *s.stats.utilization;
        if (s.stats.total_wirelength_um)
            meta["stats"]["total_wirelength_um"] = *s.stats.total_wirelength_um;
        if (s.stats.total_hpwl_um) meta["stats"]["total_hpwl_um"] = *s.stats.total_hpwl_um;

        if (s.clock_tree) {
            const auto& cng = *s.clock_tree;
            meta["clock_tree"] = Json{{"source_port", cng.source_port},
                                      {"source_pin", cng.source_pin},
                                      {"gate_ids", cng.gate_ids},
                                      {"net_ids", cng.net_ids},
                                      {"pin_ids", cng.pin_ids},
                                      {"sink_pin_ids", cng.sink_pin_ids},
                                      {"no_of_buffers", cng.no_of_buffers},
                                      {"no_of_clock_sinks", cng.no_of_clock_sinks},
                                      {"empty_flagged", cng.empty_flagged}};
        }
        if (s.pdn) {
            Json points = Json::array();
            for (const auto& p : s.pdn->source_points)
                points.push_back(Json{{"x", p.x}, {"y", p.y}});
            meta["pdn"] = Json{{"source_points", points}};
            auto unit_of = [](const std::optional<GridSamples>& gs) {
                return gs ? gs->value_unit : "";
            };
            meta["pdn"]["units"] = Json{{"ir_drop_vdd", unit_of(s.pdn->ir_drop_vdd)},
                                        {"ir_drop_vss", unit_of(s.pdn->ir_drop_vss)},
                                        {"em_vdd", unit_of(s.pdn->em_vdd)},
                                        {"em_vss", unit_of(s.pdn->em_vss)}};
            Json present = Json::array();
            if (s.pdn->ir_drop_vdd) present.push_back("ir_drop_vdd");
            if (s.pdn->ir_drop_vss) present.push_back("ir_drop_vss");
            if (s.pdn->em_vdd) present.push_back("em_vdd");
            if (s.pdn->em_vss) present.push_back("em_vss");
            meta["pdn"]["present"] = present;
            put(stage_dir + "/pdn_samples.parquet",
                parquet::encode_table(store_detail::pdn_samples_table(*s.pdn)));
        }

        auto put_binary_maps = [&](const NamedMaps& maps, const std::string& group) {
            Json names = Json::array();
            for (const auto& m : maps.maps) {
                std::string base = "maps/" + group + "__" + m.name;
                put(stage_dir + "/" + base + ".bits",
                    bits_encode(m.bits, m.grid.resolution_x, m.grid.resolution_y));
                Json side{{"name", m.name}, {"grid", store_detail::grid_json(m.grid)}};
                put(stage_dir + "/" + base + ".json", side.dump(2));
                names.push_back(m.name);
            }
            meta["maps"][group] = names;
        };
        put_binary_maps(s.netlist_maps, "netlist");
        put_binary_maps(s.clock_maps, "clock");
        put_binary_maps(s.pdn_maps, "pdn");

        auto put_scalar = [&](const ScalarMap& m, const std::string& group) {
            std::string base = "maps/" + group + "__" + m.name;
            put(stage_dir + "/" + base + ".npy",
                npy_encode_f8(m.values, size_t(m.grid.resolution_y),
                              size_t(m.grid.resolution_x)));
            put(stage_dir + "/" + base + ".occ.bits",
                bits_encode(m.occupied, m.grid.resolution_x, m.grid.resolution_y));
            Json side{{"name", m.name},
                      {"unit", m.unit},
                      {"grid", store_detail::grid_json(m.grid)}};
            put(stage_dir + "/" + base + ".json", side.dump(2));
        };
        Json heat_names = Json::array();
        for (const auto& m : s.heatmaps) {
            put_scalar(m, "heat");
            heat_names.push_back(m.name);
        }
        meta["maps"]["heat"] = heat_names;
        meta["has_routability"] = s.routability.has_value();
        if (s.routability) {
            put_scalar(s.routability->rudy_net, "rudy");
            put_scalar(s.routability->rudy_pin, "rudy");
            put_scalar(s.routability->rudy_net_long, "rudy");
            put_scalar(s.routability->rudy_net_short, "rudy");
        }
        put(stage_dir + "/stage.json", meta.dump(2));
    }

    Manifest manifest = load_manifest(root);
    manifest.instances.erase(
        std::remove_if(manifest.instances.begin(), manifest.instances.end(),
                       [&](const ManifestEntry& e) { return e.id == entry.id; }),
        manifest.instances.end());
    manifest.instances.push_back(entry);
    std::sort(manifest.instances.begin(), manifest.instances.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.id < b.id; });
    save_manifest(root, manifest);
    return entry;
}

inline InstanceBundle read_instance(const fs::path& root, const std::string& id) {
    Manifest manifest = load_manifest(root);
    const ManifestEntry* entry = manifest.find(id);
    if (!entry) throw ValidationError("unknown instance id " + id);
    return InstanceBundle(root, *entry);
}

inline StageSnapshot InstanceBundle::load_stage(const std::string& stage_name_) const {
    if (!has_stage(stage_name_))
        throw ValidationError("instance " + entry_.id + " has no stage " + stage_name_);
    using namespace store_detail;
    StageSnapshot s;
    std::string dir = stage_name_;

    Json meta = Json::parse(verified_read(dir + "/stage.json"));
    s.stage = stage_from_name_or_throw(meta.at("stage").get<std::string>());
    s.run_status = meta.value("run_status", "success");
    s.grid = grid_from_json(meta.at("grid"));
    const Json& stats = meta.at("stats");
    s.stats.width_um = stats.at("width_um").get<double>();
    s.stats.height_um = stats.at("height_um").get<double>();
    s.stats.no_of_inputs = stats.at("no_of_inputs").get<long long>();
    s.stats.no_of_outputs = stats.at("no_of_outputs").get<long long>();
    s.stats.no_of_cells = stats.at("no_of_cells").get<long long>();
    s.stats.no_of_nets = stats.at("no_of_nets").get<long long>();
    s.stats.no_of_pins = stats.at("no_of_pins").get<long long>();
    if (stats.contains("utilization")) s.stats.utilization = stats.at("utilization").get<double>();
    if (stats.contains("total_wirelength_um"))
        s.stats.total_wirelength_um = stats.at("total_wirelength_um").get<double>();
    if (stats.contains("total_hpwl_um"))
        s.stats.total_hpwl_um = stats.at("total_hpwl_um").get<double>();

    auto table_of = [&](const std::string& file) {
        std::string data = verified_read(dir + "/" + file);
        return parquet::decode_table(as_bytes(data));
    };

    {  // gates
        parquet::Table t = table_of("gates.parquet");
        RowReader name(t, "name"), cell(t, "cell"), pin_ids(t, "pin_ids");
        RowReader x0(t, "x_min"), y0(t, "y_min"), x1(t, "x_max"), y1(t, "y_max");
        RowReader pi(t, "internal_power"), ps(t, "switching_power"),
            pl(t, "leakage_power"), pt(t, "total_power"), irv(t, "ir_drop_vdd"),
            irs(t, "ir_drop_vss");
        for (size_t r = 0; r < size_t(t.num_rows); ++r) {
            GateNode g;
            g.name = name.str(r);
            g.cell = cell.str(r);
            g.pin_ids = split_ids(pin_ids.str(r));
            g.box = box_from(x0.opt_f64(r), y0.opt_f64(r), x1.opt_f64(r), y1.opt_f64(r));
            g.internal_power_uw = pi.opt_f64(r);
            g.switching_power_uw = ps.opt_f64(r);
            g.leakage_power_uw = pl.opt_f64(r);
            g.total_power_uw = pt.opt_f64(r);
            g.ir_drop_vdd_mv = irv.opt_f64(r);
            g.ir_drop_vss_mv = irs.opt_f64(r);
            s.netlist.gate_index[g.name] = int(s.netlist.gates.size());
            s.netlist.gates.push_back(std::move(g));
        }
    }
    {  // pins
        parquet::Table t = table_of("pins.parquet");
        RowReader name(t, "name"), dir_col(t, "direction");
        RowReader gate_id(t, "gate_id"), net_id(t, "net_id");
        RowReader x0(t, "x_min"), y0(t, "y_min"), x1(t, "x_max"), y1(t, "y_max");
        RowReader srs(t, "setup_rise_slew"), sfs(t, "setup_fall_slew"),
            hrs(t, "hold_rise_slew"), hfs(t, "hold_fall_slew"),
            srk(t, "setup_rise_slack"), sfk(t, "setup_fall_slack"),
            hrk(t, "hold_rise_slack"), hfk(t, "hold_fall_slack");
        RowReader load(t, "load_capacitance"), activity(t, "switching_activity");
        RowReader sp(t, "is_startpoint"), ep(t, "is_endpoint");
        for (size_t r = 0; r < size_t(t.num_rows); ++r) {
            PinNode p;
            p.name = name.str(r);
            p.direction = direction_from_name(dir_col.str(r));
            p.gate_id = int(gate_id.i64(r));
            p.net_id = int(net_id.i64(r));
            p.box = box_from(x0.opt_f64(r), y0.opt_f64(r), x1.opt_f64(r), y1.opt_f64(r));
            p.timing.setup_rise_slew = srs.opt_f64(r);
            p.timing.setup_fall_slew = sfs.opt_f64(r);
            p.timing.hold_rise_slew = hrs.opt_f64(r);
            p.timing.hold_fall_slew = hfs.opt_f64(r);
            p.timing.setup_rise_slack = srk.opt_f64(r);
            p.timing.setup_fall_slack = sfk.opt_f64(r);
            p.timing.hold_rise_slack = hrk.opt_f64(r);
            p.timing.hold_fall_slack = hfk.opt_f64(r);
            p.load_capacitance_ff = load.opt_f64(r);
            p.switching_activity = activity.opt_f64(r);
            p.is_startpoint = sp.boolean(r);
            p.is_endpoint = ep.boolean(r);
            s.netlist.pin_index[p.name] = int(s.netlist.pins.size());
            s.netlist.pins.push_back(std::move(p));
        }
    }
    {  // nets
        parquet::Table t = table_of("nets.parquet");
        RowReader name(t, "name");
        RowReader special(t, "is_special"), fanouts(t, "no_of_fanouts");
        RowReader x0(t, "x_min"), y0(t, "y_min"), x1(t, "x_max"), y1(t, "y_max");
        RowReader hpwl(t, "hpwl"), length(t, "length"), res(t, "resistance"),
            cap(t, "capacitance"), coup(t, "total_coupling_capacitance");
        RowReader pin_ids(t, "pin_ids"), port_ids(t, "port_ids");
        for (size_t r = 0; r < size_t(t.num_rows); ++r) {
            NetNode n;
            n.name = name.str(r);
            n.is_special = special.boolean(r);
            n.no_of_fanouts = int(fanouts.i64(r));
            n.box = box_from(x0.opt_f64(r), y0.opt_f64(r), x1.opt_f64(r), y1.opt_f64(r));
            n.hpwl_um = hpwl.opt_f64(r);
            n.length_um = length.opt_f64(r);
            n.resistance_ohm = res.opt_f64(r);
            n.capacitance_ff = cap.opt_f64(r);
            n.total_coupling_capacitance_ff = coup.opt_f64(r);
            n.pin_ids = split_ids(pin_ids.str(r));
            n.port_ids = split_ids(port_ids.str(r));
            s.netlist.net_index[n.name] = int(s.netlist.nets.size());
            s.netlist.nets.push_back(std::move(n));
        }
    }
    {  // ports
        parquet::Table t = table_of("ports.parquet");
        RowReader name(t, "name"), dir_col(t, "direction");
        RowReader x(t, "x"), y(t, "y"), net_id(t, "net_id");
        RowReader sp(t, "is_startpoint"), ep(t, "is_endpoint");
        for (size_t r = 0; r < size_t(t.num_rows); ++r) {
            PortNode p;
            p.name = name.str(r);
            p.direction = direction_from_name(dir_col.str(r));
            p.x_um = x.opt_f64(r);
            p.y_um = y.opt_f64(r);
            p.net_id = int(net_id.i64(r));
            p.is_startpoint = sp.boolean(r);
            p.is_endpoint = ep.boolean(r);
            s.netlist.port_index[p.name] = int(s.netlist.ports.size());
            s.netlist.ports.push_back(std::move(p));
        }
    }
    s.netlist.dbu_per_micron = s.grid.dbu_per_micron;
    {  // timing paths and their nodes
        parquet::Table t = table_of("paths.parquet");
        RowReader sp(t, "startpoint"), ep(t, "endpoint"), ty(t, "path_type");
        RowReader arr(t, "arrival_time"), req(t, "required_time"), slack(t, "slack");
        RowReader pins(t, "no_of_pins");
        RowReader crit(t, "is_critical_path"), unres(t, "has_unresolved");
        for (size_t r = 0; r < size_t(t.num_rows); ++r) {
            TimingPathGraph p;
            p.startpoint = sp.str(r);
            p.endpoint = ep.str(r);
            p.path_type = ty.str(r) == "hold" ? CheckType::hold : CheckType::setup;
            p.arrival_ns = arr.f64(r);
            p.required_ns = req.f64(r);
            p.slack_ns = slack.f64(r);
            p.no_of_pins = int(pins.i64(r));
            p.is_critical_path = crit.boolean(r);
            p.has_unresolved = unres.boolean(r);
            s.timing_paths.push_back(std::move(p));
        }
        parquet::Table at = table_of("arcs.parquet");
        RowReader path_idx(at, "path_idx"), seq(at, "seq");
        RowReader kind(at, "kind"), name(at, "name"), nlg(at, "nlg_id");
        RowReader resolved(at, "resolved");
        RowReader delay(at, "delay"), arc_arr(at, "arrival_time"), slew(at, "slew");
        RowReader cap(at, "capacitance");
        for (size_t r = 0; r < size_t(at.num_rows); ++r) {
            TpgNode n;
            const std::string& k = kind.str(r);
            n.kind = k == "pin"        ? TpgNodeKind::pin
                     : k == "port"     ? TpgNodeKind::port
                     : k == "cell_arc" ? TpgNodeKind::cell_arc
                                       : TpgNodeKind::net_arc;
            n.name = name.str(r);
            n.nlg_id = int(nlg.i64(r));
            n.resolved = resolved.boolean(r);
            n.delay_ns = delay.f64(r);
            n.arrival_ns = arc_arr.f64(r);
            n.slew_ns = slew.f64(r);
            n.capacitance_ff = cap.opt_f64(r);
            size_t pi = size_t(path_idx.i64(r));
            (void)seq;
            s.timing_paths.at(pi).nodes.push_back(std::move(n));
        }
    }
    {  // metric bundles
        parquet::Table t = table_of("metrics.parquet");
        RowReader bundle(t, "bundle"), name(t, "name"), num(t, "num"), text(t, "text");
        PowerMetrics power;
        TimingMetrics timing;
        bool has_power = false, has_timing = false;
        for (size_t r = 0; r < size_t(t.num_rows); ++r) {
            const std::string& b = bundle.str(r);
            const std::string& n = name.str(r);
            auto v = num.opt_f64(r);
            auto tx = text.opt_str(r);
            double val = v.value_or(0.0);
            if (b == "cell") {
                auto& c = s.cell_metrics;
                if (n == "no_of_combinational_cells") c.no_of_combinational_cells = (long long)val;
                else if (n == "no_of_sequential_cells") c.no_of_sequential_cells = (long long)val;
                else if (n == "no_of_buffers") c.no_of_buffers = (long long)val;
                else if (n == "no_of_inverters") c.no_of_inverters = (long long)val;
                else if (n == "no_of_fillers") c.no_of_fillers = (long long)val;
                else if (n == "no_of_tap_cells") c.no_of_tap_cells = (long long)val;
                else if (n == "no_of_diodes") c.no_of_diodes = (long long)val;
                else if (n == "no_of_macros") c.no_of_macros = (long long)val;
                else if (n == "no_of_total_cells") c.no_of_total_cells = (long long)val;
            } else if (b == "area") {
                auto& a = s.area_metrics;
                if (n == "combinational_cell_area") a.combinational_cell_area = val;
                else if (n == "sequential_cell_area") a.sequential_cell_area = val;
                else if (n == "buffer_area") a.buffer_area = val;
                else if (n == "inverter_area") a.inverter_area = val;
                else if (n == "filler_area") a.filler_area = val;
                else if (n == "tap_cell_area") a.tap_cell_area = val;
                else if (n == "diode_area") a.diode_area = val;
                else if (n == "macro_area") a.macro_area = val;
                else if (n == "cell_area") a.cell_area = val;
                else if (n == "total_area") a.total_area = val;
            } else if (b == "power") {
                has_power = true;
                if (n == "combinational_power") power.combinational_power_uw = val;
                else if (n == "sequential_power") power.sequential_power_uw = val;
                else if (n == "macro_power") power.macro_power_uw = val;
                else if (n == "internal_power") power.internal_power_uw = val;
                else if (n == "switching_power") power.switching_power_uw = val;
                else if (n == "leakage_power") power.leakage_power_uw = val;
                else if (n == "total_power") power.total_power_uw = val;
            } else if (b == "timing") {
                has_timing = true;
                if (n == "total_negative_slack") timing.total_negative_slack_ns = val;
                else if (n == "worst_slack") timing.worst_slack_ns = val;
                else if (n == "worst_arrival_time") timing.worst_arrival_time_ns = val;
                else if (n == "worst_required_time") timing.worst_required_time_ns = val;
                else if (n == "no_of_endpoints") timing.no_of_endpoints = (long long)val;
                else if (n == "no_of_violating_endpoints")
                    timing.no_of_violating_endpoints = (long long)val;
                else if (n == "critical_path_startpoint")
                    timing.critical_path_startpoint = tx.value_or("");
                else if (n == "critical_path_endpoint")
                    timing.critical_path_endpoint = tx.value_or("");
            }
        }
        if (has_power) s.power_metrics = power;
        if (has_timing) s.timing_metrics = timing;
    }
    if (meta.contains("clock_tree")) {
        const Json& j = meta.at("clock_tree");
        ClockNetworkGraph cng;
        cng.source_port = j.at("source_port").get<int>();
        cng.source_pin = j.at("source_pin").get<int>();
        cng.gate_ids = j.at("gate_ids").get<std::vector<int>>();
        cng.net_ids = j.at("net_ids").get<std::vector<int>>();
        cng.pin_ids = j.at("pin_ids").get<std::vector<int>>();
        cng.sink_pin_ids = j.at("sink_pin_ids").get<std::vector<int>>();
        cng.no_of_buffers = j.at("no_of_buffers").get<int>();
        cng.no_of_clock_sinks = j.at("no_of_clock_sinks").get<int>();
        cng.empty_flagged = j.at("empty_flagged").get<bool>();
        s.clock_tree = std::move(cng);
    }
    if (meta.contains("pdn")) {
        PdnModel pdn;
        for (const auto& p : meta.at("pdn").at("source_points"))
            pdn.source_points.push_back({p.at("x").get<Dbu>(), p.at("y").get<Dbu>()});
        std::string data = verified_read(dir + "/pdn_samples.parquet");
        parquet::Table t = parquet::decode_table(as_bytes(data));
        RowReader kind(t, "kind"), x(t, "x"), y(t, "y"), v(t, "value");
        std::set<std::string> present;
        for (const auto& p : meta.at("pdn").at("present"))
            present.insert(p.get<std::string>());
        auto slot = [&](const std::string& k) -> std::optional<GridSamples>& {
            if (k == "ir_drop_vdd") return pdn.ir_drop_vdd;
            if (k == "ir_drop_vss") return pdn.ir_drop_vss;
            if (k == "em_vdd") return pdn.em_vdd;
            return pdn.em_vss;
        };
        for (const auto& k : present) {
            slot(k).emplace();
            slot(k)->value_unit =
                meta.at("pdn").at("units").at(k).get<std::string>();
        }
        for (size_t r = 0; r < size_t(t.num_rows); ++r) {
            auto& gs = slot(kind.str(r));
            if (!gs) gs.emplace();
            gs->samples.push_back({x.f64(r), y.f64(r), v.f64(r)});
        }
        s.pdn = std::move(pdn);
    }

    auto load_binary_maps = [&](const std::string& group, NamedMaps& out) {
        if (!meta.contains("maps") || !meta.at("maps").contains(group)) return;
        for (const auto& jn : meta.at("maps").at(group)) {
            std::string map_name = jn.get<std::string>();
            std::string base = "maps/" + group + "__" + map_name;
            Json side = Json::parse(verified_read(dir + "/" + base + ".json"));
            std::string data = verified_read(dir + "/" + base + ".bits");
            BitsArray bits = bits_decode(as_bytes(data));
            SpatialMap m;
            m.name = map_name;
            m.grid = grid_from_json(side.at("grid"));
            m.bits = std::move(bits.bits);
            out.maps.push_back(std::move(m));
        }
    };
    load_binary_maps("netlist", s.netlist_maps);
    load_binary_maps("clock", s.clock_maps);
    load_binary_maps("pdn", s.pdn_maps);

    auto load_scalar = [&](const std::string& group, const std::string& map_name) {
        std::string base = "maps/" + group + "__" + map_name;
        Json side = Json::parse(verified_read(dir + "/" + base + ".json"));
        std::string npy = verified_read(dir + "/" + base + ".npy");
        NpyArray arr = npy_decode_f8(as_bytes(npy));
        std::string occ = verified_read(dir + "/" + base + ".occ.bits");
        BitsArray mask = bits_decode(as_bytes(occ));
        ScalarMap m;
        m.name = map_name;
        m.unit = side.value("unit", "");
        m.grid = grid_from_json(side.at("grid"));
        m.values = std::move(arr.values);
        m.occupied = std::move(mask.bits);
        return m;
    };
    if (meta.contains("maps") && meta.at("maps").contains("heat"))
        for (const auto& jn : meta.at("maps").at("heat"))
            s.heatmaps.push_back(load_scalar("heat", jn.get<std::string>()));
    if (meta.value("has_routability", false)) {
        RudyMaps rudy;
        rudy.rudy_net = load_scalar("rudy", "rudy_net");
        rudy.rudy_pin = load_scalar("rudy", "rudy_pin");
        rudy.rudy_net_long = load_scalar("rudy", "rudy_net_long");
        rudy.rudy_net_short = load_scalar("rudy", "rudy_net_short");
        s.routability = std::move(rudy);
    }

    // availability re-check on load
    auto violations = validate_snapshot(s);
    if (!violations.empty())
        throw ValidationError("stored stage fails validation: " +
                              violations[0].entity_path + ": " + violations[0].message);
    return s;
}

// Concatenates one entity table across instances at a stage, with
// (design, pdk, instance, stage) key columns prepended.
struct ExportResult {
    parquet::Table table;
    int warnings = 0;  // instances missing the requested stage
};

inline ExportResult export_tables(std::span<const InstanceBundle> instances,
                                  const std::string& stage_name_,
                                  const std::string& entity) {
    static const std::set<std::string> kinds = {"gates", "pins",  "nets",
                                                "ports", "paths", "arcs"};
    if (!kinds.count(entity)) throw ValidationError("unknown entity kind " + entity);

    ExportResult out;
    using parquet::Type;
    store_detail::ColumnBuilder design("design", Type::byte_array),
        pdk("pdk", Type::byte_array), instance("instance", Type::byte_array),
        stage_col("stage", Type::byte_array);

    bool first = true;
    for (const auto& bundle : instances) {
        if (!bundle.has_stage(stage_name_)) {
            ++out.warnings;
            continue;
        }
        StageSnapshot s = bundle.load_stage(stage_name_);
        parquet::Table part;
        if (entity == "gates") part = store_detail::gates_table(s.netlist);
        else if (entity == "pins") part = store_detail::pins_table(s.netlist);
        else if (entity == "nets") part = store_detail::nets_table(s.netlist);
        else if (entity == "ports") part = store_detail::ports_table(s.netlist);
        else if (entity == "paths") part = store_detail::paths_table(s.timing_paths);
        else part = store_detail::arcs_table(s.timing_paths);

        for (std::int64_t r = 0; r < part.num_rows; ++r) {
            design.add(bundle.entry().design);
            pdk.add(bundle.entry().pdk);
            instance.add(bundle.entry().id);
            stage_col.add(stage_name_);
        }
        if (first) {
            out.table = std::move(part);
            first = false;
        } else {
            if (part.columns.size() != out.table.columns.size())
                throw ValidationError("table shapes differ across instances");
            for (size_t c = 0; c < part.columns.size(); ++c) {
                auto& dst = out.table.columns[c];
                auto& src = part.columns[c];
                dst.present.insert(dst.present.end(), src.present.begin(), src.present.end());
                dst.bools.insert(dst.bools.end(), src.bools.begin(), src.bools.end());
                dst.i64s.insert(dst.i64s.end(), src.i64s.begin(), src.i64s.end());
                dst.f64s.insert(dst.f64s.end(), src.f64s.begin(), src.f64s.end());
                dst.strings.insert(dst.strings.end(), src.strings.begin(), src.strings.end());
            }
            out.table.num_rows += part.num_rows;
        }
    }
    if (first) return out;  // empty result keeps zero columns

    std::vector<parquet::Column> keyed;
    for (auto* b : {&design, &pdk, &instance, &stage_col}) keyed.push_back(std::move(b->col));
    for (auto& c : out.table.columns) keyed.push_back(std::move(c));
    out.table.columns = std::move(keyed);
    return out;
}

}  // namespace eda

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "edaschema/schema.hpp"

namespace eda {

// ---------------------------------------------------------------------------
// Operating point classification

inline double scpr(double worst_slack_ns, double clock_period_ns) {
    if (clock_period_ns <= 0)
        throw std::invalid_argument("clock period must be positive");
    return worst_slack_ns / clock_period_ns * 100.0;
}

// Barely-pass and barely-fail are the open intervals (0, 10) and
// (-10, 0); the boundaries themselves classify as Pass/Fail, with zero
// counted as Pass.
enum class OperatingClass { fail, barely_fail, barely_pass, pass };

inline std::string_view operating_class_name(OperatingClass c) {
    switch (c) {
        case OperatingClass::fail: return "Fail";
        case OperatingClass::barely_fail: return "BarelyFail";
        case OperatingClass::barely_pass: return "BarelyPass";
        case OperatingClass::pass: return "Pass";
    }
    return "?";
}

inline OperatingClass classify_operating_point(double scpr_percent) {
    if (scpr_percent <= -10.0) return OperatingClass::fail;
    if (scpr_percent < 0.0) return OperatingClass::barely_fail;
    if (scpr_percent > 0.0 && scpr_percent < 10.0) return OperatingClass::barely_pass;
    return OperatingClass::pass;  // zero and >= 10
}

// ---------------------------------------------------------------------------
// Parameter sweep manifest

enum class Pdk { ng45, sky130, ihp130, asap7 };

inline std::string_view pdk_name(Pdk p) {
    switch (p) {
        case Pdk::ng45: return "NG45";
        case Pdk::sky130: return "SKY130";
        case Pdk::ihp130: return "IHP130";
        case Pdk::asap7: return "ASAP7";
    }
    return "?";
}

inline std::optional<Pdk> pdk_from_name(std::string_view name) {
    std::string up(name);
    for (auto& c : up) c = static_cast<char>(std::toupper(c));
    if (up == "NG45") return Pdk::ng45;
    if (up == "SKY130") return Pdk::sky130;
    if (up == "IHP130") return Pdk::ihp130;
    if (up == "ASAP7") return Pdk::asap7;
    return std::nullopt;
}

inline std::vector<double> pdk_utilizations(Pdk p) {
    switch (p) {
        case Pdk::ng45:
        case Pdk::asap7: return {0.3, 0.4, 0.5};
        case Pdk::sky130:
        case Pdk::ihp130: return {0.2, 0.3, 0.4};
    }
    return {};
}

// 12.5% of the fastest benchmark clock period per node.
inline double pdk_clock_transition_ns(Pdk p) {
    switch (p) {
        case Pdk::ng45: return 0.05;
        case Pdk::sky130: return 0.1875;
        case Pdk::ihp130: return 0.1875;
        case Pdk::asap7: return 0.02375;
    }
    return 0.0;
}

struct SweepOptions {
    // The flow text caps clock uncertainty at 250 ps while the parameter
    // table says 50 ps; both are supported, 250 ps being the default.
    double uncertainty_cap_ns = 0.250;
};

// Cross product of clock periods {0.8 BF, BF, BP, 1.2 BP} (deduplicated),
// aspect ratios {0.5, 1, 1.5}, node-specific utilizations, and placement
// densities {1, 1.25, 1.5}. Derived constraints: I/O delays 20% of the
// period, latency 1% capped at 50 ps, uncertainty 5% capped per options,
// transition fixed per node.
inline std::vector<DesignConstraint> sweep_manifest(double bp_period_ns,
                                                    double bf_period_ns, Pdk pdk,
                                                    const SweepOptions& opt = {}) {
    if (!(bp_period_ns >= bf_period_ns) || bf_period_ns <= 0)
        throw std::invalid_argument("need BP >= BF > 0");
    std::vector<double> clocks = {0.8 * bf_period_ns, bf_period_ns, bp_period_ns,
                                  1.2 * bp_period_ns};
    std::sort(clocks.begin(), clocks.end());
    clocks.erase(std::unique(clocks.begin(), clocks.end()), clocks.end());
    const std::vector<double> aspect_ratios = {0.5, 1.0, 1.5};
    const std::vector<double> utilizations = pdk_utilizations(pdk);
    const std::vector<double> densities = {1.0, 1.25, 1.5};

    std::vector<DesignConstraint> out;
    for (double tcp : clocks)
        for (double ar : aspect_ratios)
            for (double util : utilizations)
                for (double density : densities) {
                    DesignConstraint c;
                    c.clock_period_ns = tcp;
                    c.aspect_ratio = ar;
                    c.utilization = util;
                    c.placement_density = density;
                    c.input_delay_ns = 0.2 * tcp;
                    c.output_delay_ns = 0.2 * tcp;
                    c.clock_latency_ns = std::min(0.01 * tcp, 0.050);
                    c.clock_uncertainty_ns = std::min(0.05 * tcp, opt.uncertainty_cap_ns);
                    c.clock_transition_ns = pdk_clock_transition_ns(pdk);
                    out.push_back(c);
                }
    return out;
}

// ---------------------------------------------------------------------------
// Metric values with sentinels

// A statistic cell: a number, a thresholded sentinel (">10000%" MAPE,
// "<-1" R2), an undefined marker (empty denominator), or absent
// (statistic not applicable to the metric/stage).
struct StatValue {
    enum class State { value, mape_overflow, r2_floor, undefined, absent };
    State state = State::absent;
    double value = 0.0;

    static StatValue of(double v) { return {State::value, v}; }
    static StatValue overflow() { return {State::mape_overflow, 0.0}; }
    static StatValue floor_r2() { return {State::r2_floor, 0.0}; }
    static StatValue undefined() { return {State::undefined, 0.0}; }

    bool is_value() const { return state == State::value; }
    bool is_absent() const { return state == State::absent; }

    friend bool operator==(const StatValue&, const StatValue&) = default;
};

inline constexpr double kMapeOverflowPercent = 10000.0;
inline constexpr double kR2Floor = -1.0;
inline constexpr double kR2VarianceFloor = 1e-12;

// ---------------------------------------------------------------------------
// Matched series

struct SeriesPair {
    std::string key;
    double baseline = 0.0;
    double final_value = 0.0;

    friend bool operator==(const SeriesPair&, const SeriesPair&) = default;
};

struct MatchedSeries {
    std::string kind;  // path | cell_arc | net_arc | net | design
    std::vector<SeriesPair> pairs;
    long long excluded_count = 0;
};

// ---------------------------------------------------------------------------
// Regression metrics

struct RegressionMetrics {
    long long n = 0;
    double mae = 0.0;
    double abs_error_sum = 0.0;
    StatValue mape;  // percent; excludes zero-final pairs
    long long mape_excluded = 0;
    StatValue r2;
};

inline RegressionMetrics regression_metrics(const MatchedSeries& series) {
    if (series.pairs.empty()) throw ValidationError("regression over an empty series");
    RegressionMetrics m;
    m.n = static_cast<long long>(series.pairs.size());

    for (const auto& p : series.pairs) m.abs_error_sum += std::abs(p.baseline - p.final_value);
    m.mae = m.abs_error_sum / static_cast<double>(m.n);

    double mape_sum = 0.0;
    long long mape_n = 0;
    for (const auto& p : series.pairs) {
        if (p.final_value == 0.0) {
            ++m.mape_excluded;
            continue;
        }
        mape_sum += std::abs(1.0 - p.baseline / p.final_value);
        ++mape_n;
    }
    if (mape_n == 0) {
        m.mape = StatValue::undefined();
    } else {
        double mape = 100.0 * mape_sum / static_cast<double>(mape_n);
        m.mape = mape > kMapeOverflowPercent ? StatValue::overflow() : StatValue::of(mape);
    }

    double mean_final = 0.0;
    for (const auto& p : series.pairs) mean_final += p.final_value;
    mean_final /= static_cast<double>(m.n);
    double sse = 0.0, sst = 0.0;
    for (const auto& p : series.pairs) {
        sse += (p.final_value - p.baseline) * (p.final_value - p.baseline);
        sst += (p.final_value - mean_final) * (p.final_value - mean_final);
    }
    if (sse == 0.0) {
        m.r2 = StatValue::of(1.0);  // perfect prediction, variance aside
    } else if (sst < kR2VarianceFloor) {
        m.r2 = StatValue::floor_r2();
    } else {
        double r2 = 1.0 - sse / sst;
        m.r2 = r2 < kR2Floor ? StatValue::floor_r2() : StatValue::of(r2);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Directional metrics

struct DirectionalMetrics {
    long long n_p = 0, n_n = 0;
    double pos_error_sum = 0.0;  // over baseline > final
    double neg_error_sum = 0.0;  // over baseline < final
    StatValue mpe, mne;          // absent when a side has no samples
};

inline DirectionalMetrics directional_metrics(const MatchedSeries& series) {
    DirectionalMetrics m;
    for (const auto& p : series.pairs) {
        if (p.baseline > p.final_value) {
            m.pos_error_sum += p.baseline - p.final_value;
            ++m.n_p;
        } else if (p.baseline < p.final_value) {
            m.neg_error_sum += p.final_value - p.baseline;
            ++m.n_n;
        }
        // exact ties contribute to neither side
    }
    m.mpe = m.n_p ? StatValue::of(m.pos_error_sum / static_cast<double>(m.n_p))
                  : StatValue{};
    m.mne = m.n_n ? StatValue::of(m.neg_error_sum / static_cast<double>(m.n_n))
                  : StatValue{};
    return m;
}

// ---------------------------------------------------------------------------
// Violation classification metrics

struct ClassificationMetrics {
    long long tp = 0, tn = 0, fp = 0, fn = 0;
    StatValue tpr, tnr;
};

// Series values are slacks; violating means negative. Positive class is
// a violating final value, the prediction is the baseline sign.
inline ClassificationMetrics classification_metrics(const MatchedSeries& series) {
    ClassificationMetrics m;
    for (const auto& p : series.pairs) {
        bool actual = p.final_value < 0.0;
        bool predicted = p.baseline < 0.0;
        if (actual && predicted) ++m.tp;
        else if (actual && !predicted) ++m.fn;
        else if (!actual && predicted) ++m.fp;
        else ++m.tn;
    }
    m.tpr = (m.tp + m.fn) ? StatValue::of(100.0 * m.tp / double(m.tp + m.fn))
                          : StatValue::undefined();
    m.tnr = (m.tn + m.fp) ? StatValue::of(100.0 * m.tn / double(m.tn + m.fp))
                          : StatValue::undefined();
    return m;
}

// ---------------------------------------------------------------------------
// Tail metrics

struct TailMetrics {
    StatValue mae_p95, mape_p95;
    StatValue mae_top5, mape_top5;
};

// Nearest-rank percentile, no interpolation: the ceil(P/100 * n)-th of
// the sorted values.
inline double nearest_rank(std::vector<double> values, double percentile) {
    std::sort(values.begin(), values.end());
    size_t rank = static_cast<size_t>(
        std::ceil(percentile / 100.0 * static_cast<double>(values.size())));
    rank = std::max<size_t>(rank, 1);
    return values[std::min(rank, values.size()) - 1];
}

inline constexpr long long kTopFractionMinSeries = 20;

inline TailMetrics tail_metrics(const MatchedSeries& series, double percentile = 95.0) {
    TailMetrics m;
    if (series.pairs.empty()) {
        m.mae_p95 = m.mape_p95 = m.mae_top5 = m.mape_top5 = StatValue::undefined();
        return m;
    }
    std::vector<double> abs_errors;
    std::vector<double> pct_errors;
    std::vector<double> finals;
    for (const auto& p : series.pairs) {
        abs_errors.push_back(std::abs(p.baseline - p.final_value));
        finals.push_back(p.final_value);
        if (p.final_value != 0.0)
            pct_errors.push_back(100.0 * std::abs(1.0 - p.baseline / p.final_value));
    }
    m.mae_p95 = StatValue::of(nearest_rank(abs_errors, percentile));
    m.mape_p95 = pct_errors.empty() ? StatValue::undefined()
                                    : StatValue::of(nearest_rank(pct_errors, percentile));

    if (static_cast<long long>(series.pairs.size()) < kTopFractionMinSeries) {
        m.mae_top5 = m.mape_top5 = StatValue::undefined();
        return m;
    }
    // membership: final value strictly above the nearest-rank cut; a
    // fully tied series leaves the set empty and the error mass zero
    double cut = nearest_rank(finals, percentile);
    double top_abs = 0.0, top_pct = 0.0;
    long long top_n = 0, top_pct_n = 0;
    for (const auto& p : series.pairs) {
        if (!(p.final_value > cut)) continue;
        top_abs += std::abs(p.baseline - p.final_value);
        ++top_n;
        if (p.final_value != 0.0) {
            top_pct += 100.0 * std::abs(1.0 - p.baseline / p.final_value);
            ++top_pct_n;
        }
    }
    m.mae_top5 = StatValue::of(top_n ? top_abs / double(top_n) : 0.0);
    m.mape_top5 = StatValue::of(top_pct_n ? top_pct / double(top_pct_n) : 0.0);
    return m;
}

// ---------------------------------------------------------------------------
// Pearson correlation

inline StatValue pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("length mismatch");
    if (xs.size() < 2) throw std::invalid_argument("need at least two observations");
    const size_t n = xs.size();
    double mean_x = 0.0, mean_y = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= double(n);
    mean_y /= double(n);
    double sxy = 0.0, sx = 0.0, sy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mean_x;
        double dy = ys[i] - mean_y;
        sxy += dx * dy;
        sx += dx * dx;
        sy += dy * dy;
    }
    auto constant = [](std::span<const double> v) {
        for (size_t i = 1; i < v.size(); ++i)
            if (v[i] != v[0]) return false;
        return true;
    };
    if (constant(xs) || constant(ys) || sx == 0.0 || sy == 0.0)
        return StatValue::undefined();
    return StatValue::of(sxy / std::sqrt(sx * sy));
}

// ---------------------------------------------------------------------------
// Cross-stage matching

enum class SeriesKind { path, cell_arc, net_arc, net, design };

inline std::string_view series_kind_name(SeriesKind k) {
    switch (k) {
        case SeriesKind::path: return "path";
        case SeriesKind::cell_arc: return "cell_arc";
        case SeriesKind::net_arc: return "net_arc";
        case SeriesKind::net: return "net";
        case SeriesKind::design: return "design";
    }
    return "?";
}

enum class SeriesMetric { path_arrival, path_slack, arc_delay, arc_slew, interconnect };

namespace analysis_detail {

inline std::string path_key(const TimingPathGraph& p) {
    return p.startpoint + "\x1f" + p.endpoint + "\x1f" +
           std::string(check_type_name(p.path_type));
}

// Worst-slack representative per (startpoint, endpoint, check) key.
inline std::map<std::string, const TimingPathGraph*> dedup_paths(
    const StageSnapshot& s) {
    std::map<std::string, const TimingPathGraph*> out;
    for (const auto& p : s.timing_paths) {
        auto [it, fresh] = out.try_emplace(path_key(p), &p);
        if (!fresh && p.slack_ns < it->second->slack_ns) it->second = &p;
    }
    return out;
}

struct ArcRef {
    const TpgNode* node;
    std::string key;  // path key + driver pin + sink pin
};

inline std::vector<ArcRef> path_arcs(const std::string& pkey, const TimingPathGraph& p,
                                     TpgNodeKind kind) {
    std::vector<ArcRef> out;
    for (size_t i = 1; i + 1 < p.nodes.size(); i += 2) {
        const TpgNode& arc = p.nodes[i];
        if (arc.kind != kind) continue;
        out.push_back({&arc, pkey + "\x1f" + p.nodes[i - 1].name + "\x1f" +
                                 p.nodes[i + 1].name});
    }
    return out;
}

inline std::optional<double> net_interconnect_value(const NetNode& net, bool prefer_length) {
    if (prefer_length && net.length_um) return net.length_um;
    if (!prefer_length) return net.length_um ? net.length_um : net.hpwl_um;
    return net.hpwl_um ? net.hpwl_um : net.length_um;
}

}  // namespace analysis_detail

// Matches entities between two snapshots of the same design instance.
// Paths key on (startpoint, endpoint, check type) with worst-slack
// dedup, arcs on the path key plus the driver/sink pin pair, nets on
// the net name. Entities present on one side only are excluded and
// counted.
inline MatchedSeries match_series(const StageSnapshot& a, const StageSnapshot& b,
                                  SeriesKind kind, SeriesMetric metric) {
    MatchedSeries out;
    out.kind = std::string(series_kind_name(kind));

    if (kind == SeriesKind::path) {
        auto pa = analysis_detail::dedup_paths(a);
        auto pb = analysis_detail::dedup_paths(b);
        for (const auto& [key, path_a] : pa) {
            auto it = pb.find(key);
            if (it == pb.end()) {
                ++out.excluded_count;
                continue;
            }
            double baseline = metric == SeriesMetric::path_arrival ? path_a->arrival_ns
                                                                   : path_a->slack_ns;
            double final_v = metric == SeriesMetric::path_arrival
                                 ? it->second->arrival_ns
                                 : it->second->slack_ns;
            out.pairs.push_back({key, baseline, final_v});
        }
        for (const auto& [key, pb_path] : pb)
            if (!pa.count(key)) ++out.excluded_count;
    } else if (kind == SeriesKind::cell_arc || kind == SeriesKind::net_arc) {
        TpgNodeKind node_kind = kind == SeriesKind::cell_arc ? TpgNodeKind::cell_arc
                                                             : TpgNodeKind::net_arc;
        if (kind == SeriesKind::net_arc && metric == SeriesMetric::arc_slew)
            throw ValidationError("net arcs carry delay, not slew, in this schema");
        auto pa = analysis_detail::dedup_paths(a);
        auto pb = analysis_detail::dedup_paths(b);
        std::map<std::string, const TpgNode*> arcs_a, arcs_b;
        for (const auto& [key, path] : pa)
            for (const auto& ref : analysis_detail::path_arcs(key, *path, node_kind))
                arcs_a[ref.key] = ref.node;
        for (const auto& [key, path] : pb)
            for (const auto& ref : analysis_detail::path_arcs(key, *path, node_kind))
                arcs_b[ref.key] = ref.node;
        for (const auto& [key, arc_a] : arcs_a) {
            auto it = arcs_b.find(key);
            if (it == arcs_b.end()) {
                ++out.excluded_count;
                continue;
            }
            double baseline = metric == SeriesMetric::arc_slew ? arc_a->slew_ns
                                                               : arc_a->delay_ns;
            double final_v = metric == SeriesMetric::arc_slew ? it->second->slew_ns
                                                              : it->second->delay_ns;
            out.pairs.push_back({key, baseline, final_v});
        }
        for (const auto& [key, arc] : arcs_b)
            if (!arcs_a.count(key)) ++out.excluded_count;
    } else if (kind == SeriesKind::net) {
        if (metric != SeriesMetric::interconnect)
            throw ValidationError("net series carry interconnect length");
        if (!window::routed.covers(b.stage))
            throw ValidationError("final-side net length needs detailed_route or final");
        for (const auto& net_a : a.netlist.nets) {
            if (net_a.is_special) continue;
            int idx = b.netlist.find_net(net_a.name);
            if (idx < 0) {
                ++out.excluded_count;
                continue;
            }
            const NetNode& net_b = b.netlist.nets[idx];
            // baseline: routed length when the stage carries it, HPWL before
            auto baseline = analysis_detail::net_interconnect_value(net_a, false);
            auto final_v = net_b.length_um;
            if (!baseline || !final_v) {
                ++out.excluded_count;  // unplaced or unrouted net
                continue;
            }
            out.pairs.push_back({net_a.name, *baseline, *final_v});
        }
        for (const auto& net_b : b.netlist.nets)
            if (!net_b.is_special && a.netlist.find_net(net_b.name) < 0)
                ++out.excluded_count;
    } else {
        throw ValidationError("design-level series are assembled by the report");
    }
    return out;
}

// HPWL at a pre-route stage against the routed length at detailed
// route; the spec'd baseline estimate for interconnect.
inline MatchedSeries hpwl_baseline(const StageSnapshot& pre_route,
                                   const StageSnapshot& routed) {
    if (pre_route.stage >= Stage::global_route)
        throw ValidationError("hpwl baseline takes a stage earlier than global_route");
    return match_series(pre_route, routed, SeriesKind::net, SeriesMetric::interconnect);
}

// ---------------------------------------------------------------------------
// Parameter correlation

struct ParameterInstance {
    std::string circuit;
    std::string pdk;
    DesignConstraint constraints;
    std::map<std::string, double> final_metrics;
};

struct CorrelationRow {
    std::string circuit;
    std::string pdk;
    std::string parameter;
    std::string metric;
    StatValue r;
};

inline std::vector<std::pair<std::string, double DesignConstraint::*>>
parameter_fields() {
    return {{"clock_period", &DesignConstraint::clock_period_ns},
            {"aspect_ratio", &DesignConstraint::aspect_ratio},
            {"utilization", &DesignConstraint::utilization},
            {"placement_density", &DesignConstraint::placement_density}};
}

// One Pearson r per (parameter, metric) per circuit, computed across
// that circuit's design instances.
inline std::vector<CorrelationRow> parameter_correlation(
    std::span<const ParameterInstance> instances) {
    std::map<std::pair<std::string, std::string>, std::vector<const ParameterInstance*>>
        by_circuit;
    for (const auto& inst : instances)
        by_circuit[{inst.circuit, inst.pdk}].push_back(&inst);

    std::vector<CorrelationRow> rows;
    for (const auto& [key, insts] : by_circuit) {
        if (insts.size() < 2) continue;
        std::set<std::string> metric_names;
        for (const auto* inst : insts)
            for (const auto& [name, v] : inst->final_metrics) metric_names.insert(name);
        for (const auto& [param_name, field] : parameter_fields()) {
            for (const auto& metric : metric_names) {
                std::vector<double> xs, ys;
                for (const auto* inst : insts) {
                    auto it = inst->final_metrics.find(metric);
                    if (it == inst->final_metrics.end()) continue;
                    xs.push_back(inst->constraints.*field);
                    ys.push_back(it->second);
                }
                if (xs.size() < 2) continue;
                rows.push_back({key.first, key.second, param_name, metric,
                                pearson(xs, ys)});
            }
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Baseline report

enum class BaselineMetric {
    total_area,
    total_power,
    total_wirelength,
    interconnect_length,
    worst_arrival,
    worst_slack,
    tns,
    path_arrival,
    path_slack,
    net_arc_delay,
    cell_arc_delay,
    cell_arc_slew,
};

inline const std::vector<std::pair<BaselineMetric, std::string>>& baseline_metric_names() {
    static const std::vector<std::pair<BaselineMetric, std::string>> names = {
        {BaselineMetric::total_area, "total_area"},
        {BaselineMetric::total_power, "total_power"},
        {BaselineMetric::total_wirelength, "total_wirelength"},
        {BaselineMetric::interconnect_length, "interconnect_length"},
        {BaselineMetric::worst_arrival, "worst_arrival_time"},
        {BaselineMetric::worst_slack, "worst_slack"},
        {BaselineMetric::tns, "total_negative_slack"},
        {BaselineMetric::path_arrival, "timing_path_arrival_time"},
        {BaselineMetric::path_slack, "timing_path_slack"},
        {BaselineMetric::net_arc_delay, "net_arc_delay"},
        {BaselineMetric::cell_arc_delay, "cell_arc_delay"},
        {BaselineMetric::cell_arc_slew, "cell_arc_slew"},
    };
    return names;
}

inline std::string_view baseline_metric_name(BaselineMetric m) {
    for (const auto& [metric, name] : baseline_metric_names())
        if (metric == m) return name;
    return "?";
}

inline std::optional<BaselineMetric> baseline_metric_from_name(std::string_view name) {
    for (const auto& [metric, metric_name] : baseline_metric_names())
        if (metric_name == name) return metric;
    return std::nullopt;
}

// Which statistics a metric row reports, after the published table:
// percentage and correlation statistics are withheld where they are
// unstable (slack-based and arc metrics), tails only for long-tailed
// per-entity metrics, sign rates only for slacks.
struct StatSet {
    bool mape = false, r2 = false, directional = false, rates = false, tails = false;
};

inline StatSet baseline_stat_set(BaselineMetric m) {
    switch (m) {
        case BaselineMetric::total_area:
        case BaselineMetric::total_power:
        case BaselineMetric::total_wirelength: return {true, true, false, false, false};
        case BaselineMetric::interconnect_length: return {true, true, false, false, true};
        case BaselineMetric::worst_arrival: return {true, false, false, false, false};
        case BaselineMetric::worst_slack: return {false, false, true, true, false};
        case BaselineMetric::tns: return {false, false, true, false, false};
        case BaselineMetric::path_arrival: return {true, false, false, false, true};
        case BaselineMetric::path_slack: return {false, false, true, true, false};
        case BaselineMetric::net_arc_delay:
        case BaselineMetric::cell_arc_delay:
        case BaselineMetric::cell_arc_slew: return {true, true, false, false, false};
    }
    return {};
}

struct BaselineInstance {
    std::string id;
    std::string design;
    std::string pdk;
    std::map<Stage, const StageSnapshot*> stages;
};

struct BaselineCell {
    BaselineMetric metric = BaselineMetric::total_area;
    Stage from = Stage::floorplan;
    Stage to = Stage::detailed_route;
    std::string pdk;
    bool available = true;  // wirelength rows are not available at floorplan
    std::string note;
    long long n = 0;
    long long excluded = 0;
    long long n_p = 0, n_n = 0;
    StatValue mae, mape, r2, mpe, mne, tpr, tnr;
    StatValue mae_p95, mape_p95, mae_top5, mape_top5;
};

enum class Averaging { pooled, macro };

struct BaselineReport {
    Averaging averaging = Averaging::pooled;
    // Table 7 reports "averaged" values without fixing the weights; this
    // header note surfaces the choice made for the run.
    std::string averaging_note;
    std::vector<BaselineCell> cells;
};

namespace analysis_detail {

inline std::optional<double> design_metric(const StageSnapshot& s, BaselineMetric m) {
    switch (m) {
        case BaselineMetric::total_area: return s.area_metrics.total_area;
        case BaselineMetric::total_power:
            if (s.power_metrics) return s.power_metrics->total_power_uw;
            return std::nullopt;
        case BaselineMetric::total_wirelength:
            if (s.stats.total_wirelength_um) return s.stats.total_wirelength_um;
            return s.stats.total_hpwl_um;  // pre-route estimate
        case BaselineMetric::worst_arrival:
            if (s.timing_metrics) return s.timing_metrics->worst_arrival_time_ns;
            return std::nullopt;
        case BaselineMetric::worst_slack:
            if (s.timing_metrics) return s.timing_metrics->worst_slack_ns;
            return std::nullopt;
        case BaselineMetric::tns:
            if (s.timing_metrics) return s.timing_metrics->total_negative_slack_ns;
            return std::nullopt;
        default: return std::nullopt;
    }
}

inline MatchedSeries instance_series(const BaselineInstance& inst, Stage from, Stage to,
                                     BaselineMetric metric) {
    const StageSnapshot& a = *inst.stages.at(from);
    const StageSnapshot& b = *inst.stages.at(to);
    switch (metric) {
        case BaselineMetric::interconnect_length:
            return match_series(a, b, SeriesKind::net, SeriesMetric::interconnect);
        case BaselineMetric::path_arrival:
            return match_series(a, b, SeriesKind::path, SeriesMetric::path_arrival);
        case BaselineMetric::path_slack:
            return match_series(a, b, SeriesKind::path, SeriesMetric::path_slack);
        case BaselineMetric::net_arc_delay:
            return match_series(a, b, SeriesKind::net_arc, SeriesMetric::arc_delay);
        case BaselineMetric::cell_arc_delay:
            return match_series(a, b, SeriesKind::cell_arc, SeriesMetric::arc_delay);
        case BaselineMetric::cell_arc_slew:
            return match_series(a, b, SeriesKind::cell_arc, SeriesMetric::arc_slew);
        default: {
            MatchedSeries out;
            out.kind = "design";
            auto baseline = design_metric(a, metric);
            auto final_v = design_metric(b, metric);
            if (baseline && final_v)
                out.pairs.push_back({inst.id, *baseline, *final_v});
            else
                ++out.excluded_count;
            return out;
        }
    }
}

inline void fill_cell(BaselineCell& cell, const MatchedSeries& series) {
    StatSet stats = baseline_stat_set(cell.metric);
    cell.n = static_cast<long long>(series.pairs.size());
    cell.excluded = series.excluded_count;
    if (series.pairs.empty()) {
        cell.mae = StatValue::undefined();
        return;
    }
    RegressionMetrics reg = regression_metrics(series);
    cell.mae = StatValue::of(reg.mae);
    if (stats.mape) cell.mape = reg.mape;
    if (stats.r2) cell.r2 = reg.r2;
    if (stats.directional) {
        DirectionalMetrics dir = directional_metrics(series);
        cell.mpe = dir.mpe;
        cell.mne = dir.mne;
        cell.n_p = dir.n_p;
        cell.n_n = dir.n_n;
    }
    if (stats.rates) {
        ClassificationMetrics cls = classification_metrics(series);
        cell.tpr = cls.tpr;
        cell.tnr = cls.tnr;
    }
    if (stats.tails) {
        TailMetrics tails = tail_metrics(series);
        cell.mae_p95 = tails.mae_p95;
        cell.mape_p95 = tails.mape_p95;
        cell.mae_top5 = tails.mae_top5;
        cell.mape_top5 = tails.mape_top5;
    }
}

inline StatValue average_stats(std::vector<StatValue> values) {
    long long n = 0;
    double sum = 0.0;
    bool overflow = false, floor = false;
    for (const auto& v : values) {
        if (v.state == StatValue::State::value) {
            sum += v.value;
            ++n;
        } else if (v.state == StatValue::State::mape_overflow) {
            overflow = true;
        } else if (v.state == StatValue::State::r2_floor) {
            floor = true;
        }
    }
    if (n) return StatValue::of(sum / double(n));
    if (overflow) return StatValue::overflow();
    if (floor) return StatValue::floor_r2();
    for (const auto& v : values)
        if (v.state == StatValue::State::undefined) return StatValue::undefined();
    return StatValue{};
}

}  // namespace analysis_detail

// Per (metric, stage pair, PDK) error statistics of using the earlier
// stage's tool estimate as the prediction of the final value. Pooled
// averaging concatenates every instance's matched pairs into one
// series; macro averaging computes per-design cells first and averages
// the statistics across designs.
inline BaselineReport baseline_report(std::span<const BaselineInstance> instances,
                                      std::span<const std::pair<Stage, Stage>> stage_pairs,
                                      std::span<const BaselineMetric> metrics,
                                      Averaging averaging = Averaging::pooled) {
    BaselineReport report;
    report.averaging = averaging;
    report.averaging_note =
        averaging == Averaging::pooled
            ? "pooled over all matched pairs; per-circuit weights not normalized"
            : "macro average over per-design statistics";

    std::set<std::string> pdks;
    for (const auto& inst : instances) pdks.insert(inst.pdk);

    for (const auto& pdk : pdks) {
        for (const auto& [from, to] : stage_pairs) {
            for (BaselineMetric metric : metrics) {
                BaselineCell cell;
                cell.metric = metric;
                cell.from = from;
                cell.to = to;
                cell.pdk = pdk;
                if ((metric == BaselineMetric::total_wirelength ||
                     metric == BaselineMetric::interconnect_length) &&
                    from == Stage::floorplan) {
                    cell.available = false;
                    cell.note = "estimated wirelength is not available before placement";
                    report.cells.push_back(std::move(cell));
                    continue;
                }

                if (averaging == Averaging::pooled) {
                    MatchedSeries pooled;
                    pooled.kind = "pooled";
                    for (const auto& inst : instances) {
                        if (inst.pdk != pdk) continue;
                        if (!inst.stages.count(from) || !inst.stages.count(to)) continue;
                        MatchedSeries part =
                            analysis_detail::instance_series(inst, from, to, metric);
                        for (auto& pair : part.pairs) {
                            pair.key = inst.id + "\x1f" + pair.key;
                            pooled.pairs.push_back(std::move(pair));
                        }
                        pooled.excluded_count += part.excluded_count;
                    }
                    // deterministic merge regardless of instance order
                    std::sort(pooled.pairs.begin(), pooled.pairs.end(),
                              [](const SeriesPair& a, const SeriesPair& b) {
                                  return a.key < b.key;
                              });
                    analysis_detail::fill_cell(cell, pooled);
                } else {
                    std::map<std::string, MatchedSeries> by_design;
                    for (const auto& inst : instances) {
                        if (inst.pdk != pdk) continue;
                        if (!inst.stages.count(from) || !inst.stages.count(to)) continue;
                        MatchedSeries part =
                            analysis_detail::instance_series(inst, from, to, metric);
                        MatchedSeries& agg = by_design[inst.design];
                        for (auto& pair : part.pairs) {
                            pair.key = inst.id + "\x1f" + pair.key;
                            agg.pairs.push_back(std::move(pair));
                        }
                        agg.excluded_count += part.excluded_count;
                    }
                    std::vector<BaselineCell> parts;
                    for (auto& [design, series] : by_design) {
                        std::sort(series.pairs.begin(), series.pairs.end(),
                                  [](const SeriesPair& a, const SeriesPair& b) {
                                      return a.key < b.key;
                                  });
                        BaselineCell part = cell;
                        analysis_detail::fill_cell(part, series);
                        cell.n += part.n;
                        cell.excluded += part.excluded;
                        cell.n_p += part.n_p;
                        cell.n_n += part.n_n;
                        parts.push_back(std::move(part));
                    }
                    auto collect = [&](StatValue BaselineCell::* field) {
                        std::vector<StatValue> vals;
                        for (const auto& p : parts) vals.push_back(p.*field);
                        return analysis_detail::average_stats(std::move(vals));
                    };
                    cell.mae = collect(&BaselineCell::mae);
                    cell.mape = collect(&BaselineCell::mape);
                    cell.r2 = collect(&BaselineCell::r2);
                    cell.mpe = collect(&BaselineCell::mpe);
                    cell.mne = collect(&BaselineCell::mne);
                    cell.tpr = collect(&BaselineCell::tpr);
                    cell.tnr = collect(&BaselineCell::tnr);
                    cell.mae_p95 = collect(&BaselineCell::mae_p95);
                    cell.mape_p95 = collect(&BaselineCell::mape_p95);
                    cell.mae_top5 = collect(&BaselineCell::mae_top5);
                    cell.mape_top5 = collect(&BaselineCell::mape_top5);
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }
    return report;
}

}  // namespace eda

#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "edaschema/errors.hpp"
#include "edaschema/text.hpp"

namespace eda {

enum class CheckType { setup, hold };

inline std::string_view check_type_name(CheckType t) {
    return t == CheckType::setup ? "setup" : "hold";
}

enum class PointKind { startpoint, cell_arc, net_arc };

struct PathPoint {
    std::string pin;
    PointKind kind = PointKind::startpoint;
    double delay_ns = 0.0;
    double arrival_ns = 0.0;
    double slew_ns = 0.0;
    std::optional<double> capacitance_ff;  // net arcs only
    std::string descriptor;                // cell name or net name
    bool rise = true;

    friend bool operator==(const PathPoint&, const PathPoint&) = default;
};

struct TimingPathRecord {
    std::string startpoint;
    std::string endpoint;
    std::string path_group;
    CheckType check_type = CheckType::setup;
    double arrival_ns = 0.0;
    double required_ns = 0.0;
    double slack_ns = 0.0;
    std::vector<PathPoint> points;
    bool is_warning = false;  // slack identity broken beyond 1e-6 ns
    std::string warning;

    friend bool operator==(const TimingPathRecord&, const TimingPathRecord&) = default;
};

struct StaReport {
    std::vector<TimingPathRecord> records;
    int skipped_lines = 0;
};

// Slack identity tolerance: |slack - (required - arrival)| for setup
// paths, |slack - (arrival - required)| for hold paths.
inline constexpr double kSlackIdentityTolNs = 1e-6;

inline double slack_identity_residual(const TimingPathRecord& rec) {
    double expected = rec.check_type == CheckType::setup
                          ? rec.required_ns - rec.arrival_ns
                          : rec.arrival_ns - rec.required_ns;
    return rec.slack_ns - expected;
}

namespace sta_detail {

inline bool is_number(std::string_view t) {
    if (t.empty()) return false;
    char c = t[0];
    return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
}

inline void finish_record(TimingPathRecord& rec, bool have_slack, int line_no) {
    if (!have_slack) throw ParseError("path block without a slack line", line_no);
    double residual = slack_identity_residual(rec);
    if (std::abs(residual) > kSlackIdentityTolNs) {
        rec.is_warning = true;
        std::ostringstream w;
        w << "slack " << rec.slack_ns << " is off the arrival/required identity by "
          << residual;
        rec.warning = w.str();
    }
}

}  // namespace sta_detail

// Reads path-style timing reports: Startpoint/Endpoint headers, a
// Path Type line (max -> setup, min -> hold), per-point delay/arrival
// lines, and the arrival/required/slack summary. In strict mode an
// unrecognized line shape is an error; otherwise it is skipped and
// counted.
inline StaReport parse_sta_report(std::string_view report_text, bool strict = false) {
    StaReport out;
    text::LineReader lr(report_text);
    std::string_view raw;

    std::optional<TimingPathRecord> rec;
    bool have_slack = false;
    bool have_arrival = false;
    bool have_required = false;
    bool in_points = false;

    auto flush = [&](int line_no) {
        if (rec) {
            sta_detail::finish_record(*rec, have_slack, line_no);
            out.records.push_back(std::move(*rec));
            rec.reset();
            have_slack = have_arrival = have_required = false;
        }
    };

    while (lr.next(raw)) {
        std::string_view line = text::trim(raw);
        if (line.empty()) continue;
        if (line.find_first_not_of('-') == std::string_view::npos) continue;

        if (text::starts_with(line, "Startpoint:")) {
            flush(lr.line_no());
            rec.emplace();
            auto toks = text::split_ws(line);
            if (toks.size() < 2) throw ParseError("malformed Startpoint", lr.line_no());
            rec->startpoint = std::string(toks[1]);
            in_points = false;
            continue;
        }
        if (!rec) {
            // preamble or trailer outside any path block
            ++out.skipped_lines;
            continue;
        }
        if (text::starts_with(line, "Endpoint:")) {
            auto toks = text::split_ws(line);
            if (toks.size() < 2) throw ParseError("malformed Endpoint", lr.line_no());
            rec->endpoint = std::string(toks[1]);
            continue;
        }
        if (text::starts_with(line, "Path Group:")) {
            auto toks = text::split_ws(line);
            rec->path_group = toks.size() > 2 ? std::string(toks[2]) : "";
            continue;
        }
        if (text::starts_with(line, "Path Type:")) {
            auto toks = text::split_ws(line);
            std::string_view ty = toks.size() > 2 ? toks[2] : "";
            if (ty == "max")
                rec->check_type = CheckType::setup;
            else if (ty == "min")
                rec->check_type = CheckType::hold;
            else
                throw ParseError("unknown path type '" + std::string(ty) + "'",
                                 lr.line_no());
            in_points = true;
            continue;
        }

        auto toks = text::split_ws(line);

        if (line.find("data arrival time") != std::string_view::npos) {
            // The summary block repeats this line negated; first wins.
            if (!have_arrival && toks.size() >= 4 && sta_detail::is_number(toks[0])) {
                rec->arrival_ns = text::to_double(toks[0], lr.line_no());
                have_arrival = true;
            }
            in_points = false;
            continue;
        }
        if (line.find("data required time") != std::string_view::npos) {
            if (!have_required && toks.size() >= 4 && sta_detail::is_number(toks[0])) {
                rec->required_ns = text::to_double(toks[0], lr.line_no());
                have_required = true;
            }
            continue;
        }
        if (line.find("slack (") != std::string_view::npos) {
            if (!sta_detail::is_number(toks[0]))
                throw ParseError("malformed slack line", lr.line_no());
            rec->slack_ns = text::to_double(toks[0], lr.line_no());
            have_slack = true;
            continue;
        }
        if (toks[0] == "Slew" || toks[0] == "Delay") continue;  // column header
        if (toks[0] == "clock" || toks[0] == "library" || toks[0] == "output" ||
            toks[0] == "input" || toks[0] == "time")
            continue;  // required-time breakdown lines

        // Point line: slew [cap] delay time ^|v pin (descriptor)
        size_t n_num = 0;
        while (n_num < toks.size() && sta_detail::is_number(toks[n_num])) ++n_num;
        bool shaped = in_points && (n_num == 3 || n_num == 4) && toks.size() >= n_num + 2 &&
                      (toks[n_num] == "^" || toks[n_num] == "v");
        if (!shaped) {
            if (strict)
                throw ParseError("unrecognized line shape: " + std::string(line),
                                 lr.line_no());
            ++out.skipped_lines;
            continue;
        }

        PathPoint pt;
        pt.slew_ns = text::to_double(toks[0], lr.line_no());
        size_t i = 1;
        if (n_num == 4) pt.capacitance_ff = text::to_double(toks[i++], lr.line_no());
        pt.delay_ns = text::to_double(toks[i++], lr.line_no());
        pt.arrival_ns = text::to_double(toks[i++], lr.line_no());
        pt.rise = (toks[i++] == "^");
        pt.pin = std::string(toks[i++]);
        std::string desc;
        for (; i < toks.size(); ++i) {
            if (!desc.empty()) desc += " ";
            desc += std::string(toks[i]);
        }
        if (desc.size() >= 2 && desc.front() == '(' && desc.back() == ')')
            desc = desc.substr(1, desc.size() - 2);
        if (rec->points.empty()) {
            pt.kind = PointKind::startpoint;
            pt.descriptor = desc;
        } else if (text::starts_with(desc, "net ")) {
            pt.kind = PointKind::net_arc;
            pt.descriptor = desc.substr(4);
        } else if (desc == "in" || desc == "out") {
            pt.kind = PointKind::net_arc;  // port reached over a net
            pt.descriptor = desc;
        } else {
            pt.kind = PointKind::cell_arc;
            pt.descriptor = desc;
        }
        rec->points.push_back(std::move(pt));
    }
    flush(lr.line_no());
    return out;
}

// Canonical serialization of the dialect parse_sta_report reads.
inline std::string write_sta_report(const StaReport& report) {
    std::ostringstream os;
    auto num = [](double v) { return text::fmt_double(v); };
    for (const auto& rec : report.records) {
        os << "Startpoint: " << rec.startpoint << "\n";
        os << "Endpoint: " << rec.endpoint << "\n";
        os << "Path Group: " << (rec.path_group.empty() ? "default" : rec.path_group)
           << "\n";
        os << "Path Type: " << (rec.check_type == CheckType::setup ? "max" : "min")
           << "\n\n";
        os << "   Slew    Cap   Delay    Time   Description\n";
        os << "---------------------------------------------------------------\n";
        for (const auto& pt : rec.points) {
            os << "   " << num(pt.slew_ns);
            if (pt.capacitance_ff) os << "   " << num(*pt.capacitance_ff);
            os << "   " << num(pt.delay_ns) << "   " << num(pt.arrival_ns) << " "
               << (pt.rise ? "^" : "v") << " " << pt.pin << " (";
            if (pt.kind == PointKind::net_arc && pt.descriptor != "in" &&
                pt.descriptor != "out")
                os << "net " << pt.descriptor;
            else
                os << pt.descriptor;
            os << ")\n";
        }
        os << "   " << num(rec.arrival_ns) << "   data arrival time\n\n";
        os << "   " << num(rec.required_ns) << "   data required time\n";
        os << "---------------------------------------------------------------\n";
        os << "   " << num(rec.slack_ns) << "   slack ("
           << (rec.slack_ns < 0 ? "VIOLATED" : "MET") << ")\n\n\n";
    }
    return os.str();
}

}  // namespace eda

#pragma once

#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "edaschema/analysis.hpp"

namespace eda {

// Fixed rendering: percentages with 2 decimals, nanosecond-scale values
// with 4, everything else with 6 significant digits. Sentinels print as
// the literal strings the published tables use.
namespace report_io {

inline std::string fixed(double v, int decimals) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(decimals) << v;
    return os.str();
}

inline std::string render(const StatValue& v, bool percent, int decimals) {
    switch (v.state) {
        case StatValue::State::value:
            return fixed(v.value, decimals) + (percent ? "%" : "");
        case StatValue::State::mape_overflow: return ">10000%";
        case StatValue::State::r2_floor: return "<-1";
        case StatValue::State::undefined: return "n/a";
        case StatValue::State::absent: return "";
    }
    return "";
}

inline nlohmann::json to_json(const StatValue& v) {
    switch (v.state) {
        case StatValue::State::value: return v.value;
        case StatValue::State::mape_overflow:
            return nlohmann::json{{"sentinel", ">10000%"}};
        case StatValue::State::r2_floor: return nlohmann::json{{"sentinel", "<-1"}};
        case StatValue::State::undefined: return nlohmann::json{{"sentinel", "undefined"}};
        case StatValue::State::absent: return nullptr;
    }
    return nullptr;
}

inline std::string baseline_csv(const BaselineReport& report) {
    std::ostringstream os;
    os << "# averaging: " << report.averaging_note << "\n";
    os << "metric,from_stage,to_stage,pdk,n,excluded,n_p,n_n,MAE,MAPE,R2,MPE,MNE,TPR,"
          "TNR,MAE_P95,MAPE_P95,MAE_TOP5,MAPE_TOP5,note\n";
    for (const auto& cell : report.cells) {
        os << baseline_metric_name(cell.metric) << "," << stage_name(cell.from) << ","
           << stage_name(cell.to) << "," << cell.pdk << ",";
        if (!cell.available) {
            os << ",,,,,,,,,,,,,," << cell.note << "\n";
            continue;
        }
        os << cell.n << "," << cell.excluded << "," << cell.n_p << "," << cell.n_n << ",";
        os << render(cell.mae, false, 4) << "," << render(cell.mape, true, 2) << ","
           << render(cell.r2, false, 3) << "," << render(cell.mpe, false, 4) << ","
           << render(cell.mne, false, 4) << "," << render(cell.tpr, true, 2) << ","
           << render(cell.tnr, true, 2) << "," << render(cell.mae_p95, false, 4) << ","
           << render(cell.mape_p95, true, 2) << "," << render(cell.mae_top5, false, 4)
           << "," << render(cell.mape_top5, true, 2) << "," << cell.note << "\n";
    }
    return os.str();
}

inline nlohmann::json baseline_json(const BaselineReport& report) {
    nlohmann::json j;
    j["averaging"] = report.averaging == Averaging::pooled ? "pooled" : "macro";
    j["averaging_note"] = report.averaging_note;
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cell : report.cells) {
        nlohmann::json c;
        c["metric"] = std::string(baseline_metric_name(cell.metric));
        c["from_stage"] = std::string(stage_name(cell.from));
        c["to_stage"] = std::string(stage_name(cell.to));
        c["pdk"] = cell.pdk;
        c["available"] = cell.available;
        if (!cell.available) {
            c["note"] = cell.note;
            cells.push_back(std::move(c));
            continue;
        }
        c["n"] = cell.n;
        c["excluded"] = cell.excluded;
        c["n_p"] = cell.n_p;
        c["n_n"] = cell.n_n;
        c["MAE"] = to_json(cell.mae);
        c["MAPE"] = to_json(cell.mape);
        c["R2"] = to_json(cell.r2);
        c["MPE"] = to_json(cell.mpe);
        c["MNE"] = to_json(cell.mne);
        c["TPR"] = to_json(cell.tpr);
        c["TNR"] = to_json(cell.tnr);
        c["MAE_P95"] = to_json(cell.mae_p95);
        c["MAPE_P95"] = to_json(cell.mape_p95);
        c["MAE_TOP5"] = to_json(cell.mae_top5);
        c["MAPE_TOP5"] = to_json(cell.mape_top5);
        cells.push_back(std::move(c));
    }
    j["cells"] = std::move(cells);
    return j;
}

inline std::string correlation_csv(const std::vector<CorrelationRow>& rows) {
    std::ostringstream os;
    os << "circuit,pdk,parameter,metric,r\n";
    for (const auto& row : rows)
        os << row.circuit << "," << row.pdk << "," << row.parameter << "," << row.metric
           << "," << render(row.r, false, 6) << "\n";
    return os.str();
}

}  // namespace report_io

}  // namespace eda

#pragma once

#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "edaschema/errors.hpp"
#include "edaschema/text.hpp"

namespace eda {

struct NetParasitics {
    double total_resistance = 0.0;            // ohm
    double total_capacitance = 0.0;           // fF, ground caps
    double total_coupling_capacitance = 0.0;  // fF, coupling caps

    friend bool operator==(const NetParasitics&, const NetParasitics&) = default;
};

struct ParasiticSet {
    std::map<std::string, NetParasitics> nets;
    int skipped_statements = 0;

    const NetParasitics* find(const std::string& net) const {
        auto it = nets.find(net);
        return it == nets.end() ? nullptr : &it->second;
    }
};

namespace detail {

inline std::string strip_escapes(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        if (c != '\\') out += c;
    return out;
}

}  // namespace detail

// Reads *D_NET sections with *CAP and *RES blocks; *NAME_MAP indices
// are resolved to names during parsing. Totals carry the header units
// normalized to ohm and fF.
inline ParasiticSet parse_spef(std::string_view spef_text) {
    ParasiticSet ps;
    std::map<std::string, std::string> name_map;
    double r_unit = -1.0;  // -> ohm
    double c_unit = -1.0;  // -> fF
    char delimiter = ':';

    auto resolve = [&](std::string_view tok) -> std::string {
        std::string t = detail::strip_escapes(tok);
        if (!t.empty() && t[0] == '*') {
            // strip the pin suffix of internal nodes (*12:3)
            std::string idx = t.substr(1);
            size_t colon = idx.find(delimiter);
            std::string pin;
            if (colon != std::string::npos) {
                pin = idx.substr(colon);
                idx = idx.substr(0, colon);
            }
            auto it = name_map.find(idx);
            if (it != name_map.end()) return it->second + pin;
            return t;
        }
        return t;
    };

    text::LineReader lr(spef_text);
    std::string_view raw;
    enum class Section { none, name_map, d_net_conn, d_net_cap, d_net_res };
    Section section = Section::none;
    NetParasitics* current = nullptr;
    std::string current_name;

    while (lr.next(raw)) {
        std::string_view line = text::trim(raw);
        if (line.empty() || text::starts_with(line, "//")) continue;
        auto toks = text::split_ws(line);
        std::string_view head = toks[0];

        if (head == "*R_UNIT" || head == "*C_UNIT") {
            if (toks.size() < 3) throw ParseError("malformed unit line", lr.line_no());
            double mult = text::to_double(toks[1], lr.line_no());
            std::string unit(toks[2]);
            for (auto& ch : unit) ch = static_cast<char>(std::toupper(ch));
            if (head == "*R_UNIT") {
                double scale = 1.0;
                if (unit == "OHM")
                    scale = 1.0;
                else if (unit == "KOHM")
                    scale = 1e3;
                else
                    throw ParseError("unsupported resistance unit " + unit, lr.line_no());
                r_unit = mult * scale;
            } else {
                double scale = 1.0;
                if (unit == "FF")
                    scale = 1.0;
                else if (unit == "PF")
                    scale = 1e3;
                else if (unit == "NF")
                    scale = 1e6;
                else
                    throw ParseError("unsupported capacitance unit " + unit, lr.line_no());
                c_unit = mult * scale;
            }
        } else if (head == "*DELIMITER") {
            if (toks.size() > 1 && !toks[1].empty()) delimiter = toks[1][0];
        } else if (head == "*NAME_MAP") {
            section = Section::name_map;
        } else if (head == "*D_NET") {
            if (toks.size() < 2) throw ParseError("malformed *D_NET", lr.line_no());
            if (r_unit < 0 || c_unit < 0)
                throw ParseError("*D_NET before *R_UNIT/*C_UNIT header", lr.line_no());
            current_name = resolve(toks[1]);
            if (ps.nets.count(current_name))
                throw ParseError("duplicate net section " + current_name, lr.line_no());
            current = &ps.nets[current_name];
            section = Section::none;
        } else if (head == "*CONN") {
            section = Section::d_net_conn;
        } else if (head == "*CAP") {
            section = Section::d_net_cap;
        } else if (head == "*RES") {
            section = Section::d_net_res;
        } else if (head == "*END") {
            current = nullptr;
            section = Section::none;
        } else if (section == Section::name_map && head.size() > 1 && head[0] == '*') {
            if (toks.size() >= 2)
                name_map[std::string(head.substr(1))] =
                    detail::strip_escapes(toks[1]);
        } else if (section == Section::d_net_cap && current) {
            // id node [node2] value
            if (toks.size() == 3) {
                double v = text::to_double(toks[2], lr.line_no());
                if (v < 0) throw ParseError("negative capacitance", lr.line_no());
                current->total_capacitance += v * c_unit;
            } else if (toks.size() == 4) {
                double v = text::to_double(toks[3], lr.line_no());
                if (v < 0) throw ParseError("negative capacitance", lr.line_no());
                current->total_coupling_capacitance += v * c_unit;
            } else {
                throw ParseError("malformed *CAP element", lr.line_no());
            }
        } else if (section == Section::d_net_res && current) {
            // id node node value
            if (toks.size() != 4) throw ParseError("malformed *RES element", lr.line_no());
            double v = text::to_double(toks[3], lr.line_no());
            if (v < 0) throw ParseError("negative resistance", lr.line_no());
            current->total_resistance += v * r_unit;
        } else if (section == Section::d_net_conn && current) {
            // connectivity is carried by DEF; accepted and ignored
        } else if (head[0] == '*') {
            ++ps.skipped_statements;  // header line outside the subset
        } else {
            ++ps.skipped_statements;
        }
    }
    if (r_unit < 0 || c_unit < 0)
        throw ParseError("SPEF header is missing *R_UNIT or *C_UNIT");
    return ps;
}

// Canonical one-lump-per-net serialization of the totals.
inline std::string write_spef(const ParasiticSet& ps, const std::string& design = "out") {
    std::ostringstream os;
    os << "*SPEF \"IEEE 1481-1998\"\n";
    os << "*DESIGN \"" << design << "\"\n";
    os << "*DIVIDER /\n*DELIMITER :\n*BUS_DELIMITER [ ]\n";
    os << "*T_UNIT 1 NS\n*C_UNIT 1 FF\n*R_UNIT 1 OHM\n*L_UNIT 1 HENRY\n\n";
    for (const auto& [name, rc] : ps.nets) {
        os << "*D_NET " << name << " "
           << text::fmt_double(rc.total_capacitance + rc.total_coupling_capacitance)
           << "\n";
        os << "*CAP\n";
        int id = 1;
        if (rc.total_capacitance > 0)
            os << id++ << " " << name << ":1 " << text::fmt_double(rc.total_capacitance)
               << "\n";
        if (rc.total_coupling_capacitance > 0)
            os << id++ << " " << name << ":1 " << name << ":2 "
               << text::fmt_double(rc.total_coupling_capacitance) << "\n";
        os << "*RES\n";
        if (rc.total_resistance > 0)
            os << "1 " << name << ":1 " << name << ":2 "
               << text::fmt_double(rc.total_resistance) << "\n";
        os << "*END\n\n";
    }
    return os.str();
}

}  // namespace eda

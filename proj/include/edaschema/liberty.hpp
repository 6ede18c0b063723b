#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edaschema/errors.hpp"
#include "edaschema/lef.hpp"
#include "edaschema/text.hpp"

namespace eda {

struct CatalogPin {
    std::string name;
    PinDirection direction = PinDirection::unknown;
    double capacitance_ff = 0.0;
    std::string function;
    bool is_clock = false;

    friend bool operator==(const CatalogPin&, const CatalogPin&) = default;
};

struct CatalogCell {
    std::string name;
    std::string function;  // of the first output pin carrying one
    double area_um2 = 0.0;
    // Liberty carries only the area; LEF refines the aspect through
    // enrich_with_lef. Until then width = area, height = 1.
    double width_um = 0.0;
    double height_um = 1.0;
    double drive_strength = 0.0;
    double input_capacitance_min_ff = 0.0, input_capacitance_max_ff = 0.0;
    double output_capacitance_min_ff = 0.0, output_capacitance_max_ff = 0.0;
    double leakage_power_min_uw = 0.0, leakage_power_max_uw = 0.0;
    bool is_sequential = false;
    bool is_inverter = false;
    bool is_buffer = false;
    bool is_filler = false;
    bool is_diode = false;
    bool is_tap = false;
    bool is_macro = false;
    std::vector<CatalogPin> pins;

    friend bool operator==(const CatalogCell&, const CatalogCell&) = default;
};

struct CellCatalog {
    std::map<std::string, CatalogCell> cells;
    int skipped_statements = 0;

    const CatalogCell& at(const std::string& name) const {
        auto it = cells.find(name);
        if (it == cells.end()) throw ValidationError("unknown cell name " + name);
        return it->second;
    }
    const CatalogCell* find(const std::string& name) const {
        auto it = cells.find(name);
        return it == cells.end() ? nullptr : &it->second;
    }
};

namespace liberty_detail {

struct Group {
    std::string name;
    std::vector<std::string> args;
    std::multimap<std::string, std::string> attrs;
    std::vector<Group> groups;

    const std::string* attr(const std::string& key) const {
        auto it = attrs.find(key);
        return it == attrs.end() ? nullptr : &it->second;
    }
    bool has_group(const std::string& name_) const {
        for (const auto& g : groups)
            if (g.name == name_) return true;
        return false;
    }
};

class Lexer {
  public:
    explicit Lexer(std::string_view s) : s_(s) {}

    bool next(std::string& tok) {
        skip_ws();
        if (pos_ >= s_.size()) return false;
        char c = s_[pos_];
        if (std::string_view("{};:(),").find(c) != std::string_view::npos) {
            tok.assign(1, c);
            ++pos_;
            return true;
        }
        if (c == '"') {
            ++pos_;
            size_t b = pos_;
            while (pos_ < s_.size() && s_[pos_] != '"') {
                if (s_[pos_] == '\n') ++line_;
                ++pos_;
            }
            if (pos_ >= s_.size()) throw ParseError("unterminated string", line_);
            tok.assign(s_.substr(b, pos_ - b));
            ++pos_;
            return true;
        }
        size_t b = pos_;
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
               std::string_view("{};:(),\"").find(s_[pos_]) == std::string_view::npos)
            ++pos_;
        tok.assign(s_.substr(b, pos_ - b));
        return true;
    }

    int line() const { return line_; }

  private:
    void skip_ws() {
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '\\' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '\n') {
                ++line_;
                pos_ += 2;  // line continuation
            } else if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '*') {
                pos_ += 2;
                while (pos_ + 1 < s_.size() && !(s_[pos_] == '*' && s_[pos_ + 1] == '/')) {
                    if (s_[pos_] == '\n') ++line_;
                    ++pos_;
                }
                pos_ = std::min(pos_ + 2, s_.size());
            } else if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/') {
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view s_;
    size_t pos_ = 0;
    int line_ = 1;
};

// Parses a group body after its '{' up to the matching '}'.
inline void parse_body(Lexer& lx, Group& g, int depth) {
    if (depth > 64) throw ParseError("group nesting too deep", lx.line());
    std::string tok;
    while (true) {
        if (!lx.next(tok))
            throw ParseError("unbalanced braces in group " + g.name, lx.line());
        if (tok == "}") return;
        if (tok == ";") continue;  // stray separator
        std::string key = std::move(tok);
        if (!lx.next(tok))
            throw ParseError("unexpected end inside group " + g.name, lx.line());
        if (tok == ":") {
            std::string value;
            while (lx.next(tok) && tok != ";") {
                if (tok == "}")
                    throw ParseError("attribute " + key + " is missing ';'", lx.line());
                if (!value.empty()) value += " ";
                value += tok;
            }
            g.attrs.emplace(std::move(key), std::move(value));
        } else if (tok == "(") {
            std::vector<std::string> args;
            while (lx.next(tok) && tok != ")") {
                if (tok != ",") args.push_back(tok);
            }
            if (!lx.next(tok))
                throw ParseError("unexpected end after '" + key + "(...)'", lx.line());
            if (tok == "{") {
                Group sub;
                sub.name = std::move(key);
                sub.args = std::move(args);
                parse_body(lx, sub, depth + 1);
                g.groups.push_back(std::move(sub));
            } else if (tok == ";") {
                std::string joined;
                for (const auto& a : args) {
                    if (!joined.empty()) joined += ",";
                    joined += a;
                }
                g.attrs.emplace(std::move(key), std::move(joined));
            } else {
                throw ParseError("expected '{' or ';' after '" + key + "(...)'",
                                 lx.line());
            }
        } else {
            throw ParseError("malformed statement '" + key + "' in group " + g.name,
                             lx.line());
        }
    }
}

inline double attr_double(const Group& g, const std::string& key, double fallback) {
    const std::string* v = g.attr(key);
    if (!v) return fallback;
    return text::to_double(text::trim(*v));
}

inline bool attr_true(const Group& g, const std::string& key) {
    const std::string* v = g.attr(key);
    return v && (*v == "true" || *v == "TRUE" || *v == "1");
}

// "!A", "(!A)", "A'" all negate A; used for inverter/buffer detection.
inline std::string normalize_function(std::string_view f) {
    std::string out;
    for (char c : f)
        if (!std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')') out += c;
    return out;
}

}  // namespace liberty_detail

// Parses the cell/pin subset of Liberty. Flags derive from the ff/latch
// groups, the output function shape, and the cell-kind attributes
// (is_filler_cell, is_tap_cell, is_macro_cell, is_diode_cell).
inline CellCatalog parse_liberty(std::string_view lib_text) {
    liberty_detail::Lexer lx(lib_text);
    std::string tok;
    if (!lx.next(tok)) throw ParseError("empty liberty source");
    if (tok != "library") throw ParseError("expected 'library' group", lx.line());
    liberty_detail::Group root;
    root.name = "library";
    if (!lx.next(tok)) throw ParseError("unexpected end after 'library'", lx.line());
    if (tok == "(") {
        while (lx.next(tok) && tok != ")") {
            if (tok != ",") root.args.push_back(tok);
        }
        if (!lx.next(tok)) throw ParseError("unexpected end", lx.line());
    }
    if (tok != "{") throw ParseError("expected '{' after library header", lx.line());
    liberty_detail::parse_body(lx, root, 0);

    // Library units: capacitances normalize to fF, leakage to uW.
    double cap_to_ff = 1000.0;  // liberty default unit is pF
    if (const std::string* clu = root.attr("capacitive_load_unit")) {
        auto parts = text::split_ws(*clu);
        std::string unit;
        double mult = 1.0;
        if (parts.size() >= 2) {
            mult = text::to_double(parts[0]);
            unit = std::string(parts[1]);
        } else if (parts.size() == 1) {
            // joined complex form "1,ff"
            auto comma = parts[0].find(',');
            mult = text::to_double(parts[0].substr(0, comma));
            unit = std::string(parts[0].substr(comma + 1));
        }
        for (auto& c : unit) c = static_cast<char>(std::tolower(c));
        if (unit == "ff")
            cap_to_ff = mult;
        else if (unit == "pf")
            cap_to_ff = mult * 1000.0;
        else
            throw ParseError("unsupported capacitive_load_unit " + unit);
    }
    double leak_to_uw = 1e-3;  // default 1nW
    if (const std::string* lpu = root.attr("leakage_power_unit")) {
        std::string u = *lpu;
        for (auto& c : u) c = static_cast<char>(std::tolower(c));
        if (u == "1pw")
            leak_to_uw = 1e-6;
        else if (u == "1nw")
            leak_to_uw = 1e-3;
        else if (u == "1uw")
            leak_to_uw = 1.0;
        else if (u == "1mw")
            leak_to_uw = 1e3;
        else
            throw ParseError("unsupported leakage_power_unit " + u);
    }

    CellCatalog catalog;
    for (const auto& g : root.groups) {
        if (g.name != "cell") {
            ++catalog.skipped_statements;
            continue;
        }
        if (g.args.empty()) throw ParseError("cell group without a name");
        CatalogCell cell;
        cell.name = g.args[0];
        if (!g.attr("area"))
            throw ParseError("cell " + cell.name + " is missing the area attribute");
        cell.area_um2 = liberty_detail::attr_double(g, "area", 0.0);
        cell.width_um = cell.area_um2;
        cell.height_um = 1.0;
        cell.drive_strength = liberty_detail::attr_double(g, "drive_strength", 0.0);
        cell.is_sequential = g.has_group("ff") || g.has_group("latch");
        cell.is_filler = liberty_detail::attr_true(g, "is_filler_cell");
        cell.is_tap = liberty_detail::attr_true(g, "is_tap_cell");
        cell.is_macro = liberty_detail::attr_true(g, "is_macro_cell");
        cell.is_diode = liberty_detail::attr_true(g, "is_diode_cell") ||
                        g.attr("antenna_diode_type") != nullptr;

        double leak = liberty_detail::attr_double(g, "cell_leakage_power", -1.0);
        double leak_min = -1.0, leak_max = -1.0;
        for (const auto& sub : g.groups) {
            if (sub.name != "leakage_power") continue;
            double v = liberty_detail::attr_double(sub, "value", -1.0);
            if (v < 0) continue;
            leak_min = (leak_min < 0) ? v : std::min(leak_min, v);
            leak_max = (leak_max < 0) ? v : std::max(leak_max, v);
        }
        if (leak_min < 0 && leak >= 0) leak_min = leak_max = leak;
        if (leak_min >= 0) {
            cell.leakage_power_min_uw = leak_min * leak_to_uw;
            cell.leakage_power_max_uw = leak_max * leak_to_uw;
        }

        int n_in = 0, n_out = 0;
        std::string in_name;
        double in_min = -1, in_max = -1, out_min = -1, out_max = -1;
        for (const auto& sub : g.groups) {
            if (sub.name != "pin") continue;
            CatalogPin pin;
            pin.name = sub.args.empty() ? "" : sub.args[0];
            const std::string* dir = sub.attr("direction");
            if (dir) {
                if (*dir == "input")
                    pin.direction = PinDirection::input;
                else if (*dir == "output")
                    pin.direction = PinDirection::output;
                else
                    pin.direction = PinDirection::inout;
            }
            pin.capacitance_ff =
                liberty_detail::attr_double(sub, "capacitance", 0.0) * cap_to_ff;
            pin.is_clock = liberty_detail::attr_true(sub, "clock");
            if (const std::string* f = sub.attr("function")) pin.function = *f;
            if (pin.direction == PinDirection::input) {
                ++n_in;
                in_name = pin.name;
                in_min = (in_min < 0) ? pin.capacitance_ff
                                      : std::min(in_min, pin.capacitance_ff);
                in_max = std::max(in_max, pin.capacitance_ff);
            } else if (pin.direction == PinDirection::output) {
                ++n_out;
                if (cell.function.empty()) cell.function = pin.function;
                out_min = (out_min < 0) ? pin.capacitance_ff
                                        : std::min(out_min, pin.capacitance_ff);
                out_max = std::max(out_max, pin.capacitance_ff);
            }
            cell.pins.push_back(std::move(pin));
        }
        if (in_min >= 0) {
            cell.input_capacitance_min_ff = in_min;
            cell.input_capacitance_max_ff = in_max;
        }
        if (out_min >= 0) {
            cell.output_capacitance_min_ff = out_min;
            cell.output_capacitance_max_ff = out_max;
        }

        if (!cell.is_sequential && n_in == 1 && n_out == 1 && !cell.function.empty()) {
            std::string f = liberty_detail::normalize_function(cell.function);
            if (f == "!" + in_name || f == in_name + "'")
                cell.is_inverter = true;
            else if (f == in_name)
                cell.is_buffer = true;
        }
        if (!cell.is_filler && cell.pins.empty() && !cell.is_tap && !cell.is_diode &&
            !cell.is_macro)
            cell.is_filler = true;  // pinless core cells are fillers

        catalog.cells[cell.name] = std::move(cell);
    }
    return catalog;
}

// Copies macro geometry onto catalog entries so area metrics use real
// width by height. Cells without a LEF macro keep width = area.
inline void enrich_with_lef(CellCatalog& catalog, const TechLibrary& tech) {
    for (auto& [name, cell] : catalog.cells) {
        auto it = tech.macros.find(name);
        if (it == tech.macros.end()) continue;
        cell.width_um = it->second.width_um;
        cell.height_um = it->second.height_um;
    }
}

}  // namespace eda

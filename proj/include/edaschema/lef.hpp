#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "edaschema/errors.hpp"
#include "edaschema/geometry.hpp"
#include "edaschema/text.hpp"

namespace eda {

enum class LayerKind { routing, cut, other };
enum class LayerDirection { none, horizontal, vertical };
enum class PinDirection { unknown, input, output, inout };

inline std::string_view pin_direction_name(PinDirection d) {
    switch (d) {
        case PinDirection::input: return "INPUT";
        case PinDirection::output: return "OUTPUT";
        case PinDirection::inout: return "INOUT";
        default: return "UNKNOWN";
    }
}

struct LefLayer {
    std::string name;
    LayerKind kind = LayerKind::other;
    LayerDirection direction = LayerDirection::none;
    Dbu min_width = 0;  // DBU; > 0 for routing layers

    friend bool operator==(const LefLayer&, const LefLayer&) = default;
};

struct MacroPin {
    std::string name;
    PinDirection direction = PinDirection::unknown;
    // Rectangles relative to the macro origin, DBU, with owning layer.
    std::vector<std::pair<std::string, RectDbu>> rects;

    friend bool operator==(const MacroPin&, const MacroPin&) = default;
};

struct Macro {
    std::string name;
    std::string macro_class;  // CLASS token(s), e.g. "CORE" or "BLOCK"
    double width_um = 0.0;
    double height_um = 0.0;
    std::vector<MacroPin> pins;

    const MacroPin* find_pin(std::string_view pin) const {
        for (const auto& p : pins)
            if (p.name == pin) return &p;
        return nullptr;
    }

    friend bool operator==(const Macro&, const Macro&) = default;
};

struct TechLibrary {
    int dbu_per_micron = 0;
    std::vector<LefLayer> layers;  // declaration order, metal1 first
    std::map<std::string, Macro> macros;
    int skipped_statements = 0;

    // Minimum width of the first routing layer; the pixel unit of all
    // spatial maps.
    Dbu w_m1() const {
        for (const auto& l : layers)
            if (l.kind == LayerKind::routing) return l.min_width;
        throw ValidationError("technology has no routing layer");
    }

    std::vector<const LefLayer*> routing_layers() const {
        std::vector<const LefLayer*> out;
        for (const auto& l : layers)
            if (l.kind == LayerKind::routing) out.push_back(&l);
        return out;
    }

    const LefLayer* find_layer(std::string_view name) const {
        for (const auto& l : layers)
            if (l.name == name) return &l;
        return nullptr;
    }
};

namespace detail {

inline Dbu um_to_dbu(double um, int dbu_per_micron, int line) {
    double scaled = um * dbu_per_micron;
    double rounded = std::llround(scaled);
    if (std::abs(scaled - rounded) > 1e-6 * std::max(1.0, std::abs(scaled)) + 1e-6)
        throw ParseError("coordinate off the database-unit grid", line);
    return static_cast<Dbu>(rounded);
}

// Skips tokens until `end_tok` [identifier] is consumed.
inline void skip_until_end(text::TokenStream& ts, const std::string& group_name) {
    std::string tok;
    while (ts.next(tok)) {
        if (tok == "END") {
            std::string name = ts.expect("group name after END");
            if (name == group_name) return;
        }
    }
    throw ParseError("unterminated group " + group_name, ts.line());
}

}  // namespace detail

// Parses the LAYER/MACRO/PIN/UNITS subset of LEF 5.x. Unknown
// statements are skipped and counted, never fatal.
inline TechLibrary parse_lef(std::string_view lef_text) {
    text::TokenStream ts(lef_text);
    TechLibrary lib;
    std::string tok;

    auto require_units = [&](int line) {
        if (lib.dbu_per_micron <= 0)
            throw ParseError("UNITS DATABASE MICRONS must precede geometry", line);
    };

    while (ts.next(tok)) {
        if (tok == "UNITS") {
            std::string t = ts.expect("UNITS body");
            while (t != "END") {
                if (t == "DATABASE") {
                    ts.expect_literal("MICRONS");
                    lib.dbu_per_micron =
                        static_cast<int>(text::to_int(ts.expect("dbu count"), ts.line()));
                    if (lib.dbu_per_micron <= 0)
                        throw ParseError("non-positive database units", ts.line());
                    ts.expect_literal(";");
                } else {
                    ++lib.skipped_statements;
                    while (t != ";") t = ts.expect("';'");
                }
                t = ts.expect("UNITS body");
            }
            ts.expect_literal("UNITS");
        } else if (tok == "LAYER") {
            require_units(ts.line());
            LefLayer layer;
            layer.name = ts.expect("layer name");
            std::string t = ts.expect("layer body");
            while (t != "END") {
                if (t == "TYPE") {
                    std::string ty = ts.expect("layer type");
                    if (ty == "ROUTING")
                        layer.kind = LayerKind::routing;
                    else if (ty == "CUT")
                        layer.kind = LayerKind::cut;
                    else
                        layer.kind = LayerKind::other;
                    ts.expect_literal(";");
                } else if (t == "DIRECTION") {
                    std::string d = ts.expect("direction");
                    layer.direction = (d == "HORIZONTAL") ? LayerDirection::horizontal
                                                          : LayerDirection::vertical;
                    ts.expect_literal(";");
                } else if (t == "WIDTH") {
                    double um = text::to_double(ts.expect("width"), ts.line());
                    layer.min_width = detail::um_to_dbu(um, lib.dbu_per_micron, ts.line());
                    ts.expect_literal(";");
                } else {
                    ++lib.skipped_statements;
                    while (t != ";") t = ts.expect("';'");
                }
                t = ts.expect("layer body");
            }
            std::string name = ts.expect("layer name after END");
            if (name != layer.name)
                throw ParseError("END " + name + " does not close LAYER " + layer.name,
                                 ts.line());
            if (layer.kind == LayerKind::routing && layer.min_width <= 0)
                throw ParseError("routing layer " + layer.name + " has zero width",
                                 ts.line());
            for (const auto& l : lib.layers)
                if (l.name == layer.name)
                    throw ParseError("duplicate layer " + layer.name, ts.line());
            lib.layers.push_back(std::move(layer));
        } else if (tok == "MACRO") {
            require_units(ts.line());
            Macro macro;
            macro.name = ts.expect("macro name");
            std::string t = ts.expect("macro body");
            while (t != "END") {
                if (t == "CLASS") {
                    std::string part = ts.expect("class");
                    while (part != ";") {
                        if (!macro.macro_class.empty()) macro.macro_class += " ";
                        macro.macro_class += part;
                        part = ts.expect("class token or ';'");
                    }
                } else if (t == "SIZE") {
                    macro.width_um = text::to_double(ts.expect("width"), ts.line());
                    ts.expect_literal("BY");
                    macro.height_um = text::to_double(ts.expect("height"), ts.line());
                    ts.expect_literal(";");
                    if (macro.width_um <= 0 || macro.height_um <= 0)
                        throw ParseError("macro " + macro.name + " has non-positive size",
                                         ts.line());
                } else if (t == "PIN") {
                    MacroPin pin;
                    pin.name = ts.expect("pin name");
                    std::string pt = ts.expect("pin body");
                    while (pt != "END") {
                        if (pt == "DIRECTION") {
                            std::string d = ts.expect("direction");
                            if (d == "INPUT")
                                pin.direction = PinDirection::input;
                            else if (d == "OUTPUT")
                                pin.direction = PinDirection::output;
                            else
                                pin.direction = PinDirection::inout;
                            ts.expect_literal(";");
                        } else if (pt == "PORT") {
                            std::string cur_layer;
                            std::string gt = ts.expect("port body");
                            while (gt != "END") {
                                if (gt == "LAYER") {
                                    cur_layer = ts.expect("layer name");
                                    ts.expect_literal(";");
                                } else if (gt == "RECT") {
                                    RectDbu r;
                                    int dbu = lib.dbu_per_micron;
                                    r.x_min = detail::um_to_dbu(
                                        text::to_double(ts.expect("x"), ts.line()), dbu,
                                        ts.line());
                                    r.y_min = detail::um_to_dbu(
                                        text::to_double(ts.expect("y"), ts.line()), dbu,
                                        ts.line());
                                    r.x_max = detail::um_to_dbu(
                                        text::to_double(ts.expect("x"), ts.line()), dbu,
                                        ts.line());
                                    r.y_max = detail::um_to_dbu(
                                        text::to_double(ts.expect("y"), ts.line()), dbu,
                                        ts.line());
                                    ts.expect_literal(";");
                                    pin.rects.emplace_back(cur_layer, r);
                                } else {
                                    ++lib.skipped_statements;
                                    while (gt != ";") gt = ts.expect("';'");
                                }
                                gt = ts.expect("port body");
                            }
                        } else {
                            ++lib.skipped_statements;
                            while (pt != ";") pt = ts.expect("';'");
                        }
                        pt = ts.expect("pin body");
                    }
                    std::string pname = ts.expect("pin name after END");
                    if (pname != pin.name)
                        throw ParseError("END " + pname + " does not close PIN " + pin.name,
                                         ts.line());
                    macro.pins.push_back(std::move(pin));
                } else if (t == "OBS") {
                    detail::skip_until_end(ts, "OBS");  // not modeled
                    ++lib.skipped_statements;
                } else {
                    ++lib.skipped_statements;
                    while (t != ";") t = ts.expect("';'");
                }
                t = ts.expect("macro body");
            }
            std::string name = ts.expect("macro name after END");
            if (name != macro.name)
                throw ParseError("END " + name + " does not close MACRO " + macro.name,
                                 ts.line());
            lib.macros[macro.name] = std::move(macro);
        } else if (tok == "END") {
            std::string what = ts.expect("END target");
            if (what == "LIBRARY") break;
            throw ParseError("unexpected END " + what, ts.line());
        } else if (tok == "SITE") {
            detail::skip_until_end(ts, ts.expect("site name"));
            ++lib.skipped_statements;
        } else if (tok == "PROPERTYDEFINITIONS") {
            detail::skip_until_end(ts, tok);
            ++lib.skipped_statements;
        } else {
            // VERSION, BUSBITCHARS, vendor extensions: one statement.
            ++lib.skipped_statements;
            std::string t;
            while (ts.next(t) && t != ";") {
            }
        }
    }

    if (lib.dbu_per_micron <= 0)
        throw ParseError("LEF document is missing UNITS DATABASE MICRONS");
    return lib;
}

// Canonical serialization; parse_lef(write_lef(lib)) reproduces `lib`
// field for field.
inline std::string write_lef(const TechLibrary& lib) {
    std::ostringstream os;
    os << "VERSION 5.8 ;\n";
    os << "UNITS\n  DATABASE MICRONS " << lib.dbu_per_micron << " ;\nEND UNITS\n";
    auto um = [&](Dbu v) {
        return text::fmt_double(static_cast<double>(v) / lib.dbu_per_micron);
    };
    for (const auto& l : lib.layers) {
        os << "LAYER " << l.name << "\n";
        os << "  TYPE "
           << (l.kind == LayerKind::routing ? "ROUTING"
                                            : (l.kind == LayerKind::cut ? "CUT" : "OVERLAP"))
           << " ;\n";
        if (l.direction != LayerDirection::none)
            os << "  DIRECTION "
               << (l.direction == LayerDirection::horizontal ? "HORIZONTAL" : "VERTICAL")
               << " ;\n";
        if (l.min_width > 0) os << "  WIDTH " << um(l.min_width) << " ;\n";
        os << "END " << l.name << "\n";
    }
    for (const auto& [name, m] : lib.macros) {
        os << "MACRO " << name << "\n";
        if (!m.macro_class.empty()) os << "  CLASS " << m.macro_class << " ;\n";
        os << "  SIZE " << text::fmt_double(m.width_um) << " BY "
           << text::fmt_double(m.height_um) << " ;\n";
        for (const auto& p : m.pins) {
            os << "  PIN " << p.name << "\n    DIRECTION " << pin_direction_name(p.direction)
               << " ;\n    PORT\n";
            std::string cur;
            for (const auto& [layer, r] : p.rects) {
                if (layer != cur) {
                    os << "      LAYER " << layer << " ;\n";
                    cur = layer;
                }
                os << "        RECT " << um(r.x_min) << " " << um(r.y_min) << " "
                   << um(r.x_max) << " " << um(r.y_max) << " ;\n";
            }
            os << "    END\n  END " << p.name << "\n";
        }
        os << "END " << name << "\n";
    }
    os << "END LIBRARY\n";
    return os.str();
}

}  // namespace eda

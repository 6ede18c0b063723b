#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "edaschema/errors.hpp"
#include "edaschema/geometry.hpp"
#include "edaschema/lef.hpp"
#include "edaschema/text.hpp"

namespace eda {

enum class PlaceStatus { unplaced, placed, fixed, cover };

inline std::string_view place_status_name(PlaceStatus s) {
    switch (s) {
        case PlaceStatus::placed: return "PLACED";
        case PlaceStatus::fixed: return "FIXED";
        case PlaceStatus::cover: return "COVER";
        default: return "UNPLACED";
    }
}

struct Component {
    std::string name;
    std::string cell;  // resolves against TechLibrary macros
    PlaceStatus status = PlaceStatus::unplaced;
    Dbu x = 0, y = 0;  // origin, DBU
    std::string orient = "N";

    friend bool operator==(const Component&, const Component&) = default;
};

struct DefPort {
    std::string name;
    std::string net;
    PinDirection direction = PinDirection::unknown;
    bool placed = false;
    Dbu x = 0, y = 0;
    std::string orient = "N";
    std::string layer;          // pin shape layer, optional
    RectDbu shape;              // relative to (x, y)
    bool has_shape = false;

    friend bool operator==(const DefPort&, const DefPort&) = default;
};

// One routed wire piece: centerline p1 -> p2 on `layer`, `width` wide.
// `rect` is the covered metal, endpoints extended by half the width.
struct RouteSegment {
    std::string layer;
    PointDbu p1, p2;
    Dbu width = 0;
    RectDbu rect;

    // Centerline length in DBU (0 for via pads and point segments).
    Dbu length() const {
        Dbu dx = rect.width(), dy = rect.height();
        return dx > dy ? dx - dy : dy - dx;
    }

    friend bool operator==(const RouteSegment&, const RouteSegment&) = default;
};

struct NetConnection {
    std::string instance;  // empty for port connections
    std::string pin;       // port name when instance is empty

    bool is_port() const { return instance.empty(); }
    friend bool operator==(const NetConnection&, const NetConnection&) = default;
};

struct DefNet {
    std::string name;
    bool is_special = false;
    std::string use;  // SIGNAL, CLOCK, POWER, GROUND; optional
    std::vector<NetConnection> connections;
    std::vector<RouteSegment> segments;

    friend bool operator==(const DefNet&, const DefNet&) = default;
};

struct Row {
    std::string name;
    std::string site;
    Dbu x = 0, y = 0;
    std::string orient = "N";
    long long count_x = 1, count_y = 1;
    Dbu step_x = 0, step_y = 0;

    friend bool operator==(const Row&, const Row&) = default;
};

struct PhysicalNetlist {
    std::string design;
    int dbu_per_micron = 0;
    RectDbu die_box;
    RectDbu core_box;  // from ROW statements; die box when rows are absent
    std::vector<Row> rows;
    std::vector<Component> components;
    std::vector<DefPort> ports;
    std::vector<DefNet> nets;
    int skipped_statements = 0;

    const Component* find_component(std::string_view name) const {
        for (const auto& c : components)
            if (c.name == name) return &c;
        return nullptr;
    }
    const DefPort* find_port(std::string_view name) const {
        for (const auto& p : ports)
            if (p.name == name) return &p;
        return nullptr;
    }
};

namespace detail {

struct DefPointParser {
    // DEF wiring points: "( x y )" with "*" repeating the previous
    // coordinate.
    static PointDbu read(text::TokenStream& ts, const PointDbu* prev) {
        ts.expect_literal("(");
        std::string xs = ts.expect("x");
        std::string ys = ts.expect("y");
        ts.expect_literal(")");
        PointDbu p;
        if (xs == "*") {
            if (!prev) throw ParseError("'*' with no previous point", ts.line());
            p.x = prev->x;
        } else {
            p.x = text::to_int(xs, ts.line());
        }
        if (ys == "*") {
            if (!prev) throw ParseError("'*' with no previous point", ts.line());
            p.y = prev->y;
        } else {
            p.y = text::to_int(ys, ts.line());
        }
        return p;
    }
};

inline RectDbu segment_rect(PointDbu a, PointDbu b, Dbu width, int line) {
    if (a.x != b.x && a.y != b.y)
        throw ParseError("routing segment is not axis-aligned", line);
    Dbu lo = width / 2, hi = width - lo;
    RectDbu r;
    r.x_min = std::min(a.x, b.x) - lo;
    r.x_max = std::max(a.x, b.x) + hi;
    r.y_min = std::min(a.y, b.y) - lo;
    r.y_max = std::max(a.y, b.y) + hi;
    return r;
}

// ROUTED clause shared by NETS and SPECIALNETS. Special nets carry an
// explicit width after the layer name; regular nets use the layer
// minimum width. Returns ";" or the name of the net option that
// followed the clause ("+ <option>").
inline std::string parse_routed(text::TokenStream& ts, const TechLibrary& tech,
                                bool special, DefNet& net) {
    std::string layer;
    Dbu width = 0;
    std::optional<PointDbu> prev;
    bool need_layer = true;
    std::string tok;
    while (true) {
        if (!ts.next(tok)) throw ParseError("unterminated ROUTED clause", ts.line());
        if (tok == ";") return tok;
        if (tok == "+") {
            tok = ts.expect("option after '+'");
            if (tok == "SHAPE") {
                ts.expect("shape kind");  // STRIPE, RING, ...; geometry only
                continue;
            }
            return tok;  // next net option, handled by the caller
        }
        if (tok == "NEW") {
            need_layer = true;
            prev.reset();
            continue;
        }
        if (need_layer) {
            layer = tok;
            const LefLayer* l = tech.find_layer(layer);
            if (!l) throw ParseError("routing on unknown layer " + layer, ts.line());
            width = l->min_width;
            if (special) width = text::to_int(ts.expect("special wire width"), ts.line());
            need_layer = false;
            continue;
        }
        if (tok == "(") {
            std::string xs = ts.expect("x");
            std::string ys = ts.expect("y");
            ts.expect_literal(")");
            PointDbu p;
            p.x = (xs == "*") ? (prev ? prev->x
                                      : throw ParseError("'*' with no previous point",
                                                         ts.line()))
                              : text::to_int(xs, ts.line());
            p.y = (ys == "*") ? (prev ? prev->y
                                      : throw ParseError("'*' with no previous point",
                                                         ts.line()))
                              : text::to_int(ys, ts.line());
            if (prev) {
                RouteSegment seg;
                seg.layer = layer;
                seg.p1 = *prev;
                seg.p2 = p;
                seg.width = width;
                seg.rect = segment_rect(*prev, p, width, ts.line());
                net.segments.push_back(std::move(seg));
            }
            prev = p;
            continue;
        }
        // via name: ends the current point run but keeps the position
        prev.reset();
    }
}

}  // namespace detail

// Parses the UNITS/DIEAREA/ROW/COMPONENTS/PINS/NETS/SPECIALNETS subset
// of DEF 5.8. Coordinates stay in DBU.
inline PhysicalNetlist parse_def(std::string_view def_text, const TechLibrary& tech) {
    text::TokenStream ts(def_text);
    PhysicalNetlist pn;
    std::string tok;

    auto skip_statement = [&] {
        std::string t;
        while (ts.next(t) && t != ";") {
        }
    };

    while (ts.next(tok)) {
        if (tok == "DESIGN") {
            pn.design = ts.expect("design name");
            ts.expect_literal(";");
        } else if (tok == "UNITS") {
            ts.expect_literal("DISTANCE");
            ts.expect_literal("MICRONS");
            pn.dbu_per_micron = static_cast<int>(text::to_int(ts.expect("dbu"), ts.line()));
            if (pn.dbu_per_micron <= 0)
                throw ParseError("non-positive database units", ts.line());
            ts.expect_literal(";");
        } else if (tok == "DIEAREA") {
            PointDbu a = detail::DefPointParser::read(ts, nullptr);
            PointDbu b = detail::DefPointParser::read(ts, &a);
            ts.expect_literal(";");
            pn.die_box = {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x),
                          std::max(a.y, b.y)};
        } else if (tok == "ROW") {
            Row row;
            row.name = ts.expect("row name");
            row.site = ts.expect("site name");
            row.x = text::to_int(ts.expect("x"), ts.line());
            row.y = text::to_int(ts.expect("y"), ts.line());
            row.orient = ts.expect("orient");
            std::string t = ts.expect("row tail");
            if (t == "DO") {
                row.count_x = text::to_int(ts.expect("count"), ts.line());
                ts.expect_literal("BY");
                row.count_y = text::to_int(ts.expect("count"), ts.line());
                t = ts.expect("row tail");
                if (t == "STEP") {
                    row.step_x = text::to_int(ts.expect("step x"), ts.line());
                    row.step_y = text::to_int(ts.expect("step y"), ts.line());
                    t = ts.expect("';'");
                }
            }
            if (t != ";") throw ParseError("malformed ROW statement", ts.line());
            pn.rows.push_back(std::move(row));
        } else if (tok == "COMPONENTS") {
            long long declared = text::to_int(ts.expect("count"), ts.line());
            ts.expect_literal(";");
            std::string t = ts.expect("component");
            while (t == "-") {
                Component c;
                c.name = ts.expect("instance name");
                c.cell = ts.expect("cell name");
                if (!tech.macros.count(c.cell))
                    throw ParseError("unknown cell reference " + c.cell + " for instance " +
                                         c.name,
                                     ts.line());
                t = ts.expect("component body");
                while (t != ";") {
                    if (t == "+") {
                        t = ts.expect("component option");
                        if (t == "PLACED" || t == "FIXED" || t == "COVER") {
                            c.status = (t == "PLACED")  ? PlaceStatus::placed
                                       : (t == "FIXED") ? PlaceStatus::fixed
                                                        : PlaceStatus::cover;
                            PointDbu p = detail::DefPointParser::read(ts, nullptr);
                            c.x = p.x;
                            c.y = p.y;
                            c.orient = ts.expect("orient");
                        } else if (t == "UNPLACED") {
                            c.status = PlaceStatus::unplaced;
                        } else {
                            ++pn.skipped_statements;
                            do {
                                t = ts.expect("token");
                            } while (t != ";" && t != "+");
                            continue;
                        }
                    }
                    t = ts.expect("component body");
                }
                pn.components.push_back(std::move(c));
                t = ts.expect("next component or END");
            }
            if (t != "END") throw ParseError("expected END COMPONENTS", ts.line());
            ts.expect_literal("COMPONENTS");
            if (declared >= 0 && declared != static_cast<long long>(pn.components.size()))
                ++pn.skipped_statements;  // header count disagrees; tolerated
        } else if (tok == "PINS") {
            text::to_int(ts.expect("count"), ts.line());
            ts.expect_literal(";");
            std::string t = ts.expect("pin");
            while (t == "-") {
                DefPort port;
                port.name = ts.expect("pin name");
                t = ts.expect("pin body");
                while (t != ";") {
                    if (t == "+") {
                        t = ts.expect("pin option");
                        if (t == "NET") {
                            port.net = ts.expect("net name");
                        } else if (t == "DIRECTION") {
                            std::string d = ts.expect("direction");
                            port.direction = (d == "INPUT")    ? PinDirection::input
                                             : (d == "OUTPUT") ? PinDirection::output
                                                               : PinDirection::inout;
                        } else if (t == "LAYER") {
                            port.layer = ts.expect("layer");
                            PointDbu a = detail::DefPointParser::read(ts, nullptr);
                            PointDbu b = detail::DefPointParser::read(ts, &a);
                            port.shape = {std::min(a.x, b.x), std::min(a.y, b.y),
                                          std::max(a.x, b.x), std::max(a.y, b.y)};
                            port.has_shape = true;
                        } else if (t == "PLACED" || t == "FIXED") {
                            PointDbu p = detail::DefPointParser::read(ts, nullptr);
                            port.placed = true;
                            port.x = p.x;
                            port.y = p.y;
                            port.orient = ts.expect("orient");
                        } else if (t == "USE") {
                            ts.expect("use kind");
                        } else {
                            ++pn.skipped_statements;
                        }
                    }
                    t = ts.expect("pin body");
                }
                pn.ports.push_back(std::move(port));
                t = ts.expect("next pin or END");
            }
            if (t != "END") throw ParseError("expected END PINS", ts.line());
            ts.expect_literal("PINS");
        } else if (tok == "NETS" || tok == "SPECIALNETS") {
            bool special = (tok == "SPECIALNETS");
            text::to_int(ts.expect("count"), ts.line());
            ts.expect_literal(";");
            std::string t = ts.expect("net");
            while (t == "-") {
                DefNet net;
                net.name = ts.expect("net name");
                net.is_special = special;
                t = ts.expect("net body");
                while (t != ";") {
                    if (t == "(") {
                        NetConnection conn;
                        std::string inst = ts.expect("instance or PIN");
                        std::string pin = ts.expect("pin name");
                        ts.expect_literal(")");
                        if (inst == "PIN") {
                            conn.pin = pin;
                            net.connections.push_back(std::move(conn));
                        } else if (inst != "*") {  // '*' wildcard: geometry only
                            conn.instance = inst;
                            conn.pin = pin;
                            net.connections.push_back(std::move(conn));
                        }
                        t = ts.expect("net body");
                    } else if (t == "+") {
                        t = ts.expect("net option");
                    } else if (t == "ROUTED") {
                        t = detail::parse_routed(ts, tech, special, net);
                    } else if (t == "USE") {
                        net.use = ts.expect("use kind");
                        t = ts.expect("net body");
                    } else {
                        ++pn.skipped_statements;
                        t = ts.expect("net body");
                    }
                }
                pn.nets.push_back(std::move(net));
                t = ts.expect("next net or END");
            }
            if (t != "END") throw ParseError("expected END " + tok, ts.line());
            ts.expect_literal(special ? "SPECIALNETS" : "NETS");
        } else if (tok == "END") {
            std::string what = ts.expect("END target");
            if (what == "DESIGN") break;
        } else if (tok == "VERSION" || tok == "DIVIDERCHAR" || tok == "BUSBITCHARS" ||
                   tok == "TRACKS" || tok == "GCELLGRID" || tok == "VIAS" ||
                   tok == "HISTORY") {
            ++pn.skipped_statements;
            skip_statement();
        } else {
            ++pn.skipped_statements;
            skip_statement();
        }
    }

    if (pn.dbu_per_micron <= 0)
        throw ParseError("DEF document is missing UNITS DISTANCE MICRONS");

    // Validate connectivity.
    for (const auto& net : pn.nets) {
        for (const auto& conn : net.connections) {
            if (conn.is_port()) {
                if (!pn.find_port(conn.pin))
                    throw ParseError("net " + net.name + " connects to undeclared pin " +
                                     conn.pin);
            } else {
                const Component* c = pn.find_component(conn.instance);
                if (!c)
                    throw ParseError("net " + net.name +
                                     " connects to undeclared instance " + conn.instance);
                const Macro& m = tech.macros.at(c->cell);
                if (!m.find_pin(conn.pin))
                    throw ParseError("net " + net.name + " connects to unknown pin " +
                                     conn.instance + "/" + conn.pin);
            }
        }
    }

    // Core box from rows: x spans use DO count times STEP (the step of a
    // horizontal row is its site width); the top row's height is taken
    // as the smallest positive gap between distinct row origins.
    if (pn.rows.empty()) {
        pn.core_box = pn.die_box;
    } else {
        RectDbu core{pn.rows[0].x, pn.rows[0].y, pn.rows[0].x, pn.rows[0].y};
        std::vector<Dbu> ys;
        for (const auto& r : pn.rows) {
            Dbu x_ext = r.x + (r.step_x > 0 ? r.count_x * r.step_x : 0);
            Dbu y_ext = r.y + (r.step_y > 0 ? r.count_y * r.step_y : 0);
            core.x_min = std::min(core.x_min, r.x);
            core.y_min = std::min(core.y_min, r.y);
            core.x_max = std::max(core.x_max, x_ext);
            core.y_max = std::max(core.y_max, y_ext);
            ys.push_back(r.y);
        }
        std::sort(ys.begin(), ys.end());
        Dbu row_height = 0;
        for (size_t i = 1; i < ys.size(); ++i)
            if (ys[i] > ys[i - 1]) {
                Dbu gap = ys[i] - ys[i - 1];
                if (row_height == 0 || gap < row_height) row_height = gap;
            }
        core.y_max = std::max(core.y_max, ys.back() + row_height);
        pn.core_box = core;
    }
    if (!pn.die_box.contains(pn.core_box))
        throw ParseError("core box extends outside the die box");
    return pn;
}

// Canonical DEF serialization of the supported subset.
inline std::string write_def(const PhysicalNetlist& pn) {
    std::ostringstream os;
    os << "VERSION 5.8 ;\n";
    os << "DESIGN " << pn.design << " ;\n";
    os << "UNITS DISTANCE MICRONS " << pn.dbu_per_micron << " ;\n";
    os << "DIEAREA ( " << pn.die_box.x_min << " " << pn.die_box.y_min << " ) ( "
       << pn.die_box.x_max << " " << pn.die_box.y_max << " ) ;\n";
    for (const auto& r : pn.rows) {
        os << "ROW " << r.name << " " << r.site << " " << r.x << " " << r.y << " "
           << r.orient << " DO " << r.count_x << " BY " << r.count_y << " STEP " << r.step_x
           << " " << r.step_y << " ;\n";
    }
    os << "COMPONENTS " << pn.components.size() << " ;\n";
    for (const auto& c : pn.components) {
        os << "  - " << c.name << " " << c.cell;
        if (c.status == PlaceStatus::unplaced) {
            os << " + UNPLACED";
        } else {
            os << " + " << place_status_name(c.status) << " ( " << c.x << " " << c.y
               << " ) " << c.orient;
        }
        os << " ;\n";
    }
    os << "END COMPONENTS\n";
    os << "PINS " << pn.ports.size() << " ;\n";
    for (const auto& p : pn.ports) {
        os << "  - " << p.name;
        if (!p.net.empty()) os << " + NET " << p.net;
        os << " + DIRECTION " << pin_direction_name(p.direction);
        if (p.has_shape)
            os << " + LAYER " << p.layer << " ( " << p.shape.x_min << " " << p.shape.y_min
               << " ) ( " << p.shape.x_max << " " << p.shape.y_max << " )";
        if (p.placed)
            os << " + PLACED ( " << p.x << " " << p.y << " ) " << p.orient;
        os << " ;\n";
    }
    os << "END PINS\n";

    auto write_net_group = [&](bool special) {
        size_t n = 0;
        for (const auto& net : pn.nets)
            if (net.is_special == special) ++n;
        os << (special ? "SPECIALNETS " : "NETS ") << n << " ;\n";
        for (const auto& net : pn.nets) {
            if (net.is_special != special) continue;
            os << "  - " << net.name;
            for (const auto& conn : net.connections) {
                if (conn.is_port())
                    os << " ( PIN " << conn.pin << " )";
                else
                    os << " ( " << conn.instance << " " << conn.pin << " )";
            }
            if (!net.use.empty()) os << " + USE " << net.use;
            bool first = true;
            for (const auto& seg : net.segments) {
                os << (first ? "\n    + ROUTED " : "\n      NEW ") << seg.layer;
                if (special) os << " " << seg.width;
                os << " ( " << seg.p1.x << " " << seg.p1.y << " ) ( " << seg.p2.x << " "
                   << seg.p2.y << " )";
                first = false;
            }
            os << " ;\n";
        }
        os << (special ? "END SPECIALNETS\n" : "END NETS\n");
    };
    write_net_group(false);
    write_net_group(true);
    os << "END DESIGN\n";
    return os.str();
}

}  // namespace eda

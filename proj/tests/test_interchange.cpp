#include <catch2/catch_amalgamated.hpp>

#include "edaschema/def.hpp"
#include "edaschema/gridded_csv.hpp"
#include "edaschema/lef.hpp"
#include "edaschema/liberty.hpp"
#include "edaschema/spef.hpp"
#include "edaschema/sta_report.hpp"
#include "fixture_util.hpp"

using namespace eda;

TEST_CASE("minimal single-layer LEF") {
    const char* text = R"(
UNITS
  DATABASE MICRONS 1000 ;
END UNITS
LAYER metal1
  TYPE ROUTING ;
  WIDTH 0.14 ;
END metal1
END LIBRARY
)";
    TechLibrary lib = parse_lef(text);
    REQUIRE(lib.layers.size() == 1);
    CHECK(lib.layers[0].name == "metal1");
    CHECK(lib.layers[0].min_width == 140);
    CHECK(lib.w_m1() == 140);
}

TEST_CASE("LEF with five routing layers") {
    std::string text = "UNITS\n  DATABASE MICRONS 1000 ;\nEND UNITS\n";
    for (int i = 1; i <= 5; ++i) {
        text += "LAYER met" + std::to_string(i) + "\n  TYPE ROUTING ;\n  WIDTH 0.17 ;\nEND met" +
                std::to_string(i) + "\n";
    }
    text += "END LIBRARY\n";
    TechLibrary lib = parse_lef(text);
    CHECK(lib.layers.size() == 5);
    CHECK(lib.routing_layers().size() == 5);
}

TEST_CASE("fixture LEF: macros and pin rectangles") {
    TechLibrary lib = parse_lef(read_fixture("mini.lef"));
    CHECK(lib.dbu_per_micron == 2000);
    CHECK(lib.layers.size() == 10);
    CHECK(lib.routing_layers().size() == 5);
    REQUIRE(lib.macros.size() == 3);

    // hand-transcribed from the fixture
    const Macro& inv = lib.macros.at("INV_X1");
    CHECK(inv.width_um == 0.76);
    CHECK(inv.height_um == 1.4);
    REQUIRE(inv.pins.size() == 2);
    CHECK(inv.pins[0].name == "A");
    CHECK(inv.pins[0].direction == PinDirection::input);
    REQUIRE(inv.pins[0].rects.size() == 1);
    CHECK(inv.pins[0].rects[0].first == "metal1");
    CHECK(inv.pins[0].rects[0].second == RectDbu{200, 1000, 400, 1800});
    CHECK(inv.pins[1].rects[0].second == RectDbu{1000, 600, 1240, 2200});

    const Macro& dff = lib.macros.at("DFF_X1");
    REQUIRE(dff.pins.size() == 3);
    CHECK(dff.find_pin("CK")->rects[0].second == RectDbu{200, 2000, 400, 2600});
}

TEST_CASE("LEF errors") {
    CHECK_THROWS_AS(parse_lef("LAYER m1\n TYPE ROUTING ;\n WIDTH 0.1 ;\nEND m1\n"),
                    ParseError);  // UNITS missing
    CHECK_THROWS_AS(
        parse_lef("UNITS\n DATABASE MICRONS 1000 ;\nEND UNITS\n"
                  "LAYER m1\n TYPE ROUTING ;\nEND m1\nEND LIBRARY\n"),
        ParseError);  // zero width routing layer
    CHECK_THROWS_AS(
        parse_lef("UNITS\n DATABASE MICRONS 1000 ;\nEND UNITS\n"
                  "LAYER m1\n TYPE ROUTING ;\n WIDTH 0.1 ;\nEND m2\nEND LIBRARY\n"),
        ParseError);  // mismatched END
}

TEST_CASE("LEF canonical serialization is deterministic") {
    TechLibrary lib = parse_lef(read_fixture("mini.lef"));
    std::string once = write_lef(lib);
    TechLibrary again = parse_lef(once);
    CHECK(write_lef(again) == once);
    CHECK(again.layers == lib.layers);
    CHECK(again.macros == lib.macros);
}

TEST_CASE("empty DEF keeps the die box") {
    TechLibrary lib = parse_lef(read_fixture("mini.lef"));
    const char* text = R"(
VERSION 5.8 ;
DESIGN empty ;
UNITS DISTANCE MICRONS 1000 ;
DIEAREA ( 0 0 ) ( 1000 1000 ) ;
COMPONENTS 0 ;
END COMPONENTS
END DESIGN
)";
    PhysicalNetlist pn = parse_def(text, lib);
    CHECK(pn.components.empty());
    CHECK(pn.die_box == RectDbu{0, 0, 1000, 1000});
    CHECK(pn.core_box == pn.die_box);
}

TEST_CASE("fixture DEF: four-gate chain") {
    TechLibrary lib = parse_lef(read_fixture("mini.lef"));
    PhysicalNetlist pn = parse_def(read_fixture("mini_placed.def"), lib);
    CHECK(pn.design == "chain4");
    CHECK(pn.dbu_per_micron == 2000);
    REQUIRE(pn.components.size() == 4);
    REQUIRE(pn.nets.size() == 5);
    REQUIRE(pn.ports.size() == 2);

    // connectivity equals the hand-built adjacency
    const DefNet* n2 = nullptr;
    for (const auto& n : pn.nets)
        if (n.name == "n2") n2 = &n;
    REQUIRE(n2 != nullptr);
    REQUIRE(n2->connections.size() == 2);
    CHECK(n2->connections[0].instance == "u2");
    CHECK(n2->connections[0].pin == "Z");
    CHECK(n2->connections[1].instance == "u3");
    CHECK(n2->connections[1].pin == "A");

    CHECK(pn.find_component("u1")->x == 2800);
    CHECK(pn.find_component("u1")->cell == "INV_X1");
    // component at (2800, 2800) with 2000 DBU/um sits at 1.4 um
    CHECK(dbu_to_um(pn.find_component("u1")->x, pn.dbu_per_micron) == 1.4);

    // core box from the row grid
    CHECK(pn.core_box == RectDbu{2800, 2800, 14200, 14000});
}

TEST_CASE("routed DEF decomposes wiring into per-layer rectangles") {
    TechLibrary lib = parse_lef(read_fixture("mini.lef"));
    PhysicalNetlist pn = parse_def(read_fixture("mini_routed.def"), lib);
    const DefNet* n1 = nullptr;
    for (const auto& n : pn.nets)
        if (n.name == "n1") n1 = &n;
    REQUIRE(n1 != nullptr);
    REQUIRE(n1->segments.size() == 1);
    const RouteSegment& seg = n1->segments[0];
    CHECK(seg.layer == "metal1");
    CHECK(seg.width == 280);
    CHECK(seg.rect == RectDbu{3920 - 140, 4200 - 140, 5900 + 140, 4200 + 140});
    CHECK(seg.length() == 1980);

    // special nets carry explicit widths
    const DefNet* vdd = nullptr;
    for (const auto& n : pn.nets)
        if (n.name == "VDD") vdd = &n;
    REQUIRE(vdd != nullptr);
    CHECK(vdd->is_special);
    REQUIRE(vdd->segments.size() == 2);
    CHECK(vdd->segments[0].width == 700);
    CHECK(vdd->segments[0].length() == 16800);
}

TEST_CASE("DEF errors") {
    TechLibrary lib = parse_lef(read_fixture("mini.lef"));
    CHECK_THROWS_AS(parse_def("VERSION 5.8 ;\nDESIGN x ;\nUNITS DISTANCE MICRONS 1000 ;\n"
                              "COMPONENTS 1 ;\n  - u1 NO_SUCH_CELL + PLACED ( 0 0 ) N ;\n"
                              "END COMPONENTS\nEND DESIGN\n",
                              lib),
                    ParseError);  // unknown cell
    CHECK_THROWS_AS(parse_def("VERSION 5.8 ;\nDESIGN x ;\nUNITS DISTANCE MICRONS 1000 ;\n"
                              "NETS 1 ;\n  - n1 ( u9 A ) ;\nEND NETS\nEND DESIGN\n",
                              lib),
                    ParseError);  // undeclared instance
    CHECK_THROWS_AS(parse_def(read_fixture("mini_placed.def").substr(0, 400), lib),
                    ParseError);  // truncated document
}

TEST_CASE("DEF round-trip") {
    TechLibrary lib = parse_lef(read_fixture("mini.lef"));
    for (const char* fixture : {"mini_placed.def", "mini_routed.def", "seq_routed.def"}) {
        PhysicalNetlist pn = parse_def(read_fixture(fixture), lib);
        std::string serialized = write_def(pn);
        PhysicalNetlist again = parse_def(serialized, lib);
        INFO(fixture);
        CHECK(again.design == pn.design);
        CHECK(again.die_box == pn.die_box);
        CHECK(again.core_box == pn.core_box);
        CHECK(again.rows == pn.rows);
        CHECK(again.components == pn.components);
        CHECK(again.ports == pn.ports);
        CHECK(again.nets == pn.nets);
    }
}

TEST_CASE("SPEF single-element net") {
    const char* text = R"(
*SPEF "IEEE 1481-1998"
*DELIMITER :
*T_UNIT 1 NS
*C_UNIT 1 FF
*R_UNIT 1 OHM

*D_NET n1 2.0
*CAP
1 n1:1 2.0
*RES
1 n1:1 n1:2 5.0
*END
)";
    ParasiticSet ps = parse_spef(text);
    REQUIRE(ps.nets.size() == 1);
    CHECK(ps.nets.at("n1").total_resistance == 5.0);
    CHECK(ps.nets.at("n1").total_capacitance == 2.0);
    CHECK(ps.nets.at("n1").total_coupling_capacitance == 0.0);
}

TEST_CASE("SPEF empty D_NET body") {
    const char* text = "*C_UNIT 1 FF\n*R_UNIT 1 OHM\n*D_NET n 0.0\n*END\n";
    ParasiticSet ps = parse_spef(text);
    CHECK(ps.nets.at("n") == NetParasitics{0.0, 0.0, 0.0});
}

TEST_CASE("fixture SPEF totals match a line-by-line sum") {
    ParasiticSet ps = parse_spef(read_fixture("mini.spef"));
    REQUIRE(ps.nets.size() == 3);
    // independent sums done over the raw fixture lines
    CHECK_THAT(ps.nets.at("nq").total_resistance, Catch::Matchers::WithinAbs(7.25, 1e-12));
    CHECK_THAT(ps.nets.at("nq").total_capacitance, Catch::Matchers::WithinAbs(2.3, 1e-12));
    CHECK_THAT(ps.nets.at("nq").total_coupling_capacitance,
               Catch::Matchers::WithinAbs(0.5, 1e-12));
    CHECK_THAT(ps.nets.at("nd2").total_resistance, Catch::Matchers::WithinAbs(3.5, 1e-12));
    CHECK_THAT(ps.nets.at("nd2").total_capacitance, Catch::Matchers::WithinAbs(1.2, 1e-12));
    CHECK_THAT(ps.nets.at("nd2").total_coupling_capacitance,
               Catch::Matchers::WithinAbs(0.4, 1e-12));
    CHECK_THAT(ps.nets.at("ndout").total_resistance,
               Catch::Matchers::WithinAbs(4.75, 1e-12));
}

TEST_CASE("SPEF unit scaling and errors") {
    ParasiticSet ps = parse_spef(
        "*C_UNIT 1 PF\n*R_UNIT 1 KOHM\n*D_NET n 0\n*CAP\n1 n:1 0.002\n*RES\n1 n:1 n:2 "
        "0.005\n*END\n");
    CHECK_THAT(ps.nets.at("n").total_capacitance, Catch::Matchers::WithinAbs(2.0, 1e-12));
    CHECK_THAT(ps.nets.at("n").total_resistance, Catch::Matchers::WithinAbs(5.0, 1e-12));

    CHECK_THROWS_AS(parse_spef("*D_NET n 0\n*END\n"), ParseError);  // units missing
    CHECK_THROWS_AS(parse_spef("*C_UNIT 1 FF\n*R_UNIT 1 OHM\n*D_NET n 0\n*END\n"
                               "*D_NET n 0\n*END\n"),
                    ParseError);  // duplicate section
    CHECK_THROWS_AS(
        parse_spef("*C_UNIT 1 FF\n*R_UNIT 1 OHM\n*D_NET n 0\n*CAP\n1 n:1 -2\n*END\n"),
        ParseError);  // negative value
}

TEST_CASE("SPEF round-trip through canonical serialization") {
    ParasiticSet ps = parse_spef(read_fixture("mini.spef"));
    ParasiticSet again = parse_spef(write_spef(ps));
    CHECK(again.nets == ps.nets);
}

TEST_CASE("liberty flags") {
    CellCatalog cat = parse_liberty(read_fixture("mini.lib"));
    REQUIRE(cat.cells.size() == 12);

    CHECK(cat.at("DFF_X1").is_sequential);
    CHECK(cat.at("SDFF_X1").is_sequential);
    CHECK(cat.at("DLATCH_X1").is_sequential);
    CHECK_FALSE(cat.at("INV_X1").is_sequential);

    CHECK(cat.at("INV_X1").is_inverter);
    CHECK(cat.at("INV_X2").is_inverter);
    CHECK_FALSE(cat.at("INV_X1").is_buffer);
    CHECK(cat.at("BUF_X1").is_buffer);
    CHECK(cat.at("BUF_X2").is_buffer);
    CHECK_FALSE(cat.at("NAND2_X1").is_inverter);
    CHECK_FALSE(cat.at("NAND2_X1").is_buffer);

    CHECK(cat.at("FILL_X1").is_filler);
    CHECK(cat.at("TAP_X1").is_tap);
    CHECK(cat.at("DIODE_X1").is_diode);
}

TEST_CASE("liberty attributes transcribed by hand") {
    CellCatalog cat = parse_liberty(read_fixture("mini.lib"));
    const CatalogCell& dff = cat.at("DFF_X1");
    CHECK(dff.area_um2 == 4.522);
    CHECK(dff.drive_strength == 1.0);
    // leakage_power groups: 48.1 and 52.7 nW
    CHECK_THAT(dff.leakage_power_min_uw, Catch::Matchers::WithinAbs(0.0481, 1e-12));
    CHECK_THAT(dff.leakage_power_max_uw, Catch::Matchers::WithinAbs(0.0527, 1e-12));
    // input caps: D 2.1, CK 1.1
    CHECK(dff.input_capacitance_min_ff == 1.1);
    CHECK(dff.input_capacitance_max_ff == 2.1);
    CHECK(dff.output_capacitance_min_ff == 0.7);
    CHECK(dff.function == "IQ");

    const CatalogCell& nand = cat.at("NAND2_X1");
    CHECK(nand.function == "!(A1 & A2)");
    CHECK(nand.input_capacitance_min_ff == 1.6);
    CHECK(nand.input_capacitance_max_ff == 1.65);
}

TEST_CASE("liberty errors") {
    CHECK_THROWS_AS(parse_liberty("library (x) { cell (c) { area : 1; "),
                    ParseError);  // unbalanced braces
    CHECK_THROWS_AS(parse_liberty("library (x) { cell (c) { pin (A) { direction : input; } } }"),
                    ParseError);  // missing area
}

TEST_CASE("liberty geometry enrichment from LEF") {
    TechLibrary lib = parse_lef(read_fixture("mini.lef"));
    CellCatalog cat = parse_liberty(read_fixture("mini.lib"));
    enrich_with_lef(cat, lib);
    CHECK(cat.at("INV_X1").width_um == 0.76);
    CHECK(cat.at("INV_X1").height_um == 1.4);
    // cells absent from LEF keep area as width x 1
    CHECK(cat.at("SDFF_X1").width_um == 5.586);
    CHECK(cat.at("SDFF_X1").height_um == 1.0);
}

TEST_CASE("single-path report slack identity") {
    const char* text = R"(
Startpoint: a (input port)
Endpoint: b (output port)
Path Group: clk
Path Type: max

   Slew    Cap   Delay    Time   Description
-----------------------------------------------
   0.01          0.10    0.10 ^ a (in)
   0.02   1.0    0.85    0.95 ^ b (out)
             0.95   data arrival time
             1.00   data required time
-----------------------------------------------
             0.05   slack (MET)
)";
    StaReport rep = parse_sta_report(text);
    REQUIRE(rep.records.size() == 1);
    const TimingPathRecord& rec = rep.records[0];
    CHECK(rec.startpoint == "a");
    CHECK(rec.endpoint == "b");
    CHECK(rec.check_type == CheckType::setup);
    CHECK_THAT(rec.slack_ns, Catch::Matchers::WithinAbs(0.05, 1e-12));
    CHECK_FALSE(rec.is_warning);
    CHECK(std::abs(slack_identity_residual(rec)) <= kSlackIdentityTolNs);
}

TEST_CASE("fixture report: eight paths, setup/hold split") {
    StaReport rep = parse_sta_report(read_fixture("seq8.rpt"));
    REQUIRE(rep.records.size() == 8);
    int setup = 0, hold = 0;
    for (const auto& r : rep.records) {
        (r.check_type == CheckType::setup ? setup : hold)++;
        CHECK(std::abs(slack_identity_residual(r)) <= kSlackIdentityTolNs);
        CHECK_FALSE(r.is_warning);
        REQUIRE(!r.points.empty());
        // path arrival equals the last point arrival
        CHECK_THAT(r.points.back().arrival_ns,
                   Catch::Matchers::WithinAbs(r.arrival_ns, 1e-3));
    }
    CHECK(setup == 4);
    CHECK(hold == 4);

    // worst setup slack in the fixture
    double worst = 1e9;
    for (const auto& r : rep.records)
        if (r.check_type == CheckType::setup) worst = std::min(worst, r.slack_ns);
    CHECK_THAT(worst, Catch::Matchers::WithinAbs(0.295, 1e-12));
}

TEST_CASE("report with inconsistent slack becomes a warning record") {
    const char* text = R"(
Startpoint: a (input port)
Endpoint: b (output port)
Path Group: clk
Path Type: max

   0.01          0.10    0.10 ^ a (in)
   0.02   1.0    0.85    0.95 ^ b (out)
             0.95   data arrival time
             1.00   data required time
             0.25   slack (MET)
)";
    StaReport rep = parse_sta_report(text);
    REQUIRE(rep.records.size() == 1);
    CHECK(rep.records[0].is_warning);
}

TEST_CASE("strict mode rejects unknown line shapes") {
    std::string text = read_fixture("seq8.rpt");
    text.insert(text.find("Startpoint: r1/CK"), "some stray diagnostic line\n");
    CHECK_NOTHROW(parse_sta_report(text, false));
    CHECK(parse_sta_report(text, false).skipped_lines > 0);
    CHECK_THROWS_AS(parse_sta_report(text, true), ParseError);
}

TEST_CASE("STA report round-trip") {
    StaReport rep = parse_sta_report(read_fixture("seq8.rpt"));
    StaReport again = parse_sta_report(write_sta_report(rep), true);
    REQUIRE(again.records.size() == rep.records.size());
    CHECK(again.records == rep.records);
}

TEST_CASE("gridded csv") {
    GridSamples one = parse_gridded_csv("x,y,value[mV]\n1.5,2.5,12.25\n");
    REQUIRE(one.samples.size() == 1);
    CHECK(one.samples[0] == GridSample{1.5, 2.5, 12.25});
    CHECK(one.value_unit == "mV");

    GridSamples empty = parse_gridded_csv("x,y,value\n");
    CHECK(empty.samples.empty());

    std::string text = "x,y,value\n";
    for (int j = 0; j < 10; ++j)
        for (int i = 0; i < 10; ++i)
            text += std::to_string(0.5 + i) + "," + std::to_string(0.5 + j) + "," +
                    std::to_string(i * j) + "\n";
    GridSamples grid = parse_gridded_csv(text);
    REQUIRE(grid.samples.size() == 100);
    BoxUm box = grid.bounding_box();
    CHECK(box.x_min == 0.5);
    CHECK(box.y_max == 9.5);

    CHECK_THROWS_AS(parse_gridded_csv("x,y,value\n1,2\n"), ParseError);
    CHECK_THROWS_AS(parse_gridded_csv("x,y,value\n1,2,abc\n"), ParseError);
}

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "edaschema/schema.hpp"
#include "fixture_util.hpp"

using namespace eda;

namespace {

struct Fixture {
    TechLibrary tech;
    CellCatalog catalog;
    PhysicalNetlist pn;
    ParasiticSet rc;
    StaReport sta;

    Fixture() {
        tech = parse_lef(read_fixture("mini.lef"));
        catalog = parse_liberty(read_fixture("mini.lib"));
        enrich_with_lef(catalog, tech);
        pn = parse_def(read_fixture("seq_routed.def"), tech);
        rc = parse_spef(read_fixture("mini.spef"));
        sta = parse_sta_report(read_fixture("seq8.rpt"));
    }

    AssembleInputs inputs(Stage stage) {
        AssembleInputs in;
        in.stage = stage;
        in.netlist = &pn;
        in.tech = &tech;
        in.catalog = &catalog;
        return in;
    }
};

NetlistGraph graph_of(const std::vector<std::string>& cells, const CellCatalog&) {
    NetlistGraph g;
    for (size_t i = 0; i < cells.size(); ++i) {
        GateNode gate;
        gate.name = "g" + std::to_string(i);
        gate.cell = cells[i];
        g.gate_index[gate.name] = int(i);
        g.gates.push_back(gate);
    }
    return g;
}

}  // namespace

TEST_CASE("stage order helper") {
    CHECK(stages_canonical({Stage::floorplan, Stage::cts, Stage::final_stage}));
    CHECK_FALSE(stages_canonical({Stage::cts, Stage::floorplan}));
    CHECK(stage_from_name("detailed_route") == Stage::detailed_route);
    CHECK(stage_name(Stage::final_stage) == "final");
    CHECK_FALSE(stage_from_name("bogus").has_value());
}

TEST_CASE("cell metrics classification") {
    Fixture f;
    SECTION("two inverters and a flop") {
        NetlistGraph g = graph_of({"INV_X1", "INV_X1", "DFF_X1"}, f.catalog);
        CellMetrics m = compute_cell_metrics(g, f.catalog);
        CHECK(m.no_of_inverters == 2);
        CHECK(m.no_of_sequential_cells == 1);
        CHECK(m.no_of_combinational_cells == 0);
        CHECK(m.no_of_total_cells == 3);
    }
    SECTION("empty netlist") {
        NetlistGraph g;
        CellMetrics m = compute_cell_metrics(g, f.catalog);
        CHECK(m == CellMetrics{});
    }
    SECTION("thirty random gates equal an independent group-by") {
        std::vector<std::string> names;
        for (const auto& [name, cell] : f.catalog.cells) names.push_back(name);
        std::mt19937_64 rng(5);
        std::vector<std::string> cells;
        for (int i = 0; i < 30; ++i) cells.push_back(names[rng() % names.size()]);
        NetlistGraph g = graph_of(cells, f.catalog);
        CellMetrics m = compute_cell_metrics(g, f.catalog);

        // oracle: group-by over catalog flags with the documented precedence
        std::map<std::string, long long> buckets;
        for (const auto& name : cells) {
            const CatalogCell& c = f.catalog.at(name);
            std::string b = c.is_filler      ? "filler"
                            : c.is_tap       ? "tap"
                            : c.is_diode     ? "diode"
                            : c.is_macro     ? "macro"
                            : c.is_sequential ? "seq"
                            : c.is_buffer    ? "buf"
                            : c.is_inverter  ? "inv"
                                             : "comb";
            buckets[b]++;
        }
        CHECK(m.no_of_fillers == buckets["filler"]);
        CHECK(m.no_of_tap_cells == buckets["tap"]);
        CHECK(m.no_of_diodes == buckets["diode"]);
        CHECK(m.no_of_macros == buckets["macro"]);
        CHECK(m.no_of_sequential_cells == buckets["seq"]);
        CHECK(m.no_of_buffers == buckets["buf"]);
        CHECK(m.no_of_inverters == buckets["inv"]);
        CHECK(m.no_of_combinational_cells == buckets["comb"]);
        long long total = 0;
        for (const auto& [k, v] : buckets) total += v;
        CHECK(m.no_of_total_cells == total);
        CHECK(m.no_of_total_cells == 30);
    }
    SECTION("unknown cell name") {
        NetlistGraph g = graph_of({"NOT_A_CELL"}, f.catalog);
        CHECK_THROWS_AS(compute_cell_metrics(g, f.catalog), ValidationError);
    }
}

TEST_CASE("area metrics") {
    Fixture f;
    SECTION("one 1.4 x 0.7 cell") {
        CellCatalog cat;
        CatalogCell c;
        c.name = "C";
        c.width_um = 1.4;
        c.height_um = 0.7;
        c.area_um2 = 0.98;
        cat.cells["C"] = c;
        NetlistGraph g = graph_of({"C"}, cat);
        AreaMetrics m = compute_area_metrics(g, cat, 100.0);
        CHECK_THAT(m.combinational_cell_area, Catch::Matchers::WithinAbs(0.98, 1e-12));
        CHECK(m.cell_area == m.combinational_cell_area);
        CHECK(m.total_area == 100.0);
    }
    SECTION("fixture sums equal an independent summation") {
        std::vector<std::string> cells = {"INV_X1", "BUF_X1", "DFF_X1", "FILL_X1",
                                          "INV_X2", "BUF_X2", "TAP_X1",  "DIODE_X1"};
        NetlistGraph g = graph_of(cells, f.catalog);
        AreaMetrics m = compute_area_metrics(g, f.catalog, 1e4);
        double inv = 0, buf = 0, seq = 0, fill = 0, tap = 0, diode = 0;
        for (const auto& name : cells) {
            const CatalogCell& c = f.catalog.at(name);
            double a = c.width_um * c.height_um;
            if (c.is_filler) fill += a;
            else if (c.is_tap) tap += a;
            else if (c.is_diode) diode += a;
            else if (c.is_sequential) seq += a;
            else if (c.is_buffer) buf += a;
            else if (c.is_inverter) inv += a;
        }
        CHECK_THAT(m.inverter_area, Catch::Matchers::WithinRel(inv, 1e-12));
        CHECK_THAT(m.buffer_area, Catch::Matchers::WithinRel(buf, 1e-12));
        CHECK_THAT(m.sequential_cell_area, Catch::Matchers::WithinRel(seq, 1e-12));
        CHECK_THAT(m.filler_area, Catch::Matchers::WithinRel(fill, 1e-12));
        CHECK_THAT(m.tap_cell_area, Catch::Matchers::WithinRel(tap, 1e-12));
        CHECK_THAT(m.diode_area, Catch::Matchers::WithinRel(diode, 1e-12));
        CHECK_THAT(m.cell_area,
                   Catch::Matchers::WithinRel(inv + buf + seq + fill + tap + diode, 1e-12));
    }
    SECTION("die areas sit inside the published SKY130 span") {
        // a 100 x 100 um die, typical of the small benchmark corner
        NetlistGraph g;
        CellCatalog cat;
        AreaMetrics m = compute_area_metrics(g, cat, 100.0 * 100.0);
        CHECK(m.total_area >= 3576.0);
        CHECK(m.total_area <= 513155.0);
    }
}

TEST_CASE("assemble rejects artifacts outside their stage window") {
    Fixture f;
    SECTION("SPEF at floorplan") {
        PhysicalNetlist fp = parse_def(read_fixture("mini_placed.def"), f.tech);
        AssembleInputs in = f.inputs(Stage::floorplan);
        in.netlist = &fp;
        in.parasitics = &f.rc;
        CHECK_THROWS_WITH(assemble_stage(in),
                          Catch::Matchers::ContainsSubstring("detailed_route"));
    }
    SECTION("IR drop before detailed route") {
        GridSamples ir = parse_gridded_csv("x,y,value[mV]\n3.0,3.0,12.5\n");
        AssembleInputs in = f.inputs(Stage::cts);
        in.ir_drop_vdd = &ir;
        CHECK_THROWS_AS(assemble_stage(in), ValidationError);
    }
    SECTION("SPEF accepted at detailed route") {
        AssembleInputs in = f.inputs(Stage::detailed_route);
        in.parasitics = &f.rc;
        StageSnapshot s = assemble_stage(in);
        CHECK(validate_snapshot(s).empty());
    }
}

TEST_CASE("detailed route snapshot of the clocked fixture") {
    Fixture f;
    AssembleInputs in = f.inputs(Stage::detailed_route);
    in.parasitics = &f.rc;
    in.sta = &f.sta;
    in.clock_source = "clk";
    in.source_spacing = 5600;
    GridSamples ir = parse_gridded_csv(
        "x,y,value[mV]\n3.0,3.0,12.5\n5.0,5.0,11.0\n6.5,3.5,10.25\n");
    in.ir_drop_vdd = &ir;
    StageSnapshot s = assemble_stage(in);

    // hand tally: 1 BUF + 1 INV + 2 DFF
    CHECK(s.cell_metrics.no_of_total_cells == 4);
    CHECK(s.cell_metrics.no_of_buffers == 1);
    CHECK(s.cell_metrics.no_of_inverters == 1);
    CHECK(s.cell_metrics.no_of_sequential_cells == 2);

    CHECK(s.stats.no_of_inputs == 2);
    CHECK(s.stats.no_of_outputs == 1);
    CHECK(s.stats.no_of_nets == 8);  // 6 signal + 2 special
    REQUIRE(s.stats.total_wirelength_um.has_value());
    REQUIRE(s.stats.total_hpwl_um.has_value());
    CHECK(*s.stats.total_wirelength_um >= *s.stats.total_hpwl_um - 1e9);
    REQUIRE(s.stats.utilization.has_value());
    CHECK(*s.stats.utilization > 0.0);
    CHECK(*s.stats.utilization < 1.0);

    REQUIRE(s.clock_tree.has_value());
    CHECK(s.clock_tree->no_of_clock_sinks == 2);

    REQUIRE(s.timing_metrics.has_value());
    CHECK_THAT(s.timing_metrics->worst_slack_ns,
               Catch::Matchers::WithinAbs(0.295, 1e-12));
    CHECK(s.timing_metrics->total_negative_slack_ns == 0.0);
    CHECK(s.timing_metrics->no_of_endpoints == 3);  // r1/D, r2/D, dout
    CHECK(s.timing_metrics->no_of_violating_endpoints == 0);
    CHECK(s.timing_metrics->critical_path_endpoint == "dout");

    CHECK(s.timing_paths.size() == 8);
    REQUIRE(s.routability.has_value());
    CHECK(s.netlist_maps.find("routing") != nullptr);
    CHECK(s.clock_maps.find("cell_placement") != nullptr);
    CHECK(s.pdn_maps.find("pdn_routing_vdd") != nullptr);
    REQUIRE(s.heatmaps.size() == 1);
    CHECK(s.heatmaps[0].name == "ir_drop_vdd");
    CHECK(s.heatmaps[0].unit == "mV");

    CHECK(validate_snapshot(s).empty());
}

TEST_CASE("empty netlist snapshot") {
    Fixture f;
    PhysicalNetlist empty;
    empty.design = "void";
    empty.dbu_per_micron = 1000;
    empty.die_box = {0, 0, 10000, 10000};
    empty.core_box = empty.die_box;
    AssembleInputs in = f.inputs(Stage::floorplan);
    in.netlist = &empty;
    StageSnapshot s = assemble_stage(in);
    CHECK(s.cell_metrics.no_of_total_cells == 0);
    CHECK(s.stats.no_of_cells == 0);
    CHECK(validate_snapshot(s).empty());
}

TEST_CASE("validate flags broken identities") {
    Fixture f;
    AssembleInputs in = f.inputs(Stage::detailed_route);
    in.sta = &f.sta;
    StageSnapshot s = assemble_stage(in);
    REQUIRE(validate_snapshot(s).empty());

    SECTION("positive TNS") {
        s.timing_metrics->total_negative_slack_ns = 0.5;
        auto violations = validate_snapshot(s);
        REQUIRE_FALSE(violations.empty());
        bool named = false;
        for (const auto& v : violations)
            named |= v.entity_path.find("total_negative_slack") != std::string::npos;
        CHECK(named);
    }
    SECTION("negative TNS with passing worst slack") {
        s.timing_metrics->total_negative_slack_ns = -1.0;
        auto violations = validate_snapshot(s);
        REQUIRE_FALSE(violations.empty());
        CHECK(violations[0].entity_path.find("worst_slack") != std::string::npos);
    }
    SECTION("cell count identity break") {
        s.cell_metrics.no_of_total_cells += 1;
        auto violations = validate_snapshot(s);
        REQUIRE_FALSE(violations.empty());
        CHECK(violations[0].entity_path.find("CellMetrics") != std::string::npos);
    }
    SECTION("power identity within one percent") {
        PowerMetrics p;
        p.internal_power_uw = 50;
        p.switching_power_uw = 30;
        p.leakage_power_uw = 20;
        p.total_power_uw = 100.5;  // 0.5% off: report rounding
        s.power_metrics = p;
        CHECK(validate_snapshot(s).empty());
        s.power_metrics->total_power_uw = 103.0;  // 3% off
        CHECK_FALSE(validate_snapshot(s).empty());
    }
    SECTION("violating endpoints bounded by endpoints") {
        s.timing_metrics->no_of_violating_endpoints =
            s.timing_metrics->no_of_endpoints + 1;
        CHECK_FALSE(validate_snapshot(s).empty());
    }
    SECTION("availability: length smuggled into an early stage") {
        StageSnapshot early = s;
        early.stage = Stage::global_place;
        auto violations = validate_snapshot(early);
        CHECK_FALSE(violations.empty());
    }
}

TEST_CASE("derived timing metrics aggregate endpoints") {
    StaReport rep;
    auto mk = [](const char* sp, const char* ep, double slack, CheckType t) {
        TimingPathRecord r;
        r.startpoint = sp;
        r.endpoint = ep;
        r.check_type = t;
        r.slack_ns = slack;
        r.arrival_ns = 1.0;
        r.required_ns = 1.0 + slack;
        return r;
    };
    rep.records = {
        mk("a", "x", -0.2, CheckType::setup),
        mk("b", "x", -0.5, CheckType::setup),  // worst for endpoint x
        mk("c", "y", 0.3, CheckType::setup),
        mk("d", "z", -0.1, CheckType::setup),
        mk("a", "x", 0.1, CheckType::hold),  // hold ignored by TNS
    };
    TimingMetrics m = derive_timing_metrics(rep);
    CHECK(m.no_of_endpoints == 3);
    CHECK(m.no_of_violating_endpoints == 2);
    CHECK_THAT(m.total_negative_slack_ns, Catch::Matchers::WithinAbs(-0.6, 1e-12));
    CHECK_THAT(m.worst_slack_ns, Catch::Matchers::WithinAbs(-0.5, 1e-12));
    CHECK(m.critical_path_startpoint == "b");
    CHECK(m.critical_path_endpoint == "x");
}

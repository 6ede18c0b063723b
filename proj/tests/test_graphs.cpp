#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "edaschema/graphs.hpp"
#include "edaschema/schema.hpp"
#include "fixture_util.hpp"

using namespace eda;

namespace {

struct Fixture {
    TechLibrary tech;
    CellCatalog catalog;
    PhysicalNetlist pn;  // backs the most recent graph() call

    Fixture() {
        tech = parse_lef(read_fixture("mini.lef"));
        catalog = parse_liberty(read_fixture("mini.lib"));
        enrich_with_lef(catalog, tech);
    }

    NetlistGraph graph(const std::string& def_name, Stage stage,
                       const ParasiticSet* rc = nullptr,
                       const StaReport* sta = nullptr) {
        pn = parse_def(read_fixture(def_name), tech);
        NetlistGraphInputs in;
        in.netlist = &pn;
        in.tech = &tech;
        in.catalog = &catalog;
        in.parasitics = rc;
        in.sta = sta;
        in.stage = stage;
        return build_netlist_graph(in);
    }
};

}  // namespace

TEST_CASE("four-gate chain matches the hand-drawn adjacency") {
    Fixture f;
    NetlistGraph g = f.graph("mini_placed.def", Stage::global_place);

    CHECK(g.gates.size() == 4);
    CHECK(g.ports.size() == 2);
    CHECK(g.nets.size() == 5);
    CHECK(g.pins.size() == 8);  // one pin node per connected (instance, pin)

    // hand-drawn adjacency: nin{in1, u1/A}, n1{u1/ZN, u2/A}, n2{u2/Z, u3/A},
    // n3{u3/ZN, u4/A}, nout{u4/Z, out1}
    int nid = g.find_net("n2");
    REQUIRE(nid >= 0);
    const NetNode& n2 = g.nets[nid];
    REQUIRE(n2.pin_ids.size() == 2);
    CHECK(g.pins[n2.pin_ids[0]].name == "u2/Z");
    CHECK(g.pins[n2.pin_ids[1]].name == "u3/A");
    CHECK(n2.no_of_fanouts == 1);

    int nout = g.find_net("nout");
    CHECK(g.nets[nout].port_ids.size() == 1);
    CHECK(g.nets[nout].no_of_fanouts == 1);  // the output port is the sink

    // every pin belongs to exactly one gate
    for (const auto& pin : g.pins) {
        REQUIRE(pin.gate_id >= 0);
        const auto& ids = g.gates[pin.gate_id].pin_ids;
        CHECK(std::count(ids.begin(), ids.end(), g.find_pin(pin.name)) == 1);
    }

    // gates-per-design equals the DEF component count
    CHECK(g.gates.size() == f.pn.components.size());
}

TEST_CASE("empty design gives an empty graph") {
    Fixture f;
    PhysicalNetlist pn;
    pn.dbu_per_micron = 1000;
    pn.die_box = {0, 0, 1000, 1000};
    pn.core_box = pn.die_box;
    NetlistGraphInputs in;
    in.netlist = &pn;
    in.tech = &f.tech;
    in.catalog = &f.catalog;
    in.stage = Stage::floorplan;
    NetlistGraph g = build_netlist_graph(in);
    CHECK(g.gates.empty());
    CHECK(g.nets.empty());
    CHECK(g.pins.empty());
    CHECK(g.ports.empty());
}

TEST_CASE("net hpwl") {
    NetlistGraph g;
    g.dbu_per_micron = 1000;
    auto add_pin = [&](double x, double y, int net_id) {
        PinNode p;
        p.name = "p" + std::to_string(g.pins.size());
        p.box = BoxUm{x, y, x, y};
        p.net_id = net_id;
        p.direction = PinDirection::input;
        p.gate_id = 0;
        g.pins.push_back(p);
        g.nets[net_id].pin_ids.push_back(int(g.pins.size()) - 1);
    };
    g.gates.push_back({});
    g.nets.push_back({});
    g.nets[0].name = "a";

    SECTION("two pins at (0,0) and (3,4)") {
        add_pin(0, 0, 0);
        add_pin(3, 4, 0);
        CHECK(net_hpwl(g, 0) == 7.0);
    }
    SECTION("single-pin net degenerates to zero") {
        add_pin(5, 5, 0);
        CHECK(net_hpwl(g, 0) == 0.0);
    }
    SECTION("no placed endpoints is signaled") {
        CHECK_FALSE(net_hpwl(g, 0).has_value());
    }
    SECTION("random ten-pin nets equal a brute-force scan") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> coord(0.0, 100.0);
        for (int trial = 0; trial < 50; ++trial) {
            NetlistGraph h;
            h.gates.push_back({});
            h.nets.push_back({});
            double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
            for (int i = 0; i < 10; ++i) {
                double x = coord(rng), y = coord(rng);
                PinNode p;
                p.box = BoxUm{x, y, x, y};
                p.net_id = 0;
                p.gate_id = 0;
                h.pins.push_back(p);
                h.nets[0].pin_ids.push_back(i);
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
            double expect = (xmax - xmin) + (ymax - ymin);
            CHECK_THAT(*net_hpwl(h, 0), Catch::Matchers::WithinRel(expect, 1e-12));
        }
    }
}

TEST_CASE("hpwl does not exceed routed length on the routed fixture") {
    Fixture f;
    NetlistGraph g = f.graph("mini_routed.def", Stage::detailed_route);
    int checked = 0;
    for (const auto& net : g.nets) {
        if (net.is_special || !net.hpwl_um || !net.length_um) continue;
        CHECK(*net.hpwl_um <= *net.length_um + 1e-9);
        ++checked;
    }
    CHECK(checked == 5);
    // n2 was routed with a detour
    const NetNode& n2 = g.nets[g.find_net("n2")];
    CHECK(*n2.length_um > *n2.hpwl_um + 0.5);
}

TEST_CASE("sink conservation over the fixture graphs") {
    Fixture f;
    for (const char* def : {"mini_placed.def", "mini_routed.def", "seq_routed.def"}) {
        NetlistGraph g = f.graph(def, Stage::detailed_route);
        long long fanouts = 0;
        for (const auto& net : g.nets) fanouts += net.no_of_fanouts;
        long long sinks = 0;
        for (const auto& pin : g.pins)
            if (pin.direction == PinDirection::input) ++sinks;
        for (const auto& port : g.ports)
            if (port.direction == PinDirection::output && port.net_id >= 0) ++sinks;
        INFO(def);
        CHECK(fanouts == sinks);
    }
}

TEST_CASE("parasitics land on the right nets and drivers") {
    Fixture f;
    ParasiticSet rc = parse_spef(read_fixture("mini.spef"));
    NetlistGraph g = f.graph("seq_routed.def", Stage::detailed_route, &rc);
    const NetNode& nq = g.nets[g.find_net("nq")];
    CHECK(nq.resistance_ohm == 7.25);
    CHECK(nq.capacitance_ff == 2.3);
    CHECK(nq.total_coupling_capacitance_ff == 0.5);
    // driver r1/Q load: net cap 2.3 + sink input cap (u1/A: 1.7 fF)
    const PinNode& driver = g.pins[g.find_pin("r1/Q")];
    REQUIRE(driver.load_capacitance_ff.has_value());
    CHECK_THAT(*driver.load_capacitance_ff, Catch::Matchers::WithinAbs(4.0, 1e-12));

    CHECK_THROWS_AS(f.graph("mini_placed.def", Stage::global_place, &rc),
                    ValidationError);
}

TEST_CASE("clock network extraction") {
    Fixture f;
    SECTION("one buffer driving two flops") {
        NetlistGraph g = f.graph("seq_routed.def", Stage::detailed_route);
        ClockNetworkGraph cng = extract_clock_network(g, "clk", f.catalog);
        CHECK(cng.no_of_buffers == 1);
        CHECK(cng.no_of_clock_sinks == 2);
        CHECK_FALSE(cng.empty_flagged);
        CHECK(cng.source_port == g.find_port("clk"));

        // sink count equals the number of sequential cells in the design
        int sequential = 0;
        for (const auto& gate : g.gates)
            if (f.catalog.at(gate.cell).is_sequential) ++sequential;
        CHECK(cng.no_of_clock_sinks == sequential);

        // subgraph containment with identical attributes
        for (int pid : cng.sink_pin_ids) {
            REQUIRE(pid >= 0);
            REQUIRE(size_t(pid) < g.pins.size());
            CHECK(f.catalog.at(g.gates[g.pins[pid].gate_id].cell).is_sequential);
        }
    }
    SECTION("combinational-only design flags an empty sink set") {
        NetlistGraph g = f.graph("mini_placed.def", Stage::global_place);
        ClockNetworkGraph cng = extract_clock_network(g, "in1", f.catalog);
        CHECK(cng.no_of_clock_sinks == 0);
        CHECK(cng.empty_flagged);
    }
    SECTION("unknown source") {
        NetlistGraph g = f.graph("mini_placed.def", Stage::global_place);
        CHECK_THROWS_AS(extract_clock_network(g, "no_such", f.catalog), ValidationError);
    }
}

TEST_CASE("timing path graphs") {
    Fixture f;
    StaReport rep = parse_sta_report(read_fixture("seq8.rpt"));
    NetlistGraph g = f.graph("seq_routed.def", Stage::detailed_route);

    SECTION("three-point record yields one cell arc and one net arc") {
        // r2/CK -> r2/Q -> dout
        TimingPathGraph tpg = build_timing_path_graph(rep.records[2], g);
        int cell_arcs = 0, net_arcs = 0;
        for (const auto& n : tpg.nodes) {
            cell_arcs += n.kind == TpgNodeKind::cell_arc;
            net_arcs += n.kind == TpgNodeKind::net_arc;
        }
        CHECK(cell_arcs == 1);
        CHECK(net_arcs == 1);
        CHECK(tpg.no_of_pins == 3);
        CHECK(tpg.nodes.size() == 5);
        CHECK_FALSE(tpg.has_unresolved);
    }

    SECTION("hold records carry the hold path type") {
        TimingPathGraph tpg = build_timing_path_graph(rep.records[5], g);
        CHECK(tpg.path_type == CheckType::hold);
    }

    SECTION("critical flag lands on the minimum slack per check type") {
        std::vector<TimingPathGraph> paths;
        for (const auto& rec : rep.records)
            paths.push_back(build_timing_path_graph(rec, g));
        mark_critical_paths(paths);
        // min-slack scan done independently
        for (CheckType check : {CheckType::setup, CheckType::hold}) {
            double worst = 1e300;
            for (const auto& p : paths)
                if (p.path_type == check) worst = std::min(worst, p.slack_ns);
            int flagged = 0, matching = 0;
            for (const auto& p : paths) {
                if (p.path_type != check) continue;
                flagged += p.is_critical_path;
                matching += p.slack_ns == worst;
            }
            CHECK(flagged == matching);
            CHECK(flagged == 1);  // fixture has distinct slacks
        }
    }

    SECTION("arrival monotonicity holds for every fixture path") {
        for (const auto& rec : rep.records) {
            TimingPathGraph tpg = build_timing_path_graph(rec, g);
            double prev = -1e300;
            for (const auto& n : tpg.nodes) {
                if (n.kind != TpgNodeKind::pin && n.kind != TpgNodeKind::port) continue;
                CHECK(n.arrival_ns >= prev);
                prev = n.arrival_ns;
            }
        }
    }

    SECTION("unresolved pins are tolerated and flagged") {
        TimingPathRecord rec = rep.records[0];
        rec.points[1].pin = "ghost/D";
        TimingPathGraph tpg = build_timing_path_graph(rec, g);
        CHECK(tpg.has_unresolved);
    }

    SECTION("non-alternating arc kinds are rejected") {
        TimingPathRecord rec = rep.records[1];
        REQUIRE(rec.points.size() >= 3);
        rec.points[2].kind = rec.points[1].kind;
        CHECK_THROWS_AS(build_timing_path_graph(rec, g), ValidationError);
    }
}

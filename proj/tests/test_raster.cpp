#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "edaschema/maps.hpp"
#include "edaschema/raster.hpp"
#include "edaschema/schema.hpp"
#include "fixture_util.hpp"

using namespace eda;

namespace {

// Independent of the production rasterizer: per-pixel area intersection
// in exact integer arithmetic.
SpatialMap oracle_rasterize(std::span<const RectDbu> rects, const GridSpec& grid) {
    SpatialMap map = make_spatial_map("oracle", grid);
    const Dbu p = grid.pixel();
    for (int iy = 0; iy < grid.resolution_y; ++iy) {
        for (int ix = 0; ix < grid.resolution_x; ++ix) {
            RectDbu cell{grid.origin_x + ix * p, grid.origin_y + iy * p,
                         grid.origin_x + (ix + 1) * p, grid.origin_y + (iy + 1) * p};
            for (const RectDbu& r : rects) {
                RectDbu ov = intersect(cell, r);
                if (ov.x_min < ov.x_max && ov.y_min < ov.y_max) {
                    map.set(ix, iy);
                    break;
                }
            }
        }
    }
    return map;
}

struct Fixture {
    TechLibrary tech;
    CellCatalog catalog;
    PhysicalNetlist pn;

    explicit Fixture(const std::string& def_name) {
        tech = parse_lef(read_fixture("mini.lef"));
        catalog = parse_liberty(read_fixture("mini.lib"));
        enrich_with_lef(catalog, tech);
        pn = parse_def(read_fixture(def_name), tech);
    }
};

}  // namespace

TEST_CASE("grid resolutions follow the ceiling formulas") {
    Dbu w = 280;
    SECTION("exact division") {
        GridSpec g = make_grid({0, 0, 100 * w, 100 * w}, w, 1, 2000);
        CHECK(g.resolution_x == 100);
        CHECK(g.resolution_y == 100);
        CHECK(g.pixel() == w);
    }
    SECTION("ceiling on a ragged edge") {
        GridSpec g = make_grid({0, 0, 101 * w, 100 * w}, w, 1, 2000);
        CHECK(g.resolution_x == 101);
        GridSpec g2 = make_grid({0, 0, 100 * w + 1, 100 * w}, w, 1, 2000);
        CHECK(g2.resolution_x == 101);
    }
    SECTION("scalar downsampling by k = 50") {
        GridSpec g = make_grid({0, 0, 1000 * w, 1000 * w}, w, 50, 2000);
        CHECK(g.resolution_x == 20);
        CHECK(g.resolution_y == 20);
        CHECK(g.pixel() == 50 * w);
    }
    SECTION("randomized dimension law") {
        std::mt19937_64 rng(11);
        for (int i = 0; i < 50; ++i) {
            Dbu wm = 1 + Dbu(rng() % 400);
            int k = 1 + int(rng() % 60);
            Dbu L = 1 + Dbu(rng() % 2000000);
            Dbu W = 1 + Dbu(rng() % 2000000);
            GridSpec g = make_grid({0, 0, L, W}, wm, k, 1000);
            Dbu p = Dbu(k) * wm;
            CHECK(g.resolution_x == (L + p - 1) / p);
            CHECK(g.resolution_y == (W + p - 1) / p);
            CHECK(g.resolution_x >= 1);
            CHECK(g.resolution_y >= 1);
        }
    }
    SECTION("degenerate core box") {
        CHECK_THROWS_AS(make_grid({0, 0, 0, 100}, w, 1, 2000), ValidationError);
        CHECK_THROWS_AS(make_grid({0, 0, 100, 100}, 0, 1, 2000), std::invalid_argument);
        CHECK_THROWS_AS(make_grid({0, 0, 100, 100}, w, 0, 2000), std::invalid_argument);
    }
}

TEST_CASE("rasterization fill rule") {
    GridSpec grid = make_grid({0, 0, 1000, 1000}, 100, 1, 1000);

    SECTION("rect covering exactly one pixel") {
        RectDbu r{0, 0, 100, 100};
        SpatialMap m = rasterize_rects({&r, 1}, grid);
        CHECK(m.count() == 1);
        CHECK(m.at(0, 0));
    }
    SECTION("partial overlap counts") {
        RectDbu r{90, 0, 110, 100};  // 10% into pixel 0, 10% into pixel 1
        SpatialMap m = rasterize_rects({&r, 1}, grid);
        CHECK(m.at(0, 0));
        CHECK(m.at(1, 0));
        CHECK(m.count() == 2);
    }
    SECTION("boundary touch does not set the neighbor") {
        RectDbu r{0, 0, 100, 100};
        SpatialMap m = rasterize_rects({&r, 1}, grid);
        CHECK_FALSE(m.at(1, 0));
        CHECK_FALSE(m.at(0, 1));
    }
    SECTION("rects outside the grid are clipped") {
        std::vector<RectDbu> rs = {{-500, -500, -100, -100}, {2000, 2000, 3000, 3000}};
        SpatialMap m = rasterize_rects(rs, grid);
        CHECK(m.count() == 0);
    }
}

TEST_CASE("random rectangles match the per-pixel oracle") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        Dbu w = 50 + Dbu(rng() % 100);
        int res = 4 + int(rng() % 12);
        GridSpec grid = make_grid({Dbu(rng() % 1000), Dbu(rng() % 1000),
                                   Dbu(rng() % 1000) + res * w + 50000,
                                   Dbu(rng() % 1000) + res * w + 50000},
                                  w, 1, 1000);
        std::vector<RectDbu> rects;
        for (int i = 0; i < 50; ++i) {
            Dbu x0 = grid.origin_x - 200 + Dbu(rng() % (grid.length + 400));
            Dbu y0 = grid.origin_y - 200 + Dbu(rng() % (grid.width + 400));
            rects.push_back({x0, y0, x0 + 1 + Dbu(rng() % 900), y0 + 1 + Dbu(rng() % 900)});
        }
        SpatialMap fast = rasterize_rects(rects, grid);
        SpatialMap slow = oracle_rasterize(rects, grid);
        CHECK(fast.bits == slow.bits);
    }
}

TEST_CASE("rasterization is idempotent and order independent") {
    std::mt19937_64 rng(31);
    GridSpec grid = make_grid({0, 0, 2000, 2000}, 100, 1, 1000);
    std::vector<RectDbu> rects;
    for (int i = 0; i < 30; ++i) {
        Dbu x0 = Dbu(rng() % 1900), y0 = Dbu(rng() % 1900);
        rects.push_back({x0, y0, x0 + 1 + Dbu(rng() % 300), y0 + 1 + Dbu(rng() % 300)});
    }
    SpatialMap a = rasterize_rects(rects, grid);
    std::shuffle(rects.begin(), rects.end(), rng);
    SpatialMap b = rasterize_rects(rects, grid);
    CHECK(a.bits == b.bits);
    std::vector<RectDbu> doubled = rects;
    doubled.insert(doubled.end(), rects.begin(), rects.end());
    SpatialMap c = rasterize_rects(doubled, grid);
    CHECK(a.bits == c.bits);
}

TEST_CASE("netlist maps on the routed chain") {
    Fixture f("mini_routed.def");
    GridSpec grid = make_grid(f.pn.core_box, f.tech.w_m1(), 1, f.pn.dbu_per_micron);
    NamedMaps maps =
        render_netlist_maps(f.pn, f.tech, f.catalog, grid, Stage::detailed_route);

    const SpatialMap* all = maps.find("cell_placement");
    const SpatialMap* comb = maps.find("cell_placement_combinational");
    const SpatialMap* seq = maps.find("cell_placement_sequential");
    REQUIRE(all);
    REQUIRE(comb);
    REQUIRE(seq);
    CHECK(all->count() > 0);
    // the chain is purely combinational
    CHECK(seq->count() == 0);
    CHECK(map_subset(*comb, *all));
    CHECK(map_subset(*seq, *all));

    // per-layer OR identity
    const SpatialMap* routing = maps.find("routing");
    REQUIRE(routing);
    std::vector<SpatialMap> layers;
    for (const LefLayer* l : f.tech.routing_layers()) {
        const SpatialMap* m = maps.find("routing_" + l->name);
        REQUIRE(m);
        layers.push_back(*m);
    }
    CHECK(layers.size() == 5);
    SpatialMap ored = or_maps(layers, "or");
    CHECK(ored.bits == routing->bits);

    // filler map exists only at the final stage
    CHECK(maps.find("cell_placement_filler") == nullptr);
    NamedMaps final_maps =
        render_netlist_maps(f.pn, f.tech, f.catalog, grid, Stage::final_stage);
    CHECK(final_maps.find("cell_placement_filler") != nullptr);

    CHECK_THROWS_AS(render_netlist_maps(f.pn, f.tech, f.catalog, grid, Stage::floorplan),
                    ValidationError);
}

TEST_CASE("per-layer map count follows the technology") {
    // ten routing layers
    std::string lef = "UNITS\n  DATABASE MICRONS 1000 ;\nEND UNITS\n";
    for (int i = 1; i <= 10; ++i)
        lef += "LAYER M" + std::to_string(i) + "\n  TYPE ROUTING ;\n  WIDTH 0.07 ;\nEND M" +
               std::to_string(i) + "\n";
    lef += "MACRO A\n  CLASS CORE ;\n  SIZE 1 BY 1 ;\nEND A\nEND LIBRARY\n";
    TechLibrary tech = parse_lef(lef);
    CellCatalog cat;
    CatalogCell cell;
    cell.name = "A";
    cell.area_um2 = 1;
    cat.cells["A"] = cell;
    PhysicalNetlist pn;
    pn.design = "x";
    pn.dbu_per_micron = 1000;
    pn.die_box = {0, 0, 7000, 7000};
    pn.core_box = pn.die_box;
    Component c;
    c.name = "u1";
    c.cell = "A";
    c.status = PlaceStatus::placed;
    pn.components.push_back(c);
    GridSpec grid = make_grid(pn.core_box, tech.w_m1(), 1, pn.dbu_per_micron);
    NamedMaps maps = render_netlist_maps(pn, tech, cat, grid, Stage::detailed_route);
    int per_layer = 0;
    for (const auto& m : maps.maps)
        if (m.name.rfind("routing_", 0) == 0) ++per_layer;
    CHECK(per_layer == 10);
}

TEST_CASE("clock maps") {
    Fixture f("seq_routed.def");
    NetlistGraphInputs gin;
    gin.netlist = &f.pn;
    gin.tech = &f.tech;
    gin.catalog = &f.catalog;
    gin.stage = Stage::detailed_route;
    NetlistGraph g = build_netlist_graph(gin);
    ClockNetworkGraph cng = extract_clock_network(g, "clk", f.catalog);
    GridSpec grid = make_grid(f.pn.core_box, f.tech.w_m1(), 1, f.pn.dbu_per_micron);

    NamedMaps clock =
        render_clock_maps(cng, g, f.pn, f.tech, f.catalog, grid, Stage::detailed_route);
    const SpatialMap* buffers = clock.find("cell_placement");
    REQUIRE(buffers);
    CHECK(buffers->count() > 0);  // one clock buffer occupies a region

    // clock sequential sinks are a subset of the netlist sequential map
    NamedMaps netlist_maps =
        render_netlist_maps(f.pn, f.tech, f.catalog, grid, Stage::detailed_route);
    const SpatialMap* sinks = clock.find("cell_placement_sequential");
    REQUIRE(sinks);
    CHECK(sinks->count() > 0);
    CHECK(map_subset(*sinks, *netlist_maps.find("cell_placement_sequential")));

    CHECK_THROWS_AS(render_clock_maps(cng, g, f.pn, f.tech, f.catalog, grid,
                                      Stage::detailed_place),
                    ValidationError);
}

TEST_CASE("pdn maps") {
    Fixture f("mini_routed.def");
    GridSpec grid = make_grid(f.pn.core_box, f.tech.w_m1(), 1, f.pn.dbu_per_micron);
    auto sources = voltage_source_points(f.pn.core_box, 5600);
    NamedMaps pdn = render_pdn_maps(f.pn, grid, sources);

    const SpatialMap* vdd = pdn.find("pdn_routing_vdd");
    const SpatialMap* vss = pdn.find("pdn_routing_vss");
    REQUIRE(vdd);
    REQUIRE(vss);
    CHECK(vdd->count() > 0);
    CHECK(vss->count() > 0);
    // straps do not overlap in the fixture
    for (size_t i = 0; i < vdd->bits.size(); ++i)
        CHECK_FALSE((vdd->bits[i] && vss->bits[i]));

    // a strap at fixed x paints full columns of the grid
    int col = int((4200 - grid.origin_x) / grid.pixel());
    for (int iy = 0; iy < grid.resolution_y; ++iy) CHECK(vdd->at(col, iy));

    const SpatialMap* src = pdn.find("voltage_source");
    REQUIRE(src);
    // sources sitting exactly on the coverage boundary land in no pixel
    size_t in_coverage = 0;
    for (const auto& pt : sources)
        if (pt.x - grid.origin_x < grid.resolution_x * grid.pixel() &&
            pt.y - grid.origin_y < grid.resolution_y * grid.pixel())
            ++in_coverage;
    CHECK(src->count() == in_coverage);
    CHECK(src->count() > 0);
    CHECK(src->at(0, 0));  // origin source

    PhysicalNetlist no_special = f.pn;
    no_special.nets.erase(
        std::remove_if(no_special.nets.begin(), no_special.nets.end(),
                       [](const DefNet& n) { return n.is_special; }),
        no_special.nets.end());
    CHECK_THROWS_AS(render_pdn_maps(no_special, grid, sources), ValidationError);
}

TEST_CASE("scalar binning") {
    GridSpec grid = make_grid({0, 0, 4000, 4000}, 1000, 1, 1000);  // 4x4 tiles of 1 um

    SECTION("one sample per tile passes through") {
        std::vector<GridSampleUm> pts;
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i)
                pts.push_back({i + 0.5, j + 0.5, double(i * 4 + j)});
        ScalarMap m = bin_samples(pts, grid, Aggregator::mean, "id");
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) CHECK(m.at(i, j) == double(i * 4 + j));
        CHECK(std::count(m.occupied.begin(), m.occupied.end(), 1) == 16);
    }
    SECTION("two samples in one tile aggregate") {
        std::vector<GridSampleUm> pts = {{0.2, 0.2, 2.0}, {0.8, 0.8, 4.0}};
        ScalarMap mean = bin_samples(pts, grid, Aggregator::mean, "m");
        CHECK(mean.at(0, 0) == 3.0);
        ScalarMap mx = bin_samples(pts, grid, Aggregator::max, "m");
        CHECK(mx.at(0, 0) == 4.0);
        CHECK(mean.occupied[0] == 1);
        CHECK(mean.occupied[1] == 0);  // empty tile keeps the mask
        CHECK(mean.at(1, 0) == 0.0);
    }
    SECTION("500 random samples match a brute-force binning oracle") {
        std::mt19937_64 rng(47);
        std::uniform_real_distribution<double> coord(0.0, 4.0);
        std::uniform_real_distribution<double> val(-10.0, 10.0);
        std::vector<GridSampleUm> pts;
        for (int i = 0; i < 500; ++i) pts.push_back({coord(rng), coord(rng), val(rng)});
        ScalarMap m = bin_samples(pts, grid, Aggregator::mean, "m");
        // oracle: accumulate per tile independently
        std::vector<double> sum(16, 0.0);
        std::vector<int> cnt(16, 0);
        for (const auto& s : pts) {
            int ix = int(std::floor(s.x_um / 1.0));
            int iy = int(std::floor(s.y_um / 1.0));
            if (ix < 0 || iy < 0 || ix > 3 || iy > 3) continue;
            sum[iy * 4 + ix] += s.value;
            cnt[iy * 4 + ix] += 1;
        }
        for (int idx = 0; idx < 16; ++idx) {
            if (cnt[idx]) {
                CHECK_THAT(m.values[idx],
                           Catch::Matchers::WithinRel(sum[idx] / cnt[idx], 1e-12));
            } else {
                CHECK(m.values[idx] == 0.0);
                CHECK(m.occupied[idx] == 0);
            }
        }
    }
    SECTION("all samples out of range is an error") {
        std::vector<GridSampleUm> pts = {{100.0, 100.0, 1.0}};
        CHECK_THROWS_AS(bin_samples(pts, grid, Aggregator::mean, "m"), ValidationError);
    }
}

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "edaschema/rudy.hpp"

using namespace eda;

namespace {

// Brute-force reference: visits every tile of the grid for every net
// and applies the documented contribution rule directly.
struct OracleMaps {
    std::vector<double> net, pin, long_r, short_r;
};

OracleMaps oracle_rudy(std::span<const RudyNetInput> nets, const GridSpec& grid) {
    const double p = grid.pixel_um();
    const double ox = dbu_to_um(grid.origin_x, grid.dbu_per_micron);
    const double oy = dbu_to_um(grid.origin_y, grid.dbu_per_micron);
    size_t n_tiles = size_t(grid.resolution_x) * grid.resolution_y;
    OracleMaps out{std::vector<double>(n_tiles, 0.0), std::vector<double>(n_tiles, 0.0),
                   std::vector<double>(n_tiles, 0.0), std::vector<double>(n_tiles, 0.0)};

    for (const auto& net : nets) {
        if (!net.has_box) continue;
        double w = std::max(net.box.width(), p);
        double h = std::max(net.box.height(), p);
        double cx = 0.5 * (net.box.x_min + net.box.x_max);
        double cy = 0.5 * (net.box.y_min + net.box.y_max);
        double bx0 = net.box.width() < p ? cx - 0.5 * p : net.box.x_min;
        double bx1 = net.box.width() < p ? cx + 0.5 * p : net.box.x_max;
        double by0 = net.box.height() < p ? cy - 0.5 * p : net.box.y_min;
        double by1 = net.box.height() < p ? cy + 0.5 * p : net.box.y_max;
        double density = (w + h) / (w * h);

        // span classification from scratch: count covered tiles
        int covered = 0;
        for (int iy = 0; iy < grid.resolution_y; ++iy)
            for (int ix = 0; ix < grid.resolution_x; ++ix) {
                double x0 = ox + ix * p, y0 = oy + iy * p;
                double ow = std::min(bx1, x0 + p) - std::max(bx0, x0);
                double oh = std::min(by1, y0 + p) - std::max(by0, y0);
                if (ow > 0 && oh > 0) ++covered;
            }
        bool is_long = covered >= 2;

        for (int iy = 0; iy < grid.resolution_y; ++iy)
            for (int ix = 0; ix < grid.resolution_x; ++ix) {
                double x0 = ox + ix * p, y0 = oy + iy * p;
                double ow = std::min(bx1, x0 + p) - std::max(bx0, x0);
                double oh = std::min(by1, y0 + p) - std::max(by0, y0);
                if (ow <= 0 || oh <= 0) continue;
                size_t idx = size_t(iy) * grid.resolution_x + ix;
                double a = ow * oh;
                out.net[idx] += density * a;
                (is_long ? out.long_r[idx] : out.short_r[idx]) += density * a;
            }

        for (const auto& [px, py] : net.pins_um) {
            int ix = int(std::floor((px - ox) / p));
            int iy = int(std::floor((py - oy) / p));
            if (ix < 0 || iy < 0 || ix >= grid.resolution_x || iy >= grid.resolution_y)
                continue;
            out.pin[size_t(iy) * grid.resolution_x + ix] += density;
        }
    }
    return out;
}

void check_close(const std::vector<double>& got, const std::vector<double>& want,
                 double rel) {
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) {
        double tol = rel * std::max({std::abs(got[i]), std::abs(want[i]), 1e-30});
        REQUIRE_THAT(got[i], Catch::Matchers::WithinAbs(want[i], tol));
    }
}

GridSpec test_grid(int res, double pixel_um = 2.0) {
    Dbu p = Dbu(pixel_um * 1000);
    return make_grid({0, 0, res * p, res * p}, p, 1, 1000);
}

}  // namespace

TEST_CASE("net density substitutions") {
    CHECK(net_density(2.0, 2.0, 1.0) == 1.0);          // (2+2)/(2*2)
    CHECK(net_density(10.0, 1.0, 0.5) == 1.1);         // (10+1)/10
    // degenerate width clamps to the pixel side
    double p = 2.0, h = 8.0;
    CHECK(net_density(0.0, h, p) == (p + h) / (p * h));  // 10/16
    CHECK(net_density(0.0, h, p) == 0.625);
}

TEST_CASE("span classification") {
    GridSpec grid = test_grid(8);  // 8x8 tiles, 2 um each

    SECTION("box inside one tile is short") {
        CHECK(classify_net_span({0.2, 0.2, 1.8, 1.8}, grid) == NetSpan::short_range);
    }
    SECTION("box crossing one tile boundary is long") {
        CHECK(classify_net_span({1.5, 0.2, 2.5, 1.8}, grid) == NetSpan::long_range);
    }
    SECTION("box exactly covering a tile is short") {
        CHECK(classify_net_span({2.0, 2.0, 4.0, 4.0}, grid) == NetSpan::short_range);
    }
    SECTION("box fully outside the grid is short") {
        CHECK(classify_net_span({100.0, 100.0, 105.0, 103.0}, grid) ==
              NetSpan::short_range);
    }
    SECTION("randomized boxes agree with a tile-enumeration oracle") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> coord(-2.0, 18.0);
        std::uniform_real_distribution<double> size(0.1, 9.0);
        for (int i = 0; i < 300; ++i) {
            double x0 = coord(rng), y0 = coord(rng);
            BoxUm box{x0, y0, x0 + size(rng), y0 + size(rng)};
            int covered = 0;
            for (int iy = 0; iy < 8; ++iy)
                for (int ix = 0; ix < 8; ++ix) {
                    double ow = std::min(box.x_max, ix * 2.0 + 2.0) -
                                std::max(box.x_min, ix * 2.0);
                    double oh = std::min(box.y_max, iy * 2.0 + 2.0) -
                                std::max(box.y_min, iy * 2.0);
                    if (ow > 0 && oh > 0) ++covered;
                }
            NetSpan expect = covered >= 2 ? NetSpan::long_range : NetSpan::short_range;
            CHECK(classify_net_span(box, grid) == expect);
        }
    }
}

TEST_CASE("single net confined to one tile") {
    GridSpec grid = test_grid(4);
    RudyNetInput net;
    net.box = {0.3, 0.3, 1.7, 1.2};
    net.has_box = true;
    net.pins_um = {{0.3, 0.3}, {1.7, 1.2}};
    RudyMaps maps = compute_rudy_maps({&net, 1}, grid);

    for (double v : maps.rudy_net_long.values) CHECK(v == 0.0);
    CHECK(maps.rudy_net_short.values == maps.rudy_net.values);
    CHECK(maps.rudy_net.at(0, 0) > 0.0);
}

TEST_CASE("net exactly covering one tile contributes twice the side") {
    double s = 2.0;
    GridSpec grid = test_grid(4, s);
    RudyNetInput net;
    net.box = {s, s, 2 * s, 2 * s};  // tile (1, 1)
    net.has_box = true;
    RudyMaps maps = compute_rudy_maps({&net, 1}, grid);
    // density (s+s)/(s*s) over overlap s^2 gives 2s
    CHECK_THAT(maps.rudy_net.at(1, 1), Catch::Matchers::WithinRel(2 * s, 1e-12));
    CHECK(maps.rudy_net.at(0, 0) == 0.0);
}

TEST_CASE("random nets match the brute-force oracle") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> coord(0.0, 16.0);
    std::uniform_real_distribution<double> size(0.0, 7.0);
    for (int trial = 0; trial < 30; ++trial) {
        GridSpec grid = test_grid(8);
        std::vector<RudyNetInput> nets(1 + rng() % 20);
        for (auto& net : nets) {
            double x0 = coord(rng), y0 = coord(rng);
            net.box = {x0, y0, x0 + size(rng), y0 + size(rng)};
            net.has_box = true;
            int n_pins = 1 + int(rng() % 5);
            for (int i = 0; i < n_pins; ++i)
                net.pins_um.emplace_back(coord(rng), coord(rng));
        }
        RudyMaps maps = compute_rudy_maps(nets, grid);
        OracleMaps oracle = oracle_rudy(nets, grid);
        check_close(maps.rudy_net.values, oracle.net, 1e-9);
        check_close(maps.rudy_pin.values, oracle.pin, 1e-9);
        check_close(maps.rudy_net_long.values, oracle.long_r, 1e-9);
        check_close(maps.rudy_net_short.values, oracle.short_r, 1e-9);
    }
}

TEST_CASE("conservation for nets fully inside the grid") {
    std::mt19937_64 rng(19);
    GridSpec grid = test_grid(10);
    const double p = grid.pixel_um();
    std::uniform_real_distribution<double> coord(p, 20.0 - p - 7.0);
    std::uniform_real_distribution<double> size(0.0, 7.0);
    for (int trial = 0; trial < 1000; ++trial) {
        RudyNetInput net;
        double x0 = coord(rng), y0 = coord(rng);
        net.box = {x0, y0, x0 + size(rng), y0 + size(rng)};
        net.has_box = true;
        RudyMaps maps = compute_rudy_maps({&net, 1}, grid);
        double total = 0.0;
        for (double v : maps.rudy_net.values) total += v;
        double w = std::max(net.box.width(), p);
        double h = std::max(net.box.height(), p);
        REQUIRE_THAT(total, Catch::Matchers::WithinRel(w + h, 1e-9));
    }
}

TEST_CASE("partition identity is exact") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> coord(-3.0, 19.0);
    std::uniform_real_distribution<double> size(0.0, 9.0);
    GridSpec grid = test_grid(8);
    std::vector<RudyNetInput> nets(25);
    for (auto& net : nets) {
        double x0 = coord(rng), y0 = coord(rng);
        net.box = {x0, y0, x0 + size(rng), y0 + size(rng)};
        net.has_box = true;
    }
    RudyMaps maps = compute_rudy_maps(nets, grid);
    for (size_t i = 0; i < maps.rudy_net.values.size(); ++i)
        REQUIRE(maps.rudy_net.values[i] ==
                maps.rudy_net_long.values[i] + maps.rudy_net_short.values[i]);
}

TEST_CASE("translation covariance by one tile") {
    GridSpec grid = test_grid(8);
    const double p = grid.pixel_um();
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> coord(2.5, 8.0);
    std::uniform_real_distribution<double> size(0.2, 4.0);
    std::vector<RudyNetInput> nets(10), shifted(10);
    for (int i = 0; i < 10; ++i) {
        double x0 = coord(rng), y0 = coord(rng), w = size(rng), h = size(rng);
        nets[i].box = {x0, y0, x0 + w, y0 + h};
        nets[i].has_box = true;
        nets[i].pins_um = {{x0, y0}, {x0 + w, y0 + h}};
        shifted[i].box = {x0 + p, y0 + p, x0 + w + p, y0 + h + p};
        shifted[i].has_box = true;
        shifted[i].pins_um = {{x0 + p, y0 + p}, {x0 + w + p, y0 + h + p}};
    }
    RudyMaps base = compute_rudy_maps(nets, grid);
    RudyMaps moved = compute_rudy_maps(shifted, grid);
    for (int iy = 1; iy < 7; ++iy)
        for (int ix = 1; ix < 7; ++ix) {
            CHECK_THAT(moved.rudy_net.at(ix, iy),
                       Catch::Matchers::WithinAbs(base.rudy_net.at(ix - 1, iy - 1), 1e-9));
            CHECK_THAT(moved.rudy_pin.at(ix, iy),
                       Catch::Matchers::WithinAbs(base.rudy_pin.at(ix - 1, iy - 1), 1e-9));
        }
}

TEST_CASE("empty net list gives all-zero maps") {
    GridSpec grid = test_grid(4);
    RudyMaps maps = compute_rudy_maps({}, grid);
    for (double v : maps.rudy_net.values) CHECK(v == 0.0);
    for (double v : maps.rudy_pin.values) CHECK(v == 0.0);
}

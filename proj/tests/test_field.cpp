#include <doctest.h>

#include <cmath>
#include <random>

#include "hystereact/field.hpp"

using namespace hystereact;

namespace {
BranchPair unit_relay() { return affine_branches(0.0, 1.0, 0.0, 0.0, 0.0, 1.0); }
} // namespace

TEST_CASE("Grid: uniform nodes on [0,1]") {
    Grid g(400);
    CHECK(g.n_nodes() == 401);
    CHECK(g.nodes.front() == 0.0);
    CHECK(g.nodes.back() == 1.0);
    CHECK(g.h == doctest::Approx(1.0 / 400).epsilon(1e-15));
    for (int i = 1; i <= 400; ++i)
        CHECK(g.x(i) - g.x(i - 1) == doctest::Approx(g.h).epsilon(1e-13));
    CHECK(g.nearest_node(0.4) == 160);
    CHECK(g.nearest_node(0.4012) == 160);
    CHECK(g.nearest_node(-3.0) == 0);
    CHECK(g.nearest_node(7.0) == 400);
    CHECK_THROWS_AS(Grid(0), std::invalid_argument);
}

TEST_CASE("check_consistent pins configs only at attained thresholds") {
    auto bp = unit_relay();
    CHECK(check_consistent({0.5, 0.5}, {1, 2}, bp).consistent);

    // At/above beta only branch 2 is evaluable; at/below alpha only branch 1.
    auto r = check_consistent({1.5}, {1}, bp);
    CHECK_FALSE(r.consistent);
    CHECK(r.first_offending_node == 0);
    CHECK(check_consistent({1.5}, {2}, bp).consistent);
    CHECK(check_consistent({-0.5}, {1}, bp).consistent);
    CHECK_FALSE(check_consistent({-0.5}, {2}, bp).consistent);

    // Exactly on a threshold is already an attainment.
    CHECK(check_consistent({0.0}, {1}, bp).consistent);
    CHECK_FALSE(check_consistent({0.0}, {2}, bp).consistent);
    CHECK(check_consistent({1.0}, {2}, bp).consistent);
    CHECK_FALSE(check_consistent({1.0}, {1}, bp).consistent);

    r = check_consistent({0.5, 0.5}, {1, 3}, bp);
    CHECK_FALSE(r.consistent);
    CHECK(r.first_offending_node == 1);
    CHECK_THROWS_AS(check_consistent({0.5}, {1, 2}, bp), std::invalid_argument);
}

TEST_CASE("init_field applies the active branch per node") {
    auto bp = cubic_branches();
    Grid grid(10);

    SUBCASE("step data: H1 left of abar inclusive, H2 right") {
        auto xi = step_config(grid, 0.4);
        std::vector<double> phi(std::size_t(grid.n_nodes()));
        for (int i = 0; i < grid.n_nodes(); ++i)
            phi[std::size_t(i)] = bp.alpha + 0.6 * (grid.x(i) - 0.4);
        auto s = init_field(phi, xi, bp);
        CHECK(s.t == 0.0);
        for (int i = 0; i < grid.n_nodes(); ++i) {
            double expect = (i <= 4) ? bp.eval1(phi[std::size_t(i)]) : bp.eval2(phi[std::size_t(i)]);
            CHECK(s.v[std::size_t(i)] == doctest::Approx(expect).epsilon(1e-14));
            CHECK(s.relays[std::size_t(i)].config == (i <= 4 ? 1 : 2));
        }
    }

    SUBCASE("phi above beta overrides the requested config") {
        std::vector<double> phi{bp.beta + 0.1, bp.beta + 0.2};
        auto s = init_field(phi, {2, 2}, bp);
        CHECK(s.relays[0].config == 2);
        CHECK(s.relays[1].config == 2);
        CHECK(s.v[0] == doctest::Approx(cubic_upper_root(phi[0])).epsilon(1e-13));
    }

    SUBCASE("phi strictly between thresholds keeps xi0") {
        std::vector<double> phi{0.0, 0.1};
        auto s = init_field(phi, {1, 1}, bp);
        CHECK(s.v[0] == doctest::Approx(-1.0).epsilon(1e-13));
        CHECK(s.v[1] == doctest::Approx(cubic_lower_root(0.1)).epsilon(1e-13));
    }

    SUBCASE("inconsistent data throws") {
        CHECK_THROWS_AS(init_field({bp.alpha - 0.1}, {2}, bp), InconsistentInitialData);
    }
}

TEST_CASE("advance_field: pointwise relay semantics") {
    auto bp = unit_relay();
    auto s = init_field({0.5, 0.5, 0.5}, {1, 1, 1}, bp);

    SUBCASE("no movement changes nothing") {
        auto s2 = advance_field(s, s.u, 0.1, bp);
        CHECK(s2.v == s.v);
        for (int i = 0; i < 3; ++i) CHECK(s2.relays[std::size_t(i)].config == 1);
        CHECK(s2.t == 0.1);
    }

    SUBCASE("single node crossing beta flips only that node") {
        auto s2 = advance_field(s, {0.5, 1.2, 0.5}, 0.1, bp);
        CHECK(s2.relays[0].config == 1);
        CHECK(s2.relays[1].config == 2);
        CHECK(s2.relays[2].config == 1);
        CHECK(s2.v[1] == 1.0);
    }

    SUBCASE("all nodes crossing alpha downward become config 1") {
        auto up = advance_field(s, {1.2, 1.2, 1.2}, 0.1, bp);
        auto down = advance_field(up, {-0.2, -0.2, -0.2}, 0.2, bp);
        for (int i = 0; i < 3; ++i) CHECK(down.relays[std::size_t(i)].config == 1);
    }

    SUBCASE("non-monotone time rejected") {
        CHECK_THROWS_AS(advance_field(s, s.u, 0.0, bp), std::invalid_argument);
    }
}

TEST_CASE("advance_field equals the scalar relay node-by-node") {
    auto bp = unit_relay();
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> val(-0.6, 1.6);
    const int n = 17;
    std::vector<double> phi(n);
    for (auto& p : phi) p = 0.2 + 0.6 * (val(rng) + 0.6) / 2.2;
    auto s = init_field(phi, SpatialConfig(n, 1), bp);

    std::vector<RelayState> scalar = s.relays;
    for (int step = 1; step <= 200; ++step) {
        std::vector<double> u(n);
        for (auto& x : u) x = val(rng);
        s = advance_field(s, u, 0.01 * step, bp);
        for (int i = 0; i < n; ++i) {
            scalar[std::size_t(i)] = update_config(scalar[std::size_t(i)], u[std::size_t(i)], bp);
            CHECK(s.relays[std::size_t(i)].config == scalar[std::size_t(i)].config);
            CHECK(s.v[std::size_t(i)] ==
                  output(scalar[std::size_t(i)], u[std::size_t(i)], bp));
        }
    }
}

TEST_CASE("advance_field reports the offending node on domain violations") {
    auto bp = cubic_branches();

    // Sweeping through a threshold always switches first, never violates.
    auto s = init_field({0.0, 0.0}, {1, 1}, bp);
    CHECK_NOTHROW(advance_field(s, {0.0, bp.beta + 0.5}, 0.1, bp));

    // A state whose relay already sits past its cutoff (a missed switch)
    // does violate, and the node index is attached.
    FieldState bad;
    bad.t = 0.0;
    bad.u = {0.0, bp.beta + 0.5};
    bad.v = {-1.0, 0.0};
    bad.relays = {RelayState{1, 0.0}, RelayState{1, bp.beta + 0.5}};
    try {
        advance_field(bad, {0.0, bp.beta + 1.0}, 0.1, bp);
        FAIL("expected DomainViolation");
    } catch (const DomainViolation& e) {
        CHECK(e.node == 1);
    }
}

TEST_CASE("step_config snaps abar to the nearest node, node on the 1 side") {
    Grid g(10);
    auto xi = step_config(g, 0.4);
    for (int i = 0; i <= 4; ++i) CHECK(xi[std::size_t(i)] == 1);
    for (int i = 5; i <= 10; ++i) CHECK(xi[std::size_t(i)] == 2);
    auto xi2 = step_config(g, 0.44); // snaps to 0.4
    CHECK(xi2 == xi);
}

TEST_CASE("snapshot_csv emits one x,u,v,config row per node") {
    auto bp = unit_relay();
    Grid g(2);
    auto s = init_field({0.5, 0.25, 0.5}, {1, 2, 1}, bp);
    CHECK(snapshot_csv(s, g) == "0,0.5,0,1\n0.5,0.25,1,2\n1,0.5,0,1\n");
}

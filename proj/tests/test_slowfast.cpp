#include <doctest.h>

#include <cmath>

#include "hystereact/slowfast.hpp"

using namespace hystereact;

namespace {

const double kFoldU = 2.0 / (3.0 * std::sqrt(3.0));
const double kFoldV = 1.0 / std::sqrt(3.0);

NullclineModel detected_cubic() {
    auto m = cubic_nullcline();
    detect_folds(m, -2.0, 2.0, 400);
    return m;
}

std::vector<double> sample(const Grid& g, const std::function<double(double)>& f) {
    std::vector<double> out(std::size_t(g.n_nodes()));
    for (int i = 0; i < g.n_nodes(); ++i) out[std::size_t(i)] = f(g.x(i));
    return out;
}

} // namespace

TEST_CASE("detect_folds on the cubic nullcline") {
    auto m = detected_cubic();
    CHECK(m.detected);
    CHECK(m.folds.alpha == doctest::Approx(-kFoldU).epsilon(1e-7));
    CHECK(m.folds.beta == doctest::Approx(kFoldU).epsilon(1e-7));
    CHECK(m.folds.alpha == doctest::Approx(-0.3849002).epsilon(1e-6));
    CHECK(m.folds.n == 2);
    // Fold A (where the upper branch ends) sits at v=+1/sqrt(3), B below.
    CHECK(m.folds.A[1] == doctest::Approx(kFoldV).epsilon(1e-7));
    CHECK(m.folds.B[1] == doctest::Approx(-kFoldV).epsilon(1e-7));
}

TEST_CASE("detect_folds: scaling g leaves the zero set alone") {
    NullclineModel m;
    m.g = [](double u, double v) { return 2.0 * (u + v - v * v * v); };
    detect_folds(m, -2.0, 2.0, 400); // finite-difference partials
    CHECK(m.folds.alpha == doctest::Approx(-kFoldU).epsilon(1e-6));
    CHECK(m.folds.beta == doctest::Approx(kFoldU).epsilon(1e-6));
    CHECK(m.folds.n == 2);
}

TEST_CASE("detect_folds rejects a monotone nullcline") {
    NullclineModel m;
    m.g = [](double u, double v) { return u + v; };
    CHECK_THROWS_AS(detect_folds(m, -1.0, 1.0, 100), FoldCountMismatch);
}

TEST_CASE("extract_branches reproduces the analytic cubic branches") {
    auto m = detected_cubic();
    auto bp = extract_branches(m, -1.5, 1.5, 240);
    CHECK(bp.sigma == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(bp.alpha == doctest::Approx(-kFoldU).epsilon(1e-9));
    CHECK(bp.beta == doctest::Approx(kFoldU).epsilon(1e-9));

    CHECK(bp.eval2(0.0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(bp.eval1(0.0) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(bp.eval2(bp.alpha) == doctest::Approx(kFoldV).epsilon(1e-8));
    CHECK(bp.eval1(bp.beta) == doctest::Approx(-kFoldV).epsilon(1e-8));

    // Against the closed-form roots across both domains.
    for (double u = bp.alpha; u <= 1.4; u += 0.01)
        CHECK(bp.eval2(u) == doctest::Approx(cubic_upper_root(u)).epsilon(5e-4));
    for (double u = -1.4; u <= bp.beta; u += 0.01)
        CHECK(bp.eval1(u) == doctest::Approx(cubic_lower_root(u)).epsilon(5e-4));

    // Residual on the nullcline and fast-flow stability (gv < 0) along
    // the tabulated branches.
    for (double u = bp.alpha + 1e-4; u <= 1.4; u += 0.01) {
        double v = bp.eval2(u);
        CHECK(std::abs(m.g(u, v)) < 1e-3);
        CHECK(m.eval_gv(u, v) < 0.0);
    }
    for (double u = -1.4; u <= bp.beta - 1e-4; u += 0.01) CHECK(m.eval_gv(u, bp.eval1(u)) < 0.0);

    // Outside the tabulated window evaluation is a domain error.
    CHECK_THROWS_AS(bp.eval2(bp.alpha - 0.01), EvaluationOutsideDomain);
    CHECK_THROWS_AS(bp.eval1(bp.beta + 0.01), EvaluationOutsideDomain);
}

TEST_CASE("orientation: the fast flow points toward the outer branches") {
    auto m = detected_cubic();
    auto bp = extract_branches(m, -1.5, 1.5, 120);
    for (double u : {0.0, 0.2, -0.2}) {
        double v2 = bp.eval2(u);
        CHECK(m.g(u, v2 - 0.05) > 0.0); // below H2 the flow pushes v up
        CHECK(m.g(u, v2 + 0.05) < 0.0); // above H2 it pushes v down
        double v1 = bp.eval1(u);
        CHECK(m.g(u, v1 - 0.05) > 0.0);
        CHECK(m.g(u, v1 + 0.05) < 0.0);
    }
}

TEST_CASE("fold_inequality_constant on idealized folds") {
    SUBCASE("G(w)=w^2, n=2: the ratio is identically 1") {
        double mval = fold_inequality_constant([](double w) { return w * w; }, 2, 0.5, 64);
        CHECK(mval == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("G(w)=w^4, n=4: the infimum is 1 toward the fold") {
        double mval = fold_inequality_constant([](double w) { return w * w * w * w; }, 4, 0.5, 64);
        CHECK(mval > 0.9);
        CHECK(mval <= 1.01);
    }
    SUBCASE("scaling G by c scales the constant by c^(1/n)") {
        double m1 = fold_inequality_constant([](double w) { return w * w; }, 2, 0.5, 32);
        double m4 = fold_inequality_constant([](double w) { return 4.0 * w * w; }, 2, 0.5, 32);
        CHECK(m4 == doctest::Approx(2.0 * m1).epsilon(1e-9));
    }
}

TEST_CASE("verify_lemma_A1 on the cubic fold") {
    auto m = detected_cubic();
    auto bp = extract_branches(m, -1.5, 1.5, 240);
    auto rep = verify_lemma_A1(bp, m, 0.0, 48);
    CHECK(rep.holds);
    CHECK(rep.m_estimate > 0.0);
    CHECK_FALSE(rep.h1_check.violated);
    CHECK_FALSE(rep.h2_check.violated);
}

TEST_CASE("verify_lemma_A1 holds for polynomial folds of order 2 and 4") {
    // S-curves u = W(v) with W'(v) = (v^2-1)^(n-1): the folds at v = +-1
    // have g_v vanishing to order n-1, i.e. fold order n.
    auto W2 = [](double v) { return v * v * v / 3.0 - v; };
    auto W4 = [](double v) {
        return std::pow(v, 7) / 7.0 - 3.0 * std::pow(v, 5) / 5.0 + v * v * v - v;
    };
    struct Case {
        int n;
        std::function<double(double)> W;
    };
    for (const auto& c : {Case{2, W2}, Case{4, W4}}) {
        NullclineModel m;
        auto W = c.W;
        m.g = [W](double u, double v) { return u - W(v); };
        detect_folds(m, -1.8, 1.8, 600);
        CHECK(m.folds.n == c.n);
        auto bp = extract_branches(m, m.folds.alpha - 1.0, m.folds.beta + 1.0, 200);
        auto rep = verify_lemma_A1(bp, m, 0.0, 40);
        CHECK(rep.holds);
    }
}

TEST_CASE("slow-fast single-node ramp switches near beta") {
    auto m = detected_cubic();
    SolverParams p;
    p.grid = Grid(1);
    p.dt = 1e-4;
    p.t_end = 0.6;
    p.save_stride = 1;

    std::vector<double> u0(2, 0.0), v0(2, -1.0); // on H1(0)
    auto f = [](double, double) { return 1.0; };  // u(t) = t exactly
    auto traj = solve_slowfast(u0, v0, m, f, 1e-3, p);
    REQUIRE(traj.status == RunStatus::Completed);

    // v hugs H1(u) before the fold and H2(u) after the transit.
    for (const auto& s : traj.snapshots) {
        if (s.u[0] < m.folds.beta - 0.05)
            CHECK(s.v[0] == doctest::Approx(cubic_lower_root(s.u[0])).epsilon(2e-2));
        if (s.u[0] > m.folds.beta + 0.1)
            CHECK(s.v[0] == doctest::Approx(cubic_upper_root(s.u[0])).epsilon(2e-2));
    }

    // First midline crossing vs the relay switch time u = beta.
    double midline = 0.5 * (m.folds.A[1] + m.folds.B[1]);
    double t_switch = -1.0;
    for (const auto& s : traj.snapshots)
        if (s.v[0] > midline) {
            t_switch = s.t;
            break;
        }
    REQUIRE(t_switch > 0.0);
    // The transit lags the static fold by the classical dynamic-fold
    // delay ~ 2.34 * 3^(-1/6) * eps^(2/3) ~ 0.02 for a unit ramp rate.
    CHECK(t_switch > m.folds.beta);
    CHECK(std::abs(t_switch - m.folds.beta) < 0.025);
}

TEST_CASE("slow-fast ramp: switch offset shrinks like eps^(2/3)") {
    auto m = detected_cubic();
    double midline = 0.5 * (m.folds.A[1] + m.folds.B[1]);
    auto offset_for = [&](double eps, double rate) {
        SolverParams p;
        p.grid = Grid(1);
        p.dt = 1e-5;
        p.t_end = 0.5 / rate;
        p.save_stride = 1;
        std::vector<double> u0(2, 0.0), v0(2, -1.0);
        auto f = [rate](double, double) { return rate; };
        auto traj = solve_slowfast(u0, v0, m, f, eps, p);
        double t_static = m.folds.beta / rate; // relay switch time of u(t)=rate*t
        for (const auto& s : traj.snapshots)
            if (s.v[0] > midline) return s.t - t_static;
        return 1e9;
    };
    // Steeper ramps shorten the fold delay (~ (eps^2/rate)^(1/3)).
    double d10 = offset_for(1e-3, 10.0);
    CHECK(d10 < 0.01);
    CHECK(d10 > 0.0);
    // And the delay decreases with eps at fixed rate.
    CHECK(offset_for(1e-4, 1.0) < offset_for(1e-3, 1.0));
}

TEST_CASE("slow-fast equilibrium: v pinned to a stable branch") {
    auto m = detected_cubic();
    SolverParams p;
    p.grid = Grid(4);
    p.dt = 1e-3;
    p.t_end = 0.2;
    p.save_stride = 1 << 20;

    std::vector<double> u0(5, 0.1), v0(5, 1.1); // slightly off H2(0.1)
    auto f = [](double, double) { return 0.0; };
    auto traj = solve_slowfast(u0, v0, m, f, 1e-3, p);
    double target = cubic_upper_root(0.1);
    for (double v : traj.snapshots.back().v) CHECK(v == doctest::Approx(target).epsilon(1e-6));
}

TEST_CASE("slow-fast with epsilon = 1 evolves smoothly") {
    auto m = detected_cubic();
    SolverParams p;
    p.grid = Grid(8);
    p.dt = 1e-3;
    p.t_end = 0.1;
    p.save_stride = 10;
    std::vector<double> u0(9, 0.0), v0(9, 0.5);
    auto traj = solve_slowfast(u0, v0, m, [](double, double v) { return v; }, 1.0, p);
    // Midway between branches, far from a relay jump: v moves but stays bounded.
    for (const auto& s : traj.snapshots)
        for (double v : s.v) {
            CHECK(std::isfinite(v));
            CHECK(std::abs(v) < 2.0);
        }
    // No fast transit: successive snapshots change v only gradually.
    for (std::size_t k = 1; k < traj.snapshots.size(); ++k)
        CHECK(std::abs(traj.snapshots[k].v[4] - traj.snapshots[k - 1].v[4]) < 0.2);
}

TEST_CASE("compare_to_hysteresis: a run against itself is exact") {
    auto bp = cubic_branches();
    auto m = detected_cubic();
    SolverParams p;
    p.grid = Grid(100);
    p.dt = 1e-4;
    p.t_end = 0.05;
    p.save_stride = 10;
    std::vector<double> phi(101);
    for (int i = 0; i <= 100; ++i) phi[std::size_t(i)] = bp.alpha + 0.6 * (p.grid.x(i) - 0.4);
    auto hyst = solve_prototype(phi, 0.4, bp, p);
    REQUIRE(hyst.status == RunStatus::Completed);

    SlowFastTrajectory mirror;
    for (const auto& s : hyst.snapshots) mirror.snapshots.push_back({s.t, s.u, s.v, 1e-3});
    auto cmp = compare_to_hysteresis(mirror, hyst, m, 0.0, 4.0 / 100);
    CHECK(cmp.sup_dev_u == 0.0);
    CHECK(cmp.sup_dev_v == 0.0);
    CHECK(cmp.max_switch_offset == 0.0);
    CHECK(cmp.switched_mismatch == 0);
}

TEST_CASE("epsilon sweep on the free-boundary problem: deviation shrinks") {
    auto bp = cubic_branches();
    auto m = detected_cubic();
    SolverParams p;
    p.grid = Grid(100);
    p.dt = 1e-4;
    p.t_end = 0.05;
    p.save_stride = 10;

    std::vector<double> phi(101);
    for (int i = 0; i <= 100; ++i) phi[std::size_t(i)] = bp.alpha + 0.6 * (p.grid.x(i) - 0.4);
    auto hyst = solve_prototype(phi, 0.4, bp, p);
    REQUIRE(hyst.status == RunStatus::Completed);

    auto xi = step_config(p.grid, 0.4);
    std::vector<double> v0(101);
    for (int i = 0; i <= 100; ++i)
        v0[std::size_t(i)] = (xi[std::size_t(i)] == 1) ? cubic_lower_root(phi[std::size_t(i)])
                                                       : cubic_upper_root(phi[std::size_t(i)]);

    double prev = -1.0;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        auto slow = solve_slowfast(phi, v0, m, [](double, double v) { return v; }, eps, p);
        auto cmp = compare_to_hysteresis(slow, hyst, m, 0.0, 4.0 * p.grid.h);
        if (prev >= 0.0) CHECK(cmp.sup_dev_u <= prev + 1e-12);
        prev = cmp.sup_dev_u;
    }
    CHECK(prev < 0.05); // at eps=1e-3 the runs are close in u
}

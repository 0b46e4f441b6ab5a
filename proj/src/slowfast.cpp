#include "hystereact/slowfast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>

namespace hystereact {

namespace {
constexpr double kFdStep = 1e-6;
constexpr double kFoldTol = 1e-7;
} // namespace

double NullclineModel::eval_gu(double u, double v) const {
    if (gu) return gu(u, v);
    return (g(u + kFdStep, v) - g(u - kFdStep, v)) / (2.0 * kFdStep);
}

double NullclineModel::eval_gv(double u, double v) const {
    if (gv) return gv(u, v);
    return (g(u, v + kFdStep) - g(u, v - kFdStep)) / (2.0 * kFdStep);
}

double NullclineModel::dv_k(double u, double v, int k, double step) const {
    if (k == 1) return eval_gv(u, v);
    // Central binomial difference, offsets j - k/2.
    double sum = 0.0, binom = 1.0;
    for (int j = 0; j <= k; ++j) {
        double sgn = ((k - j) % 2 == 0) ? 1.0 : -1.0;
        sum += sgn * binom * g(u, v + (j - k / 2.0) * step);
        binom = binom * (k - j) / (j + 1.0);
    }
    return sum / std::pow(step, k);
}

NullclineModel cubic_nullcline() {
    NullclineModel m;
    m.g = [](double u, double v) { return u + v - v * v * v; };
    m.gu = [](double, double) { return 1.0; };
    m.gv = [](double, double v) { return 1.0 - 3.0 * v * v; };
    return m;
}

namespace {

// Solve g(u, v) = 0 for u at fixed v by Newton (gu assumed nonzero).
double solve_u(const NullclineModel& m, double v, double u_guess) {
    double u = u_guess;
    for (int it = 0; it < 60; ++it) {
        double f = m.g(u, v);
        double df = m.eval_gu(u, v);
        if (df == 0.0) break;
        double du = f / df;
        u -= du;
        if (std::abs(du) < 1e-14 * std::max(1.0, std::abs(u))) return u;
    }
    if (std::abs(m.g(u, v)) < 1e-10) return u;
    throw NewtonDivergence("solve_u: Newton failed at v=" + std::to_string(v));
}

// Solve g(u, v) = 0 for v, marching from v_from in direction dir until a
// sign change brackets the root, then bisecting and polishing.
double solve_v(const NullclineModel& m, double u, double v_from, double dir, double scale) {
    double f0 = m.g(u, v_from);
    if (f0 == 0.0) return v_from;
    double step = std::max(1e-9 * scale, 1e-12);
    double v1 = v_from, f1 = f0;
    for (int it = 0; it < 80; ++it) {
        double v2 = v_from + dir * step;
        double f2 = m.g(u, v2);
        if (f1 * f2 <= 0.0) {
            // Bisect [v1, v2], then Newton polish.
            double a = v1, b = v2, fa = f1;
            for (int k = 0; k < 200; ++k) {
                double mid = 0.5 * (a + b);
                double fm = m.g(u, mid);
                if (fm == 0.0 || 0.5 * std::abs(b - a) < 1e-15 * std::max(1.0, std::abs(mid))) {
                    a = b = mid;
                    break;
                }
                if (fa * fm <= 0.0) {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            double v = 0.5 * (a + b);
            for (int k = 0; k < 4; ++k) {
                double df = m.eval_gv(u, v);
                if (df == 0.0) break;
                v -= m.g(u, v) / df;
            }
            return v;
        }
        v1 = v2;
        f1 = f2;
        step *= 2.0;
    }
    throw ContinuationStall("solve_v: no bracket for u=" + std::to_string(u));
}

} // namespace

void detect_folds(NullclineModel& model, double v_lo, double v_hi, int samples) {
    if (samples < 8) throw std::invalid_argument("detect_folds: need at least 8 samples");
    if (!(v_lo < v_hi)) throw std::invalid_argument("detect_folds: empty v_range");

    auto dudv = [&](double v, double u_guess) {
        double u = solve_u(model, v, u_guess);
        return std::pair<double, double>{-model.eval_gv(u, v) / model.eval_gu(u, v), u};
    };

    std::vector<double> vs(static_cast<std::size_t>(samples)), ds(static_cast<std::size_t>(samples));
    double u_guess = 0.0;
    for (int i = 0; i < samples; ++i) {
        double v = v_lo + (v_hi - v_lo) * i / (samples - 1);
        auto [d, u] = dudv(v, u_guess);
        vs[std::size_t(i)] = v;
        ds[std::size_t(i)] = d;
        u_guess = u;
    }

    std::vector<std::array<double, 2>> folds; // (u, v) at each fold
    for (int i = 0; i + 1 < samples; ++i) {
        if (!(ds[std::size_t(i)] * ds[std::size_t(i + 1)] < 0.0)) continue;
        double a = vs[std::size_t(i)], b = vs[std::size_t(i + 1)];
        double da = ds[std::size_t(i)];
        double ug = solve_u(model, a, 0.0);
        while (b - a > 1e-12) {
            double mid = 0.5 * (a + b);
            auto [dm, um] = dudv(mid, ug);
            ug = um;
            if (da * dm <= 0.0) {
                b = mid;
            } else {
                a = mid;
                da = dm;
            }
        }
        double vf = 0.5 * (a + b);
        double uf = solve_u(model, vf, ug);
        folds.push_back({uf, vf});
    }
    if (folds.size() != 2)
        throw FoldCountMismatch("detect_folds: expected 2 folds, found " +
                                std::to_string(folds.size()));

    if (folds[0][0] > folds[1][0]) std::swap(folds[0], folds[1]);
    model.folds.alpha = folds[0][0];
    model.folds.beta = folds[1][0];
    model.folds.A = folds[0]; // fold where H2 terminates
    model.folds.B = folds[1]; // fold where H1 terminates

    // Fold order: first v-derivative beyond the (vanishing) first that is
    // clearly nonzero at the fold. Below the true order the difference
    // quotient is pure truncation, O(step^(n-k)), so halving the step must
    // not shrink a genuine derivative.
    // Only even orders: a fold needs an odd-order zero of du/dv, so an
    // odd reading can only come from the finite-precision fold location.
    double step = 1e-3 * (model.folds.beta - model.folds.alpha);
    int n = 0;
    for (int k = 2; k <= 8; k += 2) {
        double dA = model.dv_k(model.folds.A[0], model.folds.A[1], k, step);
        double dB = model.dv_k(model.folds.B[0], model.folds.B[1], k, step);
        double dA2 = model.dv_k(model.folds.A[0], model.folds.A[1], k, 0.5 * step);
        double dB2 = model.dv_k(model.folds.B[0], model.folds.B[1], k, 0.5 * step);
        bool nonzero = std::abs(dA) > kFoldTol && std::abs(dB) > kFoldTol;
        bool stable = std::abs(dA2) > 0.5 * std::abs(dA) && std::abs(dB2) > 0.5 * std::abs(dB);
        if (nonzero && stable) {
            n = k;
            break;
        }
    }
    if (n == 0) throw FoldCountMismatch("detect_folds: fold order not detected up to 8");
    model.folds.n = n;

    for (const auto& f : folds)
        if (!(std::abs(model.eval_gu(f[0], f[1])) > kFoldTol))
            throw FoldCountMismatch("detect_folds: gu vanishes at a fold");

    model.detected = true;
}

namespace {

// Direction (in v) in which the stable outer branch leaves the fold:
// away from the other fold's ordinate, since the middle branch is the
// arc connecting the two fold ordinates. Purely geometric, so it stays
// robust when g is only known through noisy finite differences.
double branch_direction(const NullclineModel& m, const std::array<double, 2>& fold) {
    const auto& other = (fold[1] == m.folds.A[1] && fold[0] == m.folds.A[0]) ? m.folds.B
                                                                             : m.folds.A;
    return (fold[1] > other[1]) ? +1.0 : -1.0;
}

std::vector<double> geometric_offsets(double range, int count) {
    // Distances from the fold, clustered with ratio 0.9 toward it.
    std::vector<double> d(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j)
        d[std::size_t(j)] = range * std::pow(0.9, count - 1 - j);
    return d;
}

} // namespace

BranchPair extract_branches(const NullclineModel& model, double u_lo, double u_hi,
                            int resolution) {
    if (!model.detected) throw std::logic_error("extract_branches: folds not detected");
    if (resolution < 8) throw std::invalid_argument("extract_branches: resolution too small");
    const double alpha = model.folds.alpha, beta = model.folds.beta;
    if (!(u_lo < alpha && u_hi > beta))
        throw std::invalid_argument("extract_branches: u_range must contain [alpha, beta]");

    const double v_scale = std::abs(model.folds.A[1] - model.folds.B[1]) + 1e-12;

    // H2 on [alpha, u_hi], continued from fold A.
    double dir2 = branch_direction(model, model.folds.A);
    std::vector<double> x2{alpha}, y2{model.folds.A[1]};
    {
        double v_prev = model.folds.A[1];
        for (double d : geometric_offsets(u_hi - alpha, resolution)) {
            double u = alpha + d;
            double v = solve_v(model, u, v_prev, dir2, v_scale);
            x2.push_back(u);
            y2.push_back(v);
            v_prev = v;
        }
    }

    // H1 on [u_lo, beta], continued from fold B toward smaller u.
    double dir1 = branch_direction(model, model.folds.B);
    std::vector<double> x1{beta}, y1{model.folds.B[1]};
    {
        double v_prev = model.folds.B[1];
        for (double d : geometric_offsets(beta - u_lo, resolution)) {
            double u = beta - d;
            double v = solve_v(model, u, v_prev, dir1, v_scale);
            x1.push_back(u);
            y1.push_back(v);
            v_prev = v;
        }
    }
    std::reverse(x1.begin(), x1.end());
    std::reverse(y1.begin(), y1.end());

    auto t1 = std::make_shared<TabulatedBranch>(std::move(x1), std::move(y1));
    auto t2 = std::make_shared<TabulatedBranch>(std::move(x2), std::move(y2));

    BranchPair bp;
    bp.alpha = alpha;
    bp.beta = beta;
    bp.sigma = double(model.folds.n - 1) / model.folds.n;
    bp.h1 = [t1](double u) { return (*t1)(u); };
    bp.h2 = [t2](double u) { return (*t2)(u); };
    return bp;
}

double fold_inequality_constant(const std::function<double(double)>& G, int n, double eps0,
                                int samples) {
    if (samples < 2) throw std::invalid_argument("fold_inequality_constant: samples >= 2");
    const double p = double(n - 1) / n;
    std::vector<double> w(static_cast<std::size_t>(samples)), Gw(static_cast<std::size_t>(samples));
    double ratio = std::pow(1e-6, 1.0 / (samples - 1));
    for (int i = 0; i < samples; ++i) {
        w[std::size_t(i)] = eps0 * std::pow(ratio, i);
        Gw[std::size_t(i)] = G(w[std::size_t(i)]);
    }
    // G values below the resolution floor are dominated by the
    // uncertainty of the numerically located fold (G is a high-order
    // contact there) and carry no information about the inequality.
    double g_max = 0.0;
    for (double v : Gw) g_max = std::max(g_max, std::abs(v));
    const double g_floor = 1e-10 * g_max;

    double m_best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        for (int j = i + 1; j < samples; ++j) {
            double dw = w[std::size_t(i)] - w[std::size_t(j)];
            if (dw == 0.0) continue; // degenerate pair
            if (Gw[std::size_t(i)] <= g_floor || Gw[std::size_t(j)] <= g_floor) continue;
            double lhs = (Gw[std::size_t(i)] - Gw[std::size_t(j)]) / dw;
            double rhs = std::pow(Gw[std::size_t(i)], p) + std::pow(Gw[std::size_t(j)], p);
            if (rhs <= 0.0) continue;
            m_best = std::min(m_best, lhs / rhs);
        }
    }
    return std::isfinite(m_best) ? m_best : 0.0;
}

LemmaA1Report verify_lemma_A1(const BranchPair& branches, const NullclineModel& model,
                              double eps0, int samples) {
    if (!model.detected) throw std::logic_error("verify_lemma_A1: folds not detected");
    if (eps0 <= 0.0) eps0 = 0.1 * (model.folds.beta - model.folds.alpha);

    // The proof substitution: G(w) is the u-distance from alpha of the
    // branch point at v-distance w from the fold ordinate.
    double dir = branch_direction(model, model.folds.A);
    auto G = [&](double w) {
        double u = solve_u(model, model.folds.A[1] + dir * w, model.folds.alpha);
        return u - model.folds.alpha;
    };

    LemmaA1Report rep;
    rep.m_estimate = fold_inequality_constant(G, model.folds.n, eps0, samples);

    double sigma = double(model.folds.n - 1) / model.folds.n;
    double U1 = branches.beta; // sampling bound for Condition-style domains
    double U2 = std::max(std::abs(branches.alpha), std::abs(branches.beta)) + 0.5;
    rep.h1_check = verify_branch_condition(branches.h1, branches.beta, CutoffSide::UpperBeta,
                                           sigma, U1 > 0 ? U1 : 0.5, 48);
    rep.h2_check = verify_branch_condition(branches.h2, branches.alpha, CutoffSide::LowerAlpha,
                                           sigma, U2, 48);
    rep.holds = rep.m_estimate > 0.0 && !rep.h1_check.violated && !rep.h2_check.violated;
    return rep;
}

SlowFastTrajectory solve_slowfast(const std::vector<double>& phi_u,
                                  const std::vector<double>& phi_v,
                                  const NullclineModel& model, const Fn2& f, double epsilon,
                                  const SolverParams& params) {
    params.validate();
    if (!(epsilon > 0.0)) throw std::invalid_argument("solve_slowfast: epsilon must be positive");
    if (phi_u.size() != phi_v.size() || int(phi_u.size()) != params.grid.n_nodes())
        throw GridMismatch("solve_slowfast: initial data not conformal with grid");

    HeatStepper stepper(params, constant_branches(-1.0, 1.0, 0.0, 0.0));

    // Backward-Euler update of eps (v+ - v) = dt g(u+, v+) at one node.
    auto relax_v = [&](double u_new, double v_old, double dt) {
        auto newton = [&](double v0, double v_prev, double dt_sub) {
            double v = v0;
            for (int it = 0; it < 50; ++it) {
                double F = epsilon * (v - v_prev) - dt_sub * model.g(u_new, v);
                double dF = epsilon - dt_sub * model.eval_gv(u_new, v);
                if (dF == 0.0) break;
                double dv = F / dF;
                v -= dv;
                if (std::abs(dv) < 1e-12 * std::max(1.0, std::abs(v))) return std::optional<double>(v);
            }
            return std::optional<double>();
        };
        if (auto v = newton(v_old, v_old, dt)) return *v;
        // Stiff transit: substep the relaxation.
        double v = v_old;
        for (int s = 0; s < 10; ++s) {
            auto vn = newton(v, v, dt / 10.0);
            if (!vn) throw NewtonDivergence("slow-fast v-update diverged");
            v = *vn;
        }
        return v;
    };

    SlowFastTrajectory traj;
    SlowFastState state{0.0, phi_u, phi_v, epsilon};
    traj.snapshots.push_back(state);

    const std::size_t n = phi_u.size();
    const long n_steps = std::lround(params.t_end / params.dt);
    std::vector<double> source(n);
    for (long k = 1; k <= n_steps; ++k) {
        for (std::size_t i = 0; i < n; ++i) source[i] = f(state.u[i], state.v[i]);
        std::vector<double> u_new = stepper.diffuse(state.u, source, params.dt);
        for (std::size_t i = 0; i < n; ++i) {
            try {
                state.v[i] = relax_v(u_new[i], state.v[i], params.dt);
            } catch (const NewtonDivergence& e) {
                throw NewtonDivergence(std::string(e.what()) + " at node " + std::to_string(i) +
                                       ", t=" + std::to_string(state.t + params.dt));
            }
        }
        state.u = std::move(u_new);
        state.t += params.dt;
        if (k % params.save_stride == 0 || k == n_steps) traj.snapshots.push_back(state);
    }
    return traj;
}

SlowFastComparison compare_to_hysteresis(const SlowFastTrajectory& slow,
                                         const Trajectory& hyst, const NullclineModel& model,
                                         double burn_in, double tube_r) {
    if (slow.snapshots.empty() || hyst.snapshots.empty())
        throw WindowEmpty("compare_to_hysteresis: empty trajectory");
    if (slow.snapshots.size() != hyst.snapshots.size() ||
        slow.snapshots[0].u.size() != hyst.snapshots[0].u.size())
        throw GridMismatch("compare_to_hysteresis: runs not aligned");

    const std::size_t n = slow.snapshots[0].u.size();
    const double h = 1.0 / double(n - 1);
    const double midline = 0.5 * (model.folds.A[1] + model.folds.B[1]);

    SlowFastComparison cmp;
    std::vector<double> t_slow(n, -1.0), t_hyst(n, -1.0);
    std::vector<int> side_slow(n, 0), side_hyst(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        side_slow[i] = slow.snapshots[0].v[i] > midline ? 1 : -1;
        side_hyst[i] = hyst.snapshots[0].v[i] > midline ? 1 : -1;
    }

    for (std::size_t k = 0; k < slow.snapshots.size(); ++k) {
        const SlowFastState& ss = slow.snapshots[k];
        const FieldState& hs = hyst.snapshots[k];
        if (std::abs(ss.t - hs.t) > 1e-12)
            throw GridMismatch("compare_to_hysteresis: save times differ");
        double b = hyst.track ? hyst.track->b_at(hs.t)
                              : std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < n; ++i) {
            double x = double(i) * h;
            if (ss.t >= burn_in) {
                cmp.sup_dev_u = std::max(cmp.sup_dev_u, std::abs(ss.u[i] - hs.u[i]));
                bool in_tube = hyst.track && std::abs(x - b) <= tube_r;
                if (!in_tube)
                    cmp.sup_dev_v = std::max(cmp.sup_dev_v, std::abs(ss.v[i] - hs.v[i]));
            }
            int s1 = ss.v[i] > midline ? 1 : -1;
            int s2 = hs.v[i] > midline ? 1 : -1;
            if (t_slow[i] < 0.0 && s1 != side_slow[i]) t_slow[i] = ss.t;
            if (t_hyst[i] < 0.0 && s2 != side_hyst[i]) t_hyst[i] = hs.t;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        bool a = t_slow[i] >= 0.0, b = t_hyst[i] >= 0.0;
        if (a && b) {
            ++cmp.switched_both;
            cmp.max_switch_offset = std::max(cmp.max_switch_offset,
                                             std::abs(t_slow[i] - t_hyst[i]));
        } else if (a != b) {
            ++cmp.switched_mismatch;
        }
    }
    return cmp;
}

} // namespace hystereact

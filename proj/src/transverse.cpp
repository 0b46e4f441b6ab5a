#include "hystereact/transverse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hystereact/csv.hpp"

namespace hystereact {

double FreeBoundaryTrack::b_at(double t) const {
    if (times.empty()) throw std::logic_error("FreeBoundaryTrack: empty");
    double b = b_values.front();
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] > t + 1e-15) break;
        b = b_values[i];
    }
    return b;
}

std::string FreeBoundaryTrack::csv() const {
    std::string out = "t,a,b,status\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        out += fmt(times[i]);
        out += ',';
        out += fmt(a_values[i]);
        out += ',';
        out += fmt(b_values[i]);
        out += ',';
        out += transverse[i] ? "transverse" : "lost";
        out += '\n';
    }
    return out;
}

namespace {

// Centered slope, one-sided at the ends.
double slope_at(const std::vector<double>& phi, int i, const Grid& grid) {
    const int n = grid.n_nodes();
    if (i == 0) return (phi[1] - phi[0]) / grid.h;
    if (i == n - 1) return (phi[std::size_t(n - 1)] - phi[std::size_t(n - 2)]) / grid.h;
    return (phi[std::size_t(i + 1)] - phi[std::size_t(i - 1)]) / (2.0 * grid.h);
}

// Number of roots of f = level on the node range [lo, hi], counting sign
// changes and exact touches once.
int count_level_roots(const std::vector<double>& f, double level, int lo, int hi) {
    int count = 0;
    bool prev_zero = false;
    for (int i = lo; i <= hi; ++i) {
        double d = f[std::size_t(i)] - level;
        if (d == 0.0) {
            if (!prev_zero) ++count;
            prev_zero = true;
            continue;
        }
        if (i > lo && !prev_zero) {
            double d0 = f[std::size_t(i - 1)] - level;
            if (d0 * d < 0.0) ++count;
        }
        prev_zero = false;
    }
    return count;
}

} // namespace

TransverseCheck check_transverse(const std::vector<double>& phi, const SpatialConfig& xi,
                                 const BranchPair& branches, const Grid& grid,
                                 double slope_tol, int r_nb_cells) {
    if (phi.size() != xi.size() || int(phi.size()) != grid.n_nodes())
        throw std::invalid_argument("check_transverse: arrays not conformal");
    auto cons = check_consistent(phi, xi, branches);
    if (!cons.consistent)
        return {false, "inconsistent at node " + std::to_string(cons.first_offending_node), 0.0};

    const int n = grid.n_nodes();
    const double touch_tol = grid.h; // h-scaled threshold-contact tolerance
    auto flat_contact_needs = [&](double level, int required) -> TransverseCheck {
        for (int i = 0; i < n; ++i) {
            if (std::abs(phi[std::size_t(i)] - level) > touch_tol) continue;
            if (std::abs(slope_at(phi, i, grid)) >= slope_tol) continue;
            for (int j = std::max(0, i - r_nb_cells); j <= std::min(n - 1, i + r_nb_cells); ++j)
                if (xi[std::size_t(j)] != required)
                    return {false,
                            "flat contact with threshold at node " + std::to_string(i) +
                                " but configuration " + std::to_string(xi[std::size_t(j)]) +
                                " at node " + std::to_string(j),
                            0.0};
        }
        return {true, "", 0.0};
    };

    auto at_alpha = flat_contact_needs(branches.alpha, 1);
    if (!at_alpha.ok) return at_alpha;
    return flat_contact_needs(branches.beta, 2);
}

TransverseCheck check_prototype(const std::vector<double>& phi, const SpatialConfig& xi0,
                                double abar, const BranchPair& branches, const Grid& grid) {
    if (phi.size() != xi0.size() || int(phi.size()) != grid.n_nodes())
        throw std::invalid_argument("check_prototype: arrays not conformal");
    const int ia = grid.nearest_node(abar);
    const int n = grid.n_nodes();

    // Item 1: the step configuration at abar.
    for (int i = 0; i < n; ++i) {
        int want = (i <= ia) ? 1 : 2;
        if (xi0[std::size_t(i)] != want)
            return {false, "configuration is not the step at abar (node " + std::to_string(i) + ")",
                    0.0};
    }

    // Item 2: phi = beta has no roots on [0, abar].
    if (count_level_roots(phi, branches.beta, 0, ia) != 0)
        return {false, "phi = beta has a root on [0, abar]", 0.0};

    // Item 3: the unique alpha-root on [abar, 1] sits at abar (within one
    // cell, so data whose root falls between nodes is admitted).
    auto root = locate_alpha_root(phi, branches.alpha, grid.x(ia) - grid.h, grid);
    if (!root) return {false, "phi = alpha has no unique root on [abar, 1]", 0.0};
    if (std::abs(*root - grid.x(ia)) > grid.h + 1e-12)
        return {false, "the alpha-root of phi is not at abar", 0.0};

    // Item 4: positive slope at abar.
    double slope = slope_at(phi, ia, grid);
    if (!(slope > 0.0)) return {false, "phi'(abar) is not positive", 0.0};
    return {true, "", slope / 2.0};
}

double compute_delta(const std::vector<double>& phi, double abar, double phibar,
                     const Grid& grid) {
    const int ia = grid.nearest_node(abar);
    const double cap = std::min(abar, 1.0 - abar) / 2.0;
    int best = 0;
    for (int k = 1;; ++k) {
        if (k * grid.h > cap) break;
        int lo = ia - k, hi = ia + k;
        if (lo < 0 || hi > grid.n_cells) break;
        bool ok = true;
        for (int i = lo; i <= hi && ok; ++i)
            if (slope_at(phi, i, grid) < phibar) ok = false;
        if (!ok) break;
        best = k;
    }
    return best * grid.h;
}

std::optional<double> locate_alpha_root(const std::vector<double>& u, double alpha,
                                        double x_lo, const Grid& grid) {
    const int n = grid.n_nodes();
    int start = std::max(0, int(std::ceil((x_lo - 1e-12) / grid.h)));
    std::vector<double> roots;
    bool prev_zero = false;
    for (int i = start; i < n; ++i) {
        double d = u[std::size_t(i)] - alpha;
        if (d == 0.0) {
            if (!prev_zero) roots.push_back(grid.x(i));
            prev_zero = true;
            continue;
        }
        if (i > start && !prev_zero) {
            double d0 = u[std::size_t(i - 1)] - alpha;
            if (d0 * d < 0.0)
                roots.push_back(grid.x(i - 1) + grid.h * d0 / (d0 - d));
        }
        prev_zero = false;
    }
    if (roots.size() != 1) return std::nullopt;
    return roots[0];
}

std::optional<double> locate_a(const FieldState& state, FreeBoundaryTrack& track,
                               const BranchPair& branches, const Grid& grid) {
    auto root = locate_alpha_root(state.u, branches.alpha, track.abar - track.delta, grid);
    track.times.push_back(state.t);
    if (!root) {
        track.a_values.push_back(track.a_values.empty() ? track.abar : track.a_values.back());
        track.b_values.push_back(track.b_values.empty() ? track.abar : track.b_values.back());
        track.transverse.push_back(false);
        return std::nullopt;
    }
    track.a_values.push_back(*root);
    double b = *root;
    for (double a : track.a_values) b = std::max(b, a); // eq-style running max
    track.b_values.push_back(b);
    track.transverse.push_back(true);
    return root;
}

std::vector<double> hysteresis_from_free_boundary(const FieldState& state, double b,
                                                  const BranchPair& branches, const Grid& grid) {
    std::vector<double> v(state.n_nodes());
    for (int i = 0; i < grid.n_nodes(); ++i) {
        double u = state.u[std::size_t(i)];
        if (grid.x(i) <= b) {
            if (u > branches.beta + kOvershootTol)
                throw DomainViolation("u > beta left of the free boundary at node " +
                                      std::to_string(i));
            v[std::size_t(i)] = branches.eval1(u, kOvershootTol);
        } else {
            if (u < branches.alpha - kOvershootTol)
                throw DomainViolation("u < alpha right of the free boundary at node " +
                                      std::to_string(i));
            v[std::size_t(i)] = branches.eval2(u, kOvershootTol);
        }
    }
    return v;
}

LemmaBReport check_lemma_b_estimate(const Trajectory& traj1, const Trajectory& traj2,
                                    double slack) {
    if (!traj1.track || !traj2.track)
        throw std::invalid_argument("check_lemma_b_estimate: trajectories carry no track");
    const FreeBoundaryTrack& tr1 = *traj1.track;
    const FreeBoundaryTrack& tr2 = *traj2.track;
    if (tr1.phibar <= 0.0) throw std::invalid_argument("check_lemma_b_estimate: phibar <= 0");

    LemmaBReport rep;
    std::size_t m = std::min(traj1.snapshots.size(), traj2.snapshots.size());
    if (m == 0) throw WindowEmpty("no common save times");
    for (std::size_t k = 0; k < m; ++k) {
        const FieldState& s1 = traj1.snapshots[k];
        const FieldState& s2 = traj2.snapshots[k];
        if (s1.n_nodes() != s2.n_nodes())
            throw GridMismatch("check_lemma_b_estimate: different grids");
        if (std::abs(s1.t - s2.t) > 1e-12)
            throw WindowEmpty("save times of the two runs do not line up");
        for (std::size_t i = 0; i < s1.n_nodes(); ++i)
            rep.rhs = std::max(rep.rhs, std::abs(s1.u[i] - s2.u[i]));
        rep.lhs = std::max(rep.lhs, std::abs(tr1.b_at(s1.t) - tr2.b_at(s2.t)));
    }
    rep.rhs /= tr1.phibar;
    rep.holds = rep.lhs <= rep.rhs * (1.0 + slack) + 1e-15;
    return rep;
}

FreeBoundaryMonitor::FreeBoundaryMonitor(const std::vector<double>& phi, double abar,
                                         double phibar, const BranchPair& branches,
                                         const Grid& grid)
    : track_(std::make_shared<FreeBoundaryTrack>()), branches_(branches), grid_(grid) {
    track_->abar = grid.x(grid.nearest_node(abar));
    track_->phibar = phibar;
    track_->delta = compute_delta(phi, abar, phibar, grid);
}

bool FreeBoundaryMonitor::on_state(const FieldState& state) {
    auto a = locate_a(state, *track_, branches_, grid_);
    if (!a) return false;

    // Grid-scale slack below abar admits data whose root sits between
    // nodes (perturbation studies); the continuum statement is b >= abar.
    double b = track_->b_values.back();
    if (b < track_->abar - grid_.h - 1e-12 || b > track_->abar + track_->delta + 1e-12) {
        track_->transverse.back() = false;
        return false;
    }

    // Slope condition on the delta-neighborhood.
    int lo = grid_.nearest_node(track_->abar - track_->delta);
    int hi = grid_.nearest_node(track_->abar + track_->delta);
    for (int i = lo; i <= hi; ++i) {
        if (slope_at(state.u, i, grid_) < track_->phibar - 1e-12) {
            track_->transverse.back() = false;
            return false;
        }
    }

    // No beta-root left of the free boundary.
    int ib = std::min(grid_.n_cells, int(std::floor(b / grid_.h + 1e-12)));
    if (count_level_roots(state.u, branches_.beta, 0, ib) != 0) {
        track_->transverse.back() = false;
        return false;
    }
    return true;
}

Trajectory solve_prototype(const std::vector<double>& phi, double abar,
                           const BranchPair& branches, const SolverParams& params) {
    SpatialConfig xi0 = step_config(params.grid, abar);
    auto check = check_prototype(phi, xi0, abar, branches, params.grid);
    if (!check.ok) throw InconsistentInitialData("prototype data rejected: " + check.reason);

    FreeBoundaryMonitor monitor(phi, abar, check.phibar, branches, params.grid);
    Trajectory traj = solve(phi, xi0, branches, params, {&monitor});
    traj.track = monitor.shared_track();
    return traj;
}

} // namespace hystereact

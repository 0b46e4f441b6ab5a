#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hystereact/pde.hpp"

namespace hystereact {

// Time series of the free boundary: a(t) is the alpha-level root of u
// right of abar-delta, b(t) its running maximum. phibar = phi'(abar)/2
// is the guaranteed slope near the boundary while the run stays
// transverse.
struct FreeBoundaryTrack {
    double abar = 0.0;
    double delta = 0.0;
    double phibar = 0.0;
    std::vector<double> times;
    std::vector<double> a_values;
    std::vector<double> b_values;
    std::vector<bool> transverse; // status per time (false = lost)

    double b_at(double t) const; // value at the latest recorded time <= t
    std::string csv() const;     // rows "t,a,b,status"
};

struct TransverseCheck {
    bool ok = false;
    std::string reason;
    double phibar = 0.0; // set by check_prototype on success
};

// Definition-style transversality of initial data: wherever phi touches
// a threshold with (numerically) zero slope, the configuration must
// already match the branch that threshold activates, on a neighborhood
// of radius r_nb.
TransverseCheck check_transverse(const std::vector<double>& phi, const SpatialConfig& xi,
                                 const BranchPair& branches, const Grid& grid,
                                 double slope_tol = 1e-6, int r_nb_cells = 2);

// The prototype step data: xi0 = 1 up to abar and 2 past it, phi < beta
// left of abar, the unique alpha-root of phi on [abar,1] at abar, and
// positive slope there. Returns phibar = phi'(abar)/2 on success.
TransverseCheck check_prototype(const std::vector<double>& phi, const SpatialConfig& xi0,
                                double abar, const BranchPair& branches, const Grid& grid);

// Largest grid-aligned radius around abar on which phi' >= phibar,
// capped at min(abar, 1-abar)/2.
double compute_delta(const std::vector<double>& phi, double abar, double phibar,
                     const Grid& grid);

// Unique sign change of u-alpha on [abar-delta, 1], linearly
// interpolated within the bracketing cell. nullopt when the root is
// missing or not unique (transversality failure, not a crash).
std::optional<double> locate_alpha_root(const std::vector<double>& u, double alpha,
                                        double x_lo, const Grid& grid);

// Appends one time level to the track; flips its status to lost on a
// root failure. Returns the located a(t) when transverse.
std::optional<double> locate_a(const FieldState& state, FreeBoundaryTrack& track,
                               const BranchPair& branches, const Grid& grid);

// Free-boundary representation of the hysteresis: H1 left of b
// (inclusive), H2 right of it.
std::vector<double> hysteresis_from_free_boundary(const FieldState& state, double b,
                                                  const BranchPair& branches, const Grid& grid);

struct LemmaBReport {
    double lhs = 0.0; // max_t |b - b^|
    double rhs = 0.0; // (1/phibar) * max_{x,t} |u - u^|
    bool holds = false;
};

// Checks ||b - b^|| <= (1/phibar) ||u - u^|| over the common save times
// of two transverse runs, with a discretization slack.
LemmaBReport check_lemma_b_estimate(const Trajectory& traj1, const Trajectory& traj2,
                                    double slack = 0.1);

// Solver monitor combining the transversality guards: the slope
// condition u_x >= phibar on [abar-delta, abar+delta], uniqueness of the
// alpha-root, b staying inside [abar, abar+delta], and absence of
// beta-roots on [0, b]. Maintains the free-boundary track.
class FreeBoundaryMonitor : public Monitor {
public:
    FreeBoundaryMonitor(const std::vector<double>& phi, double abar, double phibar,
                        const BranchPair& branches, const Grid& grid);

    bool on_state(const FieldState& state) override;
    std::string name() const override { return "free_boundary"; }

    const FreeBoundaryTrack& track() const { return *track_; }
    std::shared_ptr<const FreeBoundaryTrack> shared_track() const { return track_; }

private:
    std::shared_ptr<FreeBoundaryTrack> track_;
    BranchPair branches_;
    Grid grid_;
};

// Prototype-problem driver: validates Condition-style data, wires the
// monitor, runs the solver, and attaches the track to the trajectory.
Trajectory solve_prototype(const std::vector<double>& phi, double abar,
                           const BranchPair& branches, const SolverParams& params);

} // namespace hystereact

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hystereact/field.hpp"

namespace hystereact {

struct FreeBoundaryTrack; // transverse.hpp

enum class OvershootPolicy { Halt, Subdivide };

enum class RunStatus { Completed, TransversalityLost, DomainViolationHalt };

std::string to_string(RunStatus s);

struct SolverParams {
    Grid grid;
    double dt = 1e-4;
    double t_end = 0.05;
    double theta = 0.5; // 1/2 = Crank-Nicolson, 1 = backward Euler
    OvershootPolicy overshoot_policy = OvershootPolicy::Halt;
    int save_stride = 1; // snapshots every k-th step

    void validate() const;
};

struct Trajectory {
    std::vector<FieldState> snapshots;
    RunStatus status = RunStatus::Completed;
    SolverParams params;
    double wall_seconds = 0.0;
    std::shared_ptr<const FreeBoundaryTrack> track; // set when a boundary monitor ran
};

// Per-step callback run inside the solver loop (also on the initial
// state). Returning false stops the run with TransversalityLost.
struct Monitor {
    virtual ~Monitor() = default;
    virtual bool on_state(const FieldState& state) = 0;
    virtual std::string name() const = 0;
};

// One theta-weighted IMEX step of u_t = u_xx + v with homogeneous
// Neumann conditions: diffusion implicit, relay source explicit at the
// old time, relays updated afterwards. Owns the tridiagonal
// factorization, so reuse one stepper per run.
class HeatStepper {
public:
    HeatStepper(const SolverParams& params, BranchPair branches);

    FieldState step(const FieldState& state) const;

    // Diffusion-only update (no relays, v given explicitly); used by the
    // kernel check and the slow-fast solver.
    std::vector<double> diffuse(const std::vector<double>& u, const std::vector<double>& source,
                                double dt) const;

private:
    FieldState step_with_dt(const FieldState& state, double dt, int depth) const;

    SolverParams params_;
    BranchPair branches_;
};

FieldState step(const FieldState& state, const SolverParams& params, const BranchPair& branches);

Trajectory solve(const std::vector<double>& phi, const SpatialConfig& xi0,
                 const BranchPair& branches, const SolverParams& params,
                 const std::vector<Monitor*>& monitors = {});

// Remark-style reduction of u_t = u_xx + f(u,v) to the plain form: the
// branches become F_j(u) = f(u, H_j(u)) with unchanged thresholds and
// sigma (valid for locally Lipschitz f).
BranchPair reduce_general_rhs(const std::function<double(double, double)>& f,
                              const BranchPair& branches);

struct KernelBoundReport {
    std::vector<double> times;
    std::vector<double> sup_values;     // s(t) = sup_x |u(x,t)|
    std::vector<double> scaled_values;  // s(t)*sqrt(t)
    double bound_constant = 0.0;        // max of s(t)*sqrt(t) over sampled t
    bool bounded = true;                // no growth trend across the range
};

// Evolves a discrete delta (mass 1/h at source_node) through the
// homogeneous solver and checks the 1/sqrt(t) decay of the sup norm.
KernelBoundReport heat_kernel_bound_check(const SolverParams& params, int source_node,
                                          const std::vector<double>& times);

// Solves the tridiagonal system in place (Thomas algorithm). lower and
// upper are the off-diagonals (size n-1), diag size n.
void thomas_solve(std::vector<double>& diag, std::vector<double>& lower,
                  std::vector<double>& upper, std::vector<double>& rhs);

// Trapezoid-weighted spatial mean, the discretely conserved quantity of
// the Neumann scheme.
double trapezoid_mean(const std::vector<double>& u, const Grid& grid);

} // namespace hystereact

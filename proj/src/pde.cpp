#include "hystereact/pde.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace hystereact {

std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Completed: return "completed";
        case RunStatus::TransversalityLost: return "transversality_lost";
        case RunStatus::DomainViolationHalt: return "domain_violation";
    }
    return "unknown";
}

void SolverParams::validate() const {
    if (grid.n_cells < 1) throw std::invalid_argument("SolverParams: grid not initialized");
    if (!(dt > 0.0)) throw std::invalid_argument("SolverParams: dt must be positive");
    if (!(t_end >= 0.0)) throw std::invalid_argument("SolverParams: t_end must be >= 0");
    if (t_end > 0.0 && dt > t_end) throw std::invalid_argument("SolverParams: dt must be <= t_end");
    if (!(theta >= 0.5 && theta <= 1.0))
        throw std::invalid_argument("SolverParams: theta must lie in [1/2, 1]");
    if (save_stride < 1) throw std::invalid_argument("SolverParams: save_stride must be >= 1");
}

void thomas_solve(std::vector<double>& diag, std::vector<double>& lower,
                  std::vector<double>& upper, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0) throw LinearSolveFailure("tridiagonal pivot vanished");
        double m = lower[i - 1] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if (diag[n - 1] == 0.0) throw LinearSolveFailure("tridiagonal pivot vanished");
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

double trapezoid_mean(const std::vector<double>& u, const Grid& grid) {
    double sum = 0.5 * (u.front() + u.back());
    for (std::size_t i = 1; i + 1 < u.size(); ++i) sum += u[i];
    return sum * grid.h;
}

HeatStepper::HeatStepper(const SolverParams& params, BranchPair branches)
    : params_(params), branches_(std::move(branches)) {
    params_.validate();
}

// Laplacian with second-order ghost-node Neumann closure:
// (Lu)_0 = 2(u_1-u_0)/h^2, interior standard, mirrored at the right end.
std::vector<double> HeatStepper::diffuse(const std::vector<double>& u,
                                         const std::vector<double>& source, double dt) const {
    const std::size_t n = u.size();
    const double h2 = params_.grid.h * params_.grid.h;
    const double r = dt / h2;
    const double th = params_.theta;

    std::vector<double> diag(n, 1.0 + 2.0 * r * th);
    std::vector<double> lower(n - 1, -r * th), upper(n - 1, -r * th);
    upper[0] = -2.0 * r * th;
    lower[n - 2] = -2.0 * r * th;

    const double re = r * (1.0 - th);
    std::vector<double> rhs(n);
    rhs[0] = u[0] + re * 2.0 * (u[1] - u[0]) + dt * source[0];
    for (std::size_t i = 1; i + 1 < n; ++i)
        rhs[i] = u[i] + re * (u[i - 1] - 2.0 * u[i] + u[i + 1]) + dt * source[i];
    rhs[n - 1] = u[n - 1] + re * 2.0 * (u[n - 2] - u[n - 1]) + dt * source[n - 1];

    thomas_solve(diag, lower, upper, rhs);
    return rhs;
}

FieldState HeatStepper::step_with_dt(const FieldState& state, double dt, int depth) const {
    std::vector<double> u_new = diffuse(state.u, state.v, dt);
    try {
        return advance_field(state, u_new, state.t + dt, branches_);
    } catch (const DomainViolation&) {
        if (params_.overshoot_policy != OvershootPolicy::Subdivide || dt * 0.5 < 1e-10)
            throw;
        // Halve the step so the relay sees the threshold before the
        // input runs past its branch domain.
        FieldState half = step_with_dt(state, dt * 0.5, depth + 1);
        return step_with_dt(half, dt * 0.5, depth + 1);
    }
}

FieldState HeatStepper::step(const FieldState& state) const {
    return step_with_dt(state, params_.dt, 0);
}

FieldState step(const FieldState& state, const SolverParams& params, const BranchPair& branches) {
    return HeatStepper(params, branches).step(state);
}

Trajectory solve(const std::vector<double>& phi, const SpatialConfig& xi0,
                 const BranchPair& branches, const SolverParams& params,
                 const std::vector<Monitor*>& monitors) {
    params.validate();
    auto t0 = std::chrono::steady_clock::now();

    Trajectory traj;
    traj.params = params;

    FieldState state = init_field(phi, xi0, branches);
    traj.snapshots.push_back(state);

    bool lost = false;
    for (Monitor* m : monitors)
        if (!m->on_state(state)) lost = true;

    if (!lost) {
        HeatStepper stepper(params, branches);
        const long n_steps = std::lround(params.t_end / params.dt);
        for (long k = 1; k <= n_steps; ++k) {
            try {
                state = stepper.step(state);
            } catch (const DomainViolation&) {
                traj.status = RunStatus::DomainViolationHalt;
                break;
            }
            bool ok = true;
            for (Monitor* m : monitors)
                if (!m->on_state(state)) ok = false;
            if (k % params.save_stride == 0 || k == n_steps || !ok)
                traj.snapshots.push_back(state);
            if (!ok) {
                traj.status = RunStatus::TransversalityLost;
                break;
            }
        }
    } else {
        traj.status = RunStatus::TransversalityLost;
    }

    traj.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return traj;
}

BranchPair reduce_general_rhs(const std::function<double(double, double)>& f,
                              const BranchPair& branches) {
    BranchPair out = branches;
    BranchFn h1 = branches.h1, h2 = branches.h2;
    out.h1 = [f, h1](double u) { return f(u, h1(u)); };
    out.h2 = [f, h2](double u) { return f(u, h2(u)); };
    return out;
}

KernelBoundReport heat_kernel_bound_check(const SolverParams& params, int source_node,
                                          const std::vector<double>& times) {
    params.validate();
    if (source_node < 0 || source_node >= params.grid.n_nodes())
        throw std::invalid_argument("heat_kernel_bound_check: source node outside grid");

    const std::size_t n = std::size_t(params.grid.n_nodes());
    std::vector<double> u(n, 0.0), zero(n, 0.0);
    u[std::size_t(source_node)] = 1.0 / params.grid.h; // unit trapezoid mass

    HeatStepper stepper(params, constant_branches(-1.0, 1.0, 0.0, 0.0));

    KernelBoundReport rep;
    double t = 0.0;
    std::size_t next = 0;
    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    while (next < sorted.size()) {
        u = stepper.diffuse(u, zero, params.dt);
        t += params.dt;
        if (t + 0.5 * params.dt >= sorted[next]) {
            double s = 0.0;
            for (double x : u) s = std::max(s, std::abs(x));
            rep.times.push_back(t);
            rep.sup_values.push_back(s);
            rep.scaled_values.push_back(s * std::sqrt(t));
            ++next;
        }
    }

    for (double v : rep.scaled_values) rep.bound_constant = std::max(rep.bound_constant, v);

    // Least-squares slope of s(t)*sqrt(t) against sample index; a clear
    // upward trend means the 1/sqrt(t) envelope is not honored.
    const std::size_t m = rep.scaled_values.size();
    if (m >= 2) {
        double xm = (m - 1) / 2.0, sxx = 0.0, sxy = 0.0, ym = 0.0;
        for (double v : rep.scaled_values) ym += v;
        ym /= double(m);
        for (std::size_t i = 0; i < m; ++i) {
            sxx += (i - xm) * (i - xm);
            sxy += (i - xm) * (rep.scaled_values[i] - ym);
        }
        double slope = sxy / sxx;
        rep.bounded = slope * double(m - 1) <= 0.05 * std::abs(ym);
    }
    return rep;
}

} // namespace hystereact

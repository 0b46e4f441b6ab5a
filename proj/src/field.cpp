#include "hystereact/field.hpp"

#include <cmath>
#include <stdexcept>

#include "hystereact/csv.hpp"

namespace hystereact {

Grid::Grid(int cells) : n_cells(cells) {
    if (cells < 1) throw std::invalid_argument("Grid: n_cells must be positive");
    h = 1.0 / cells;
    nodes.resize(std::size_t(cells) + 1);
    for (int i = 0; i <= cells; ++i) nodes[std::size_t(i)] = double(i) / cells;
    nodes.back() = 1.0;
}

int Grid::nearest_node(double x) const {
    int i = int(std::lround(x * n_cells));
    if (i < 0) i = 0;
    if (i > n_cells) i = n_cells;
    return i;
}

ConsistencyResult check_consistent(const std::vector<double>& phi, const SpatialConfig& xi0,
                                   const BranchPair& branches) {
    if (phi.size() != xi0.size())
        throw std::invalid_argument("check_consistent: arrays not conformal");
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (xi0[i] != 1 && xi0[i] != 2) return {false, int(i)};
        // Threshold attainment pins the configuration: at or below alpha
        // only branch 1 is evaluable, at or above beta only branch 2.
        if (phi[i] >= branches.beta && xi0[i] != 2) return {false, int(i)};
        if (phi[i] <= branches.alpha && xi0[i] != 1) return {false, int(i)};
    }
    return {true, -1};
}

FieldState init_field(const std::vector<double>& phi, const SpatialConfig& xi0,
                      const BranchPair& branches) {
    auto cons = check_consistent(phi, xi0, branches);
    if (!cons.consistent)
        throw InconsistentInitialData("initial data inconsistent with configuration at node " +
                                      std::to_string(cons.first_offending_node));
    FieldState s;
    s.t = 0.0;
    s.u = phi;
    s.relays.resize(phi.size());
    s.v.resize(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        s.relays[i] = RelayState{initial_config(xi0[i], phi[i], branches), phi[i]};
        s.v[i] = output(s.relays[i], phi[i], branches);
    }
    return s;
}

FieldState advance_field(const FieldState& state, const std::vector<double>& u_new,
                         double t_new, const BranchPair& branches) {
    if (u_new.size() != state.n_nodes())
        throw std::invalid_argument("advance_field: u_new not conformal");
    if (!(t_new > state.t))
        throw std::invalid_argument("advance_field: t_new must exceed current time");
    FieldState s;
    s.t = t_new;
    s.u = u_new;
    s.relays.resize(u_new.size());
    s.v.resize(u_new.size());
    for (std::size_t i = 0; i < u_new.size(); ++i) {
        s.relays[i] = update_config(state.relays[i], u_new[i], branches);
        try {
            s.v[i] = output(s.relays[i], u_new[i], branches);
        } catch (const DomainViolation& e) {
            DomainViolation err(std::string(e.what()) + " at node " + std::to_string(i));
            err.node = int(i);
            throw err;
        }
    }
    return s;
}

SpatialConfig step_config(const Grid& grid, double abar) {
    int ia = grid.nearest_node(abar);
    SpatialConfig xi(std::size_t(grid.n_nodes()));
    for (int i = 0; i < grid.n_nodes(); ++i) xi[std::size_t(i)] = (i <= ia) ? 1 : 2;
    return xi;
}

std::string snapshot_csv(const FieldState& state, const Grid& grid) {
    std::string out;
    for (std::size_t i = 0; i < state.n_nodes(); ++i) {
        out += fmt(grid.nodes[i]);
        out += ',';
        out += fmt(state.u[i]);
        out += ',';
        out += fmt(state.v[i]);
        out += ',';
        out += fmt(state.relays[i].config);
        out += '\n';
    }
    return out;
}

} // namespace hystereact

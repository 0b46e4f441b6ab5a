#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hystereact/relay.hpp"

namespace hystereact {

// Uniform grid on [0,1] with n_cells cells and n_cells+1 nodes.
struct Grid {
    int n_cells = 0;
    double h = 0.0;
    std::vector<double> nodes;

    explicit Grid(int cells);
    Grid() = default;

    int n_nodes() const { return n_cells + 1; }
    double x(int i) const { return nodes[std::size_t(i)]; }
    int nearest_node(double x) const;
};

using SpatialConfig = std::vector<int>; // per-node values in {1,2}

// One time level of the coupled field: u, the relay-maintained source v,
// and the per-node relay states. v[i] is exactly the value the relay
// emitted at the last completed step, never recomputed lazily.
struct FieldState {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<RelayState> relays;

    std::size_t n_nodes() const { return u.size(); }
};

struct ConsistencyResult {
    bool consistent = true;
    int first_offending_node = -1;
};

// phi >= beta forces config 2, phi <= alpha forces config 1, anything
// strictly between allows either.
ConsistencyResult check_consistent(const std::vector<double>& phi, const SpatialConfig& xi0,
                                   const BranchPair& branches);

// Builds the t=0 state. Throws InconsistentInitialData.
FieldState init_field(const std::vector<double>& phi, const SpatialConfig& xi0,
                      const BranchPair& branches);

// Pointwise relay update with the new input profile; recomputes v and
// advances time. DomainViolation from any node is rethrown with the
// node index attached.
FieldState advance_field(const FieldState& state, const std::vector<double>& u_new,
                         double t_new, const BranchPair& branches);

// Step-configuration initial data: 1 on [0, abar] (node at abar
// included), 2 to the right. abar is snapped to the nearest grid node.
SpatialConfig step_config(const Grid& grid, double abar);

// Snapshot rows "x,u,v,config", one per node (CSV body without header).
std::string snapshot_csv(const FieldState& state, const Grid& grid);

} // namespace hystereact

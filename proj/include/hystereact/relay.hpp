#pragma once

#include <utility>

#include "hystereact/branches.hpp"

namespace hystereact {

// State of the scalar relay automaton at one spatial point: the active
// branch and the input value at the most recent accepted time. Inputs
// between accepted times are interpreted as piecewise linear.
struct RelayState {
    int config = 1; // 1 or 2
    double last_input = 0.0;
};

// Absolute tolerance for "the input touched a threshold".
inline constexpr double kSwitchTol = 1e-12;

// Overshoot past the active branch cutoff tolerated by output() before
// a DomainViolation is raised.
inline constexpr double kOvershootTol = 1e-9;

// Initial configuration: the threshold value wins over zeta0 when the
// initial input sits on or past a threshold.
int initial_config(int zeta0, double g0, const BranchPair& branches);

// Advance the automaton by one step. Threshold events inside the step
// are ordered by interpolated crossing time and the latest one decides
// the new configuration; touching a threshold (within kSwitchTol)
// counts as an event.
RelayState update_config(RelayState state, double g_new, const BranchPair& branches);

// Output of the active branch. Throws DomainViolation when g exceeds the
// active branch domain by more than kOvershootTol (a missed switch).
double output(const RelayState& state, double g, const BranchPair& branches);

enum class CutoffSide { UpperBeta, LowerAlpha };

struct BranchConditionReport {
    double m_estimate = 0.0;
    std::pair<double, double> max_ratio_location{0.0, 0.0};
    bool violated = false;
    // Supremum per refinement level (each level doubles the sample count
    // and pushes the sampling two decades closer to the threshold).
    std::vector<double> m_per_level;
};

// Samples the branch regularity ratio
//   |H(u)-H(u^)| * (dist(u)^sigma + dist(u^)^sigma) / |u-u^|
// on a grid clustered geometrically at the threshold and reports the
// sampled supremum. violated=true when the supremum keeps growing by
// more than 1.5x across three consecutive refinements, which is the
// signature of a power-law singularity not absorbed by sigma.
BranchConditionReport verify_branch_condition(const BranchFn& branch, double threshold,
                                              CutoffSide side, double sigma, double U,
                                              int samples);

} // namespace hystereact

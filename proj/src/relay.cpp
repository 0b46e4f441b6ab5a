#include "hystereact/relay.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hystereact {

int initial_config(int zeta0, double g0, const BranchPair& branches) {
    if (g0 <= branches.alpha) return 1;
    if (g0 >= branches.beta) return 2;
    return zeta0;
}

namespace {

// Latest parameter s in [0,1] at which the segment g0 -> g1 attains the
// value c, or -1 if it does not. Endpoint touches within kSwitchTol count.
double latest_attainment(double g0, double g1, double c) {
    if (std::abs(g1 - c) <= kSwitchTol) return 1.0;
    double s = -1.0;
    if ((g0 - c) * (g1 - c) < 0.0) s = (c - g0) / (g1 - g0);
    if (std::abs(g0 - c) <= kSwitchTol) s = std::max(s, 0.0);
    return s;
}

} // namespace

RelayState update_config(RelayState state, double g_new, const BranchPair& branches) {
    double s_alpha = latest_attainment(state.last_input, g_new, branches.alpha);
    double s_beta = latest_attainment(state.last_input, g_new, branches.beta);
    if (s_alpha >= 0.0 || s_beta >= 0.0)
        state.config = (s_alpha > s_beta) ? 1 : 2;
    state.last_input = g_new;
    return state;
}

double output(const RelayState& state, double g, const BranchPair& branches) {
    if (state.config == 1) {
        if (g > branches.beta + kOvershootTol)
            throw DomainViolation("relay on branch 1 driven past beta (missed switch)");
        return branches.eval1(g, kOvershootTol);
    }
    if (g < branches.alpha - kOvershootTol)
        throw DomainViolation("relay on branch 2 driven below alpha (missed switch)");
    return branches.eval2(g, kOvershootTol);
}

namespace {

struct LevelResult {
    double sup = 0.0;
    std::pair<double, double> at{0.0, 0.0};
};

LevelResult condition_sup(const BranchFn& branch, double threshold, CutoffSide side,
                          double sigma, double range, int count, double d_min) {
    // Distances to the threshold, log-uniform between range and d_min.
    std::vector<double> dist(count), u(count), hv(count);
    double ratio = std::pow(d_min / range, 1.0 / (count - 1));
    double sign = (side == CutoffSide::UpperBeta) ? -1.0 : 1.0;
    for (int i = 0; i < count; ++i) {
        u[i] = threshold + sign * (range * std::pow(ratio, i));
        dist[i] = std::abs(threshold - u[i]); // as the branch sees it
        hv[i] = branch(u[i]);
    }
    LevelResult r;
    for (int i = 0; i < count; ++i) {
        double di_s = std::pow(dist[i], sigma);
        for (int j = i + 1; j < count; ++j) {
            double du = std::abs(u[i] - u[j]);
            if (du == 0.0) continue;
            double val = std::abs(hv[i] - hv[j]) * (di_s + std::pow(dist[j], sigma)) / du;
            if (val > r.sup) {
                r.sup = val;
                r.at = {u[i], u[j]};
            }
        }
    }
    return r;
}

} // namespace

BranchConditionReport verify_branch_condition(const BranchFn& branch, double threshold,
                                              CutoffSide side, double sigma, double U,
                                              int samples) {
    if (!(sigma >= 0.0 && sigma < 1.0))
        throw std::invalid_argument("verify_branch_condition: sigma must lie in [0,1)");
    if (samples < 2)
        throw std::invalid_argument("verify_branch_condition: samples must be >= 2");

    // Sampling range per Condition-style domains: [-U, beta) resp. (alpha, U].
    double range = (side == CutoffSide::UpperBeta) ? threshold + U : U - threshold;
    if (!(range > 0.0))
        throw std::invalid_argument("verify_branch_condition: U does not bound the domain");

    BranchConditionReport rep;
    int count = samples;
    double d_min = range * 1e-3;
    for (int level = 0; level < 4; ++level) {
        LevelResult lr = condition_sup(branch, threshold, side, sigma, range, count, d_min);
        rep.m_per_level.push_back(lr.sup);
        rep.m_estimate = lr.sup;
        rep.max_ratio_location = lr.at;
        count *= 2;
        d_min *= 1e-2;
    }
    rep.violated = true;
    for (std::size_t k = 1; k < rep.m_per_level.size(); ++k)
        if (!(rep.m_per_level[k] > 1.5 * rep.m_per_level[k - 1])) rep.violated = false;
    return rep;
}

} // namespace hystereact

#pragma once

#include <array>
#include <functional>
#include <vector>

#include "hystereact/pde.hpp"
#include "hystereact/transverse.hpp"

namespace hystereact {

using Fn2 = std::function<double(double, double)>;

// A bistable nullcline g(u,v)=0 with its detected fold data. Partial
// derivatives may be supplied analytically; otherwise central
// differences with step 1e-6 are used.
struct NullclineModel {
    Fn2 g;
    Fn2 gu; // optional
    Fn2 gv; // optional

    struct Folds {
        double alpha = 0.0, beta = 0.0;   // fold u-values, alpha < beta
        std::array<double, 2> A{0, 0};    // (alpha, H2(alpha))
        std::array<double, 2> B{0, 0};    // (beta, H1(beta))
        int n = 0;                        // fold order (even)
    } folds;
    bool detected = false;

    double eval_gu(double u, double v) const;
    double eval_gv(double u, double v) const;
    // k-th v-derivative of g at (u,v), central differences with the given step.
    double dv_k(double u, double v, int k, double step) const;
};

// g(u,v) = u + v - v^3, the standard bistable example; analytic partials.
NullclineModel cubic_nullcline();

// Parametrizes g=0 by v over v_range, finds the two sign changes of
// du/dv = -gv/gu, refines each fold to 1e-12 by bisection, and detects
// the fold order n. Throws FoldCountMismatch unless exactly two folds
// are present.
void detect_folds(NullclineModel& model, double v_lo, double v_hi, int samples);

// Tabulates the outer stable branches by continuation along g=0 with
// Newton correction, u-clustered geometrically toward the folds, and
// wraps them as a BranchPair with sigma=(n-1)/n.
BranchPair extract_branches(const NullclineModel& model, double u_lo, double u_hi,
                            int resolution);

struct LemmaA1Report {
    double m_estimate = 0.0;       // largest M for which the fold inequality holds
    bool holds = false;
    BranchConditionReport h1_check; // end-to-end branch condition on H1
    BranchConditionReport h2_check; // and on H2
};

// Checks the fold inequality
//   (G(w)-G(w^))/(w-w^) >= M ([G(w)]^{(n-1)/n} + [G(w^)]^{(n-1)/n})
// for the local inverse G of the branch near fold A, sampling pairs
// 0 < w^ < w <= eps0 on a geometric grid. Also runs the branch
// regularity verifier on both extracted branches with sigma=(n-1)/n.
LemmaA1Report verify_lemma_A1(const BranchPair& branches, const NullclineModel& model,
                              double eps0, int samples);

// Core of the inequality check for a supplied G (used with idealized
// folds G(w) = w^n in tests).
double fold_inequality_constant(const std::function<double(double)>& G, int n, double eps0,
                                int samples);

struct SlowFastState {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> v;
    double epsilon = 0.0;
};

struct SlowFastTrajectory {
    std::vector<SlowFastState> snapshots;
    RunStatus status = RunStatus::Completed;
};

// Solves u_t = u_xx + f(u,v), eps v_t = g(u,v): implicit diffusion with
// the reaction explicit, then a per-node backward-Euler update of v with
// Newton (L-stable through the fold transit).
SlowFastTrajectory solve_slowfast(const std::vector<double>& phi_u,
                                  const std::vector<double>& phi_v,
                                  const NullclineModel& model, const Fn2& f, double epsilon,
                                  const SolverParams& params);

struct SlowFastComparison {
    double sup_dev_u = 0.0;
    double sup_dev_v = 0.0;            // outside a tube around the free boundary
    double max_switch_offset = 0.0;    // worst per-node midline-crossing offset
    int switched_both = 0;             // nodes that switched in both runs
    int switched_mismatch = 0;         // nodes that switched in exactly one
};

// Space-time deviation of a slow-fast run from the hysteresis-limit run
// on the same grid and save times. v is compared only outside a tube of
// radius tube_r around b(t), where the limit is discontinuous.
SlowFastComparison compare_to_hysteresis(const SlowFastTrajectory& slow,
                                         const Trajectory& hyst, const NullclineModel& model,
                                         double burn_in, double tube_r);

} // namespace hystereact

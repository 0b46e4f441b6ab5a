#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hystereact/errors.hpp"

namespace hystereact {

using BranchFn = std::function<double(double)>;

// The two hysteresis branches with their thresholds. H1 is defined on
// (-inf, beta], H2 on [alpha, +inf); evaluation outside these domains
// throws EvaluationOutsideDomain. sigma is the Hoelder defect exponent
// of the branch regularity condition (0 for Lipschitz branches).
struct BranchPair {
    double alpha;
    double beta;
    BranchFn h1;
    BranchFn h2;
    double sigma = 0.0;
    std::optional<double> m_hint;

    // Domain-checked evaluation. `tol` allows a small overshoot past the
    // cutoff (the input is clamped to the cutoff before evaluating).
    double eval1(double u, double tol = 0.0) const;
    double eval2(double u, double tol = 0.0) const;

    void validate() const; // throws std::invalid_argument on bad thresholds/sigma
};

// Branches of the cubic nullcline u + v - v^3 = 0: H2 is the upper root
// of v^3 - v = u, H1 the lower one. Thresholds are the fold abscissae
// +-2/(3*sqrt(3)); sigma = 1/2 (fold order n = 2).
BranchPair cubic_branches();

double cubic_upper_root(double u); // largest real root of v^3 - v = u, u >= -2/(3 sqrt 3)
double cubic_lower_root(double u); // smallest real root, u <= +2/(3 sqrt 3)

// H1(u) = s1*u + c1, H2(u) = s2*u + c2, sigma = 0.
BranchPair affine_branches(double alpha, double beta,
                           double s1, double c1, double s2, double c2);

BranchPair constant_branches(double alpha, double beta, double v1, double v2);

// Monotone cubic (Fritsch-Carlson) interpolant through tabulated branch
// data. Evaluation outside [x.front(), x.back()] throws.
class TabulatedBranch {
public:
    TabulatedBranch() = default;
    TabulatedBranch(std::vector<double> x, std::vector<double> y);

    double operator()(double u) const;
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }

private:
    std::vector<double> x_, y_, d_; // nodes, values, endpoint slopes
};

} // namespace hystereact

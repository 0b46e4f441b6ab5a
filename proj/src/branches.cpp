#include "hystereact/branches.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hystereact {

double BranchPair::eval1(double u, double tol) const {
    if (u > beta + tol)
        throw EvaluationOutsideDomain("H1 evaluated at u=" + std::to_string(u) +
                                      " past beta=" + std::to_string(beta));
    return h1(std::min(u, beta));
}

double BranchPair::eval2(double u, double tol) const {
    if (u < alpha - tol)
        throw EvaluationOutsideDomain("H2 evaluated at u=" + std::to_string(u) +
                                      " below alpha=" + std::to_string(alpha));
    return h2(std::max(u, alpha));
}

void BranchPair::validate() const {
    if (!(alpha < beta))
        throw std::invalid_argument("BranchPair: alpha must be < beta");
    if (!(sigma >= 0.0 && sigma < 1.0))
        throw std::invalid_argument("BranchPair: sigma must lie in [0,1)");
    if (!h1 || !h2)
        throw std::invalid_argument("BranchPair: missing branch function");
}

namespace {

constexpr double kCubicFold = 0.3849001794597505; // 2/(3*sqrt(3))

// Real roots of v^3 - v - u = 0. Trigonometric form inside the
// three-root window |u| <= 2/(3 sqrt 3), Cardano outside, then a Newton
// polish to machine accuracy.
double polish(double v, double u) {
    for (int i = 0; i < 3; ++i) {
        double f = v * v * v - v - u;
        double df = 3.0 * v * v - 1.0;
        if (df == 0.0) break;
        v -= f / df;
    }
    return v;
}

double cubic_root(double u, bool upper) {
    double v;
    if (std::abs(u) <= kCubicFold) {
        double arg = std::clamp(1.5 * std::sqrt(3.0) * u, -1.0, 1.0);
        double theta = std::acos(arg);
        double k = upper ? 0.0 : 2.0;
        v = 2.0 / std::sqrt(3.0) * std::cos(theta / 3.0 - 2.0 * M_PI * k / 3.0);
    } else {
        double s = std::sqrt(u * u / 4.0 - 1.0 / 27.0);
        v = std::cbrt(u / 2.0 + s) + std::cbrt(u / 2.0 - s);
    }
    return polish(v, u);
}

} // namespace

double cubic_upper_root(double u) { return cubic_root(u, true); }
double cubic_lower_root(double u) { return cubic_root(u, false); }

BranchPair cubic_branches() {
    BranchPair bp;
    bp.alpha = -kCubicFold;
    bp.beta = kCubicFold;
    bp.h1 = [](double u) { return cubic_lower_root(u); };
    bp.h2 = [](double u) { return cubic_upper_root(u); };
    bp.sigma = 0.5;
    return bp;
}

BranchPair affine_branches(double alpha, double beta,
                           double s1, double c1, double s2, double c2) {
    BranchPair bp;
    bp.alpha = alpha;
    bp.beta = beta;
    bp.h1 = [s1, c1](double u) { return s1 * u + c1; };
    bp.h2 = [s2, c2](double u) { return s2 * u + c2; };
    bp.sigma = 0.0;
    return bp;
}

BranchPair constant_branches(double alpha, double beta, double v1, double v2) {
    return affine_branches(alpha, beta, 0.0, v1, 0.0, v2);
}

TabulatedBranch::TabulatedBranch(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.size() < 2)
        throw std::invalid_argument("TabulatedBranch: need >= 2 conformal points");
    for (std::size_t i = 1; i < x_.size(); ++i)
        if (!(x_[i] > x_[i - 1]))
            throw std::invalid_argument("TabulatedBranch: x must be strictly increasing");

    // Fritsch-Carlson slopes: start from three-point estimates, then limit
    // against the secants so the interpolant preserves monotonicity.
    const std::size_t n = x_.size();
    std::vector<double> h(n - 1), s(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        s[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    d_[0] = s[0];
    d_[n - 1] = s[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (s[i - 1] * s[i] <= 0.0) {
            d_[i] = 0.0;
        } else {
            double w1 = 2.0 * h[i] + h[i - 1];
            double w2 = h[i] + 2.0 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
        }
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (s[i] == 0.0) {
            d_[i] = d_[i + 1] = 0.0;
            continue;
        }
        double a = d_[i] / s[i], b = d_[i + 1] / s[i];
        double r = a * a + b * b;
        if (r > 9.0) {
            double t = 3.0 / std::sqrt(r);
            d_[i] = t * a * s[i];
            d_[i + 1] = t * b * s[i];
        }
    }
}

double TabulatedBranch::operator()(double u) const {
    if (x_.empty())
        throw std::logic_error("TabulatedBranch: empty table");
    if (u < x_.front() || u > x_.back())
        throw EvaluationOutsideDomain("tabulated branch evaluated at u=" +
                                      std::to_string(u) + " outside table range");
    auto it = std::upper_bound(x_.begin(), x_.end(), u);
    std::size_t i = (it == x_.end()) ? x_.size() - 2 : std::size_t(it - x_.begin()) - 1;
    double h = x_[i + 1] - x_[i];
    double t = (u - x_[i]) / h;
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * d_[i] +
           (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * d_[i + 1];
}

} // namespace hystereact

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "errors.hpp"

namespace jacobi_scatter::detail {

inline bool same_sign(double x, double y) { return (x > 0) == (y > 0); }

/// Root of a continuous function on a bracket [lo, hi] with a sign change.
/// Newton steps from `fd` (returning f and f') are taken when they stay
/// inside the current bracket; otherwise the bracket is bisected.
template <class FD>
double bracketed_newton(FD&& fd, double lo, double hi)
{
    double flo = fd(lo).first, fhi = fd(hi).first;
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    if (same_sign(flo, fhi))
        fail(ErrorKind::root_finding, "no sign change on bracket [" + std::to_string(lo) + ", " +
                                          std::to_string(hi) + "]");
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 400; ++it) {
        const auto [fx, dfx] = fd(x);
        if (fx == 0.0)
            return x;
        if (same_sign(fx, flo)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
        if (hi - lo <= 4e-16 * scale)
            return 0.5 * (lo + hi);
        double next = (dfx != 0.0) ? x - fx / dfx : lo - 1.0;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-16 * scale)
            return next;
        x = next;
    }
    return x;
}

/// Bisection only; used where no derivative is available.
template <class F>
double bisect(F&& f, double lo, double hi)
{
    return bracketed_newton([&](double x) { return std::pair{f(x), 0.0}; }, lo, hi);
}

/// Roots of the Chebyshev series sum_k c_k T_k(t) on the reference interval,
/// as eigenvalues of the colleague matrix.
inline std::vector<std::complex<double>> chebyshev_roots(const std::vector<double>& c)
{
    const int n = static_cast<int>(c.size()) - 1;
    if (n < 1)
        return {};
    if (n == 1)
        return {std::complex<double>(-c[0] / c[1], 0.0)};
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    m(0, 1) = 1.0;
    for (int k = 1; k < n - 1; ++k) {
        m(k, k - 1) = 0.5;
        m(k, k + 1) = 0.5;
    }
    m(n - 1, n - 2) = 0.5;
    for (int k = 0; k < n; ++k)
        m(n - 1, k) -= c[k] / (2.0 * c[n]);
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    if (es.info() != Eigen::Success)
        fail(ErrorKind::root_finding, "colleague matrix eigenvalues did not converge");
    std::vector<std::complex<double>> out;
    for (int k = 0; k < n; ++k)
        out.push_back(es.eigenvalues()(k));
    return out;
}

/// Chebyshev coefficients of the degree-n interpolant through first-kind
/// Chebyshev points t_j = cos(pi (j + 1/2) / (n + 1)).
template <class F>
std::vector<double> chebyshev_interpolate(F&& f, int n)
{
    const int m = n + 1;
    std::vector<double> fv(m);
    for (int j = 0; j < m; ++j)
        fv[j] = f(std::cos(std::numbers::pi * (j + 0.5) / m));
    std::vector<double> c(m, 0.0);
    for (int k = 0; k < m; ++k) {
        double s = 0.0;
        for (int j = 0; j < m; ++j)
            s += fv[j] * std::cos(std::numbers::pi * k * (j + 0.5) / m);
        c[k] = 2.0 * s / m;
    }
    c[0] *= 0.5;
    return c;
}

} // namespace jacobi_scatter::detail

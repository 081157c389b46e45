#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace jacobi_scatter {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

/// (P_n(x), P_n'(x)) by the three-term recurrence.
inline std::pair<double, double> legendre_with_derivative(int n, double x)
{
    double p0 = 1.0, p1 = x;
    if (n == 0)
        return {1.0, 0.0};
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

} // namespace detail

/// Gauss-Legendre rule on [-1, 1], nodes ascending.
inline QuadratureRule gauss_legendre(int n)
{
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = detail::legendre_with_derivative(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        const double dp = detail::legendre_with_derivative(n, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        rule.nodes[n / 2] = 0.0;
    return rule;
}

/// Affine map of a [-1, 1] rule to [lo, hi].
inline QuadratureRule map_rule(const QuadratureRule& ref, double lo, double hi)
{
    QuadratureRule out;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    out.nodes.reserve(ref.nodes.size());
    out.weights.reserve(ref.weights.size());
    for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
        out.nodes.push_back(mid + half * ref.nodes[i]);
        out.weights.push_back(half * ref.weights[i]);
    }
    return out;
}

/// Gauss rule in theta for lambda = mid - half cos(theta), theta in [0, pi].
/// Integrands with square-root behaviour at both ends become smooth in theta.
inline QuadratureRule map_rule_cosine(const QuadratureRule& ref, double lo, double hi)
{
    QuadratureRule out;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
        const double theta = 0.5 * std::numbers::pi * (ref.nodes[i] + 1.0);
        out.nodes.push_back(mid - half * std::cos(theta));
        out.weights.push_back(0.5 * std::numbers::pi * half * std::sin(theta) * ref.weights[i]);
    }
    return out;
}

} // namespace jacobi_scatter

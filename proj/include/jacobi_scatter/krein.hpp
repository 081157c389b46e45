#pragma once

// Krein's perturbation determinant, the spectral shift function and the
// trace formulas tau_j = tr(H^j - H_q^j).

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>

#include "perturbation.hpp"
#include "quadrature.hpp"

namespace jacobi_scatter {

// ---------------------------------------------------------------------------
// Perturbation determinant and the log-derivative identity
// ---------------------------------------------------------------------------

/// det(1 + V (H_q - z)^{-1}) with V = H - H_q. V is supported on
/// S = [n- - 1, n+ + 1], so the determinant is that of the |S| x |S| matrix
/// I + V_S G_q|_S. The product of LU pivots is accumulated as a sum of logs.
inline cplx perturbation_determinant(const Perturbation& p, cplx z)
{
    if (p.empty())
        return 1.0;
    const auto& bg = p.background();
    const auto fb = detail::floquet_basis(bg, z, false);
    const cplx wq = fb.wronskian(bg, 0);
    const int first = p.window().first - 1, last = p.window().last + 1;
    const int m = last - first + 1;

    Eigen::MatrixXcd g(m, m), v = Eigen::MatrixXcd::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const int lo = first + std::min(i, j), hi = first + std::max(i, j);
            g(i, j) = fb.minus.value(lo) * fb.plus.value(hi) / wq;
        }
    for (int i = 0; i < m; ++i) {
        const int n = first + i;
        v(i, i) = p.b(n) - bg.b(n);
        if (i + 1 < m) {
            v(i, i + 1) = p.a(n) - bg.a(n);
            v(i + 1, i) = v(i, i + 1);
        }
    }
    const Eigen::MatrixXcd k = Eigen::MatrixXcd::Identity(m, m) + v * g;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(k);
    cplx logdet = 0.0;
    for (int i = 0; i < m; ++i)
        logdet += std::log(lu.matrixLU()(i, i));
    return static_cast<double>(lu.permutationP().determinant()) * std::exp(logdet);
}

/// |alpha' + alpha sum_{|n| <= n_max} (G(n,n) - G_q(n,n))| / |alpha'|, with alpha'
/// from the differentiated Wronskian. Small values certify
/// d alpha/dz = -alpha sum_n (G - G_q).
inline double alpha_log_derivative_residual(const Perturbation& p, cplx z, int n_max)
{
    if (p.empty())
        return 0.0;
    const auto sup = p.support();
    if (n_max < std::max(std::abs(sup.first), std::abs(sup.last)))
        fail(ErrorKind::input, "alpha_log_derivative_residual: n_max must cover the support of H - H_q");
    const auto jet = detail::alpha_jet(p, z, true);
    cplx sum = 0.0;
    for (cplx d : green_diagonal_difference(p, z, {-n_max, n_max}))
        sum += d;
    const double num = std::abs(jet.derivative + jet.value * sum);
    const double den = std::abs(jet.derivative);
    return den > 0.0 ? num / den : num;
}

// ---------------------------------------------------------------------------
// Spectral shift function
// ---------------------------------------------------------------------------

struct BandNodes {
    Interval band;
    QuadratureRule rule;
};

/// Sampling layout for the spectral shift function: Gauss-Legendre nodes in
/// each band (in the cosine variable, which absorbs the square-root edge
/// behaviour of xi), and the complementary intervals (split at the eigenvalues of
/// H) on which xi is an integer constant.
struct ShiftGrid {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    std::vector<BandNodes> bands;
    std::vector<Interval> segments;
    std::vector<double> eigenvalues;
    std::vector<double> band_edges;
    std::vector<double> extra; // additional points at which xi is reported
};

inline constexpr int default_nodes_per_band = 64;

inline ShiftGrid make_shift_grid(const SpectralData& sd, const std::vector<double>& eigs,
                                 int nodes_per_band = default_nodes_per_band, double pad = 1.0)
{
    ShiftGrid grid;
    grid.eigenvalues = eigs;
    grid.band_edges = sd.band_edges;
    const double lowest = std::min(sd.band_edges.front(), eigs.empty() ? sd.band_edges.front() : eigs.front());
    const double highest = std::max(sd.band_edges.back(), eigs.empty() ? sd.band_edges.back() : eigs.back());
    grid.lambda_min = lowest - pad;
    grid.lambda_max = highest + pad;

    const auto ref = gauss_legendre(nodes_per_band);
    for (const auto& b : sd.bands)
        grid.bands.push_back({b, map_rule_cosine(ref, b.lo, b.hi)});

    std::vector<Interval> free_parts;
    free_parts.push_back({grid.lambda_min, sd.band_edges.front()});
    for (const auto& g : sd.gaps())
        free_parts.push_back(g);
    free_parts.push_back({sd.band_edges.back(), grid.lambda_max});
    for (const auto& part : free_parts) {
        double lo = part.lo;
        for (double e : eigs)
            if (e > part.lo && e < part.hi) {
                grid.segments.push_back({lo, e});
                lo = e;
            }
        grid.segments.push_back({lo, part.hi});
    }
    return grid;
}

inline ShiftGrid make_shift_grid(const Perturbation& p, int nodes_per_band = default_nodes_per_band)
{
    const auto sd = band_edges(p.background());
    return make_shift_grid(sd, eigenvalues(p, sd), nodes_per_band);
}

struct BandShift {
    Interval band;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> xi;
};

struct Plateau {
    Interval span;
    int value = 0;
    double raw = 0.0; // extrapolated value before snapping
};

/// xi(lambda) = (1/pi) arg alpha(lambda + i0), sampled on a ShiftGrid.
struct ShiftProfile {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    std::vector<BandShift> bands;
    std::vector<Plateau> plateaus;
    std::vector<std::pair<double, int>> eigenvalue_steps; // (rho_k, measured jump of xi)
    std::vector<double> epsilon_used;
    std::vector<std::pair<double, double>> extra;         // (lambda, xi)
    std::vector<std::string> warnings;
    double max_integrality_defect = 0.0;
};

inline const std::vector<double> default_epsilons{1e-2, 5e-3, 2.5e-3};

/// Plateau values are snapped to the nearest integer when within this distance.
inline constexpr double plateau_snap_tolerance = 1e-3;

namespace detail {

/// Lagrange weights for extrapolating samples at nodes h_i to h = 0.
inline std::vector<double> extrapolation_weights(const std::vector<double>& h)
{
    std::vector<double> w(h.size(), 1.0);
    for (std::size_t i = 0; i < h.size(); ++i)
        for (std::size_t k = 0; k < h.size(); ++k)
            if (k != i)
                w[i] *= h[k] / (h[k] - h[i]);
    return w;
}

/// Phase change of alpha along the horizontal path between two points,
/// bisecting until every step changes the argument by at most pi/2.
template <class Eval>
double tracked_phase_change(Eval&& eval, double la, cplx fa, double lb, cplx fb, int depth)
{
    const double d = std::arg(fb / fa);
    if (std::abs(d) <= 0.5 * std::numbers::pi)
        return d;
    if (depth >= 48)
        fail(ErrorKind::branch_tracking, "spectral_shift: phase jump > pi/2 persists near lambda = " +
                                             std::to_string(la) + " after maximal refinement");
    const double lm = 0.5 * (la + lb);
    const cplx fm = eval(lm);
    return tracked_phase_change(eval, la, fa, lm, fm, depth + 1) +
           tracked_phase_change(eval, lm, fm, lb, fb, depth + 1);
}

} // namespace detail

/// Spectral shift function on `grid`. For each epsilon the argument of
/// alpha(lambda + i eps s(lambda)) is tracked continuously from lambda_min
/// (where alpha > 0) and the epsilon -> 0 limit is taken by polynomial
/// (Richardson) extrapolation. The imaginary offset is eps s(lambda) with
/// s = clamp(d / (1000 eps_0), 1e-9, 1), d the distance to the nearest band
/// edge or eigenvalue, so that eps stays far below the distance to the
/// singular points of alpha.
inline ShiftProfile spectral_shift(const Perturbation& p, const ShiftGrid& grid,
                                   const std::vector<double>& epsilons = default_epsilons)
{
    if (epsilons.empty())
        fail(ErrorKind::input, "spectral_shift: need at least one epsilon");
    for (std::size_t i = 0; i < epsilons.size(); ++i)
        if (!(epsilons[i] > 0.0) || (i > 0 && !(epsilons[i] < epsilons[i - 1])))
            fail(ErrorKind::input, "spectral_shift: epsilons must be positive and strictly decreasing");

    const double alpha_min = alpha(p, cplx(grid.lambda_min, 0.0)).real();
    if (!(alpha_min > 0.0))
        fail(ErrorKind::branch_tracking, "spectral_shift: alpha(lambda_min) is not positive; an eigenvalue lies "
                                         "below the grid");

    std::vector<double> singular = grid.band_edges;
    singular.insert(singular.end(), grid.eigenvalues.begin(), grid.eigenvalues.end());
    const double eps0 = epsilons.front();
    auto local_scale = [&](double lambda) {
        double d = std::numeric_limits<double>::infinity();
        for (double s : singular)
            d = std::min(d, std::abs(lambda - s));
        return std::clamp(d / (1000.0 * eps0), 1e-9, 1.0);
    };

    // Sample points in increasing lambda: (lambda, kind, index, sub-index).
    enum Kind { anchor, node, plateau, extra_point };
    struct Sample {
        double lambda;
        Kind kind;
        std::size_t i;
        std::size_t k;
    };
    std::vector<Sample> samples;
    samples.push_back({grid.lambda_min, anchor, 0, 0});
    for (std::size_t b = 0; b < grid.bands.size(); ++b)
        for (std::size_t k = 0; k < grid.bands[b].rule.nodes.size(); ++k)
            samples.push_back({grid.bands[b].rule.nodes[k], node, b, k});
    for (std::size_t s = 0; s < grid.segments.size(); ++s)
        samples.push_back({grid.segments[s].mid(), plateau, s, 0});
    for (std::size_t e = 0; e < grid.extra.size(); ++e) {
        const double x = grid.extra[e];
        if (x < grid.lambda_min || x > grid.lambda_max)
            fail(ErrorKind::input, "spectral_shift: extra lambda outside [lambda_min, lambda_max]");
        for (double s : singular)
            if (std::abs(x - s) < band_edge_exclusion)
                fail(ErrorKind::input, "spectral_shift: lambda grid enters a band-edge/eigenvalue exclusion zone");
        samples.push_back({x, extra_point, e, 0});
    }
    samples.push_back({grid.lambda_max, anchor, 1, 0});
    std::stable_sort(samples.begin(), samples.end(),
                     [](const Sample& x, const Sample& y) { return x.lambda < y.lambda; });

    // xi_eps at every sample, one row per epsilon.
    std::vector<std::vector<double>> xi_eps(epsilons.size(), std::vector<double>(samples.size()));
    for (std::size_t ie = 0; ie < epsilons.size(); ++ie) {
        const double eps = epsilons[ie];
        auto eval = [&](double lambda) { return alpha(p, cplx(lambda, eps * local_scale(lambda))); };
        double lam = samples[0].lambda;
        cplx f = eval(lam);
        double phase = std::arg(f);
        xi_eps[ie][0] = phase / std::numbers::pi;
        for (std::size_t k = 1; k < samples.size(); ++k) {
            const double lam_next = samples[k].lambda;
            const cplx f_next = eval(lam_next);
            if (lam_next > lam)
                phase += detail::tracked_phase_change(eval, lam, f, lam_next, f_next, 0);
            xi_eps[ie][k] = phase / std::numbers::pi;
            lam = lam_next;
            f = f_next;
        }
    }

    const auto weights = detail::extrapolation_weights(epsilons);
    std::vector<double> xi(samples.size(), 0.0);
    for (std::size_t k = 0; k < samples.size(); ++k)
        for (std::size_t ie = 0; ie < epsilons.size(); ++ie)
            xi[k] += weights[ie] * xi_eps[ie][k];

    ShiftProfile prof;
    prof.lambda_min = grid.lambda_min;
    prof.lambda_max = grid.lambda_max;
    prof.epsilon_used = epsilons;
    for (const auto& b : grid.bands)
        prof.bands.push_back({b.band, b.rule.nodes, b.rule.weights, std::vector<double>(b.rule.nodes.size())});
    prof.plateaus.resize(grid.segments.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        switch (s.kind) {
        case node:
            prof.bands[s.i].xi[s.k] = xi[k];
            break;
        case plateau: {
            auto& pl = prof.plateaus[s.i];
            pl.span = grid.segments[s.i];
            pl.raw = xi[k];
            pl.value = static_cast<int>(std::lround(xi[k]));
            const double defect = std::abs(xi[k] - pl.value);
            prof.max_integrality_defect = std::max(prof.max_integrality_defect, defect);
            if (defect > plateau_snap_tolerance)
                fail(ErrorKind::branch_tracking, "spectral_shift: non-integer plateau " + std::to_string(xi[k]) +
                                                     " on [" + std::to_string(pl.span.lo) + ", " +
                                                     std::to_string(pl.span.hi) + "]");
            break;
        }
        case extra_point:
            prof.extra.emplace_back(s.lambda, xi[k]);
            break;
        case anchor:
            break;
        }
    }
    std::sort(prof.extra.begin(), prof.extra.end());

    for (double rho : grid.eigenvalues) {
        int left = 0, right = 0;
        for (const auto& pl : prof.plateaus) {
            if (pl.span.hi == rho)
                left = pl.value;
            if (pl.span.lo == rho)
                right = pl.value;
        }
        prof.eigenvalue_steps.emplace_back(rho, right - left);
        for (double e : grid.band_edges)
            if (std::abs(rho - e) < 1e-4)
                prof.warnings.push_back("eigenvalue " + std::to_string(rho) +
                                        " lies within 1e-4 of a band edge; moment integrals near it are less "
                                        "reliable");
    }
    if (!prof.plateaus.empty() && prof.plateaus.back().value != 0)
        fail(ErrorKind::branch_tracking, "spectral_shift: xi does not return to 0 above the spectrum");
    return prof;
}

/// Node doubling for the band quadrature. xi can vary sharply inside a band
/// (transmission resonances), so a fixed rule is only a starting point:
/// doubling stops once the band moments sum_k w_k xi_k t_k^m, m < 8, with t
/// the band coordinate in [-1, 1], of two successive rules agree to
/// `tolerance`.
struct ShiftRefinement {
    double tolerance = 1e-8; // 0 keeps the starting rule
    int max_nodes = 8192;
};

namespace detail {

inline std::vector<double> band_moments(const BandShift& b)
{
    std::vector<double> m(8, 0.0);
    for (std::size_t k = 0; k < b.nodes.size(); ++k) {
        const double t = (b.nodes[k] - b.band.mid()) / (0.5 * b.band.width());
        double tp = 1.0;
        for (double& x : m) {
            x += b.weights[k] * b.xi[k] * tp;
            tp *= t;
        }
    }
    return m;
}

inline ShiftGrid with_nodes_per_band(ShiftGrid grid, int n)
{
    const auto ref = gauss_legendre(n);
    for (auto& b : grid.bands)
        b.rule = map_rule_cosine(ref, b.band.lo, b.band.hi);
    return grid;
}

} // namespace detail

inline ShiftProfile spectral_shift(const Perturbation& p, const ShiftGrid& grid, const std::vector<double>& epsilons,
                                   const ShiftRefinement& refine)
{
    auto prof = spectral_shift(p, grid, epsilons);
    if (!(refine.tolerance > 0.0) || grid.bands.empty())
        return prof;
    int n = static_cast<int>(grid.bands.front().rule.nodes.size());
    double diff = 0.0;
    while (2 * n <= refine.max_nodes) {
        n *= 2;
        auto next = spectral_shift(p, detail::with_nodes_per_band(grid, n), epsilons);
        diff = 0.0;
        for (std::size_t b = 0; b < prof.bands.size(); ++b) {
            const auto m0 = detail::band_moments(prof.bands[b]), m1 = detail::band_moments(next.bands[b]);
            for (std::size_t k = 0; k < m0.size(); ++k)
                diff = std::max(diff, std::abs(m0[k] - m1[k]));
        }
        prof = std::move(next);
        if (diff <= refine.tolerance)
            return prof;
    }
    prof.warnings.push_back("band quadrature not converged at " + std::to_string(n) +
                            " nodes per band (moment change " + std::to_string(diff) + ")");
    return prof;
}

inline ShiftProfile spectral_shift(const Perturbation& p, const std::vector<double>& epsilons = default_epsilons,
                                   const ShiftRefinement& refine = {})
{
    return spectral_shift(p, make_shift_grid(p), epsilons, refine);
}

namespace detail {

inline void check_profile_covers(const ShiftProfile& prof, const SpectralData& sd)
{
    if (prof.bands.size() != sd.bands.size() || prof.lambda_min >= sd.band_edges.front() ||
        prof.lambda_max <= sd.band_edges.back())
        fail(ErrorKind::profile_incomplete, "shift profile does not cover the spectrum of H_q");
}

} // namespace detail

/// alpha(z) = (1/A) exp( int xi(lambda) / (lambda - z) dlambda ): Gauss sums
/// over the bands, closed-form logarithms over the integer plateaus. For real
/// z inside a plateau the boundary value from Im z > 0 is returned.
inline cplx alpha_from_shift(const Perturbation& p, const ShiftProfile& prof, cplx z)
{
    const auto sd = band_edges(p.background());
    detail::check_profile_covers(prof, sd);
    for (const auto& pl : prof.plateaus)
        if (pl.value != 0 && (pl.span.lo < prof.lambda_min || pl.span.hi > prof.lambda_max))
            fail(ErrorKind::profile_incomplete, "shift profile plateau outside its lambda range");

    const bool real_z = z.imag() == 0.0;
    if (real_z && sd.in_spectrum(z.real()))
        fail(ErrorKind::input, "alpha_from_shift: real z must lie off the spectrum");

    cplx integral = 0.0;
    for (const auto& b : prof.bands)
        for (std::size_t k = 0; k < b.nodes.size(); ++k)
            integral += b.weights[k] * b.xi[k] / (b.nodes[k] - z);
    for (const auto& pl : prof.plateaus) {
        if (pl.value == 0)
            continue;
        const double lo = pl.span.lo, hi = pl.span.hi;
        if (real_z && (z.real() == lo || z.real() == hi))
            fail(ErrorKind::eigenvalue_hit, "alpha_from_shift: z coincides with a plateau endpoint");
        cplx seg;
        if (real_z && z.real() > lo && z.real() < hi)
            seg = std::log((hi - z.real()) / (z.real() - lo)) + cplx(0.0, std::numbers::pi);
        else
            seg = std::log((hi - z) / (lo - z));
        integral += static_cast<double>(pl.value) * seg;
    }
    return std::exp(integral) / alpha_asymptotics(p).A();
}

// ---------------------------------------------------------------------------
// Trace formulas
// ---------------------------------------------------------------------------

/// tau_j = tr(H^j - H_q^j), computed exactly: the diagonal of the difference
/// vanishes more than j sites away from supp(H - H_q), and a truncation with a
/// margin of 2j reproduces (H^j)(n, n) on the inner sites.
inline double trace_direct(const Perturbation& p, int j)
{
    if (j < 1)
        fail(ErrorKind::input, "trace_direct: order must be >= 1");
    if (p.empty())
        return 0.0;
    const auto& bg = p.background();
    const auto sup = p.support();
    const int inner_lo = sup.first - j, inner_hi = sup.last + j;
    const int lo = inner_lo - j - 1, hi = inner_hi + j + 1;
    const int m = hi - lo + 1;

    auto diag_power = [&](auto&& acoef, auto&& bcoef, int n) {
        std::vector<double> v(m, 0.0), next(m, 0.0);
        v[n - lo] = 1.0;
        for (int step = 0; step < j; ++step) {
            for (int i = 0; i < m; ++i) {
                const int site = lo + i;
                double s = bcoef(site) * v[i];
                if (i + 1 < m)
                    s += acoef(site) * v[i + 1];
                if (i > 0)
                    s += acoef(site - 1) * v[i - 1];
                next[i] = s;
            }
            std::swap(v, next);
        }
        return v[n - lo];
    };
    auto pa = [&](int n) { return p.a(n); };
    auto pb = [&](int n) { return p.b(n); };
    auto qa = [&](int n) { return bg.a(n); };
    auto qb = [&](int n) { return bg.b(n); };

    double tau = 0.0;
    for (int n = inner_lo; n <= inner_hi; ++n)
        tau += diag_power(pa, pb, n) - diag_power(qa, qb, n);
    return tau;
}

inline constexpr int laurent_samples = 256;

/// Laurent coefficients alpha_1..alpha_J of A alpha(z) = sum_j alpha_j z^{-j}
/// from the trapezoidal rule on |z| = radius (default 2 x Gershgorin bound).
inline std::vector<double> alpha_expansion(const Perturbation& p, int J, double radius = 0.0)
{
    if (J < 1 || J > 12)
        fail(ErrorKind::input, "alpha_expansion: order must be in [1, 12]");
    const double bound = p.gershgorin_bound();
    if (radius == 0.0)
        radius = 2.0 * bound;
    if (!(radius > 1.5 * bound))
        fail(ErrorKind::radius_too_small, "alpha_expansion: circle |z| = " + std::to_string(radius) +
                                              " meets the padded spectral interval [-1.5 B, 1.5 B], B = " +
                                              std::to_string(bound));
    if (p.empty())
        return std::vector<double>(J, 0.0);
    const double A = alpha_asymptotics(p).A();
    std::vector<cplx> acc(J + 1, 0.0);
    for (int m = 0; m < laurent_samples; ++m) {
        const double theta = 2.0 * std::numbers::pi * m / laurent_samples;
        const cplx e = std::polar(1.0, theta);
        const cplx f = A * alpha(p, radius * e);
        cplx rk = 1.0;
        for (int j = 1; j <= J; ++j) {
            rk *= radius * e;
            acc[j] += f * rk;
        }
    }
    std::vector<double> out(J);
    for (int j = 1; j <= J; ++j)
        out[j - 1] = acc[j].real() / laurent_samples;
    return out;
}

/// tau_1 = -alpha_1, tau_j = -j alpha_j - sum_{k=1}^{j-1} alpha_{j-k} tau_k.
inline std::vector<double> tau_from_recursion(const std::vector<double>& alphas)
{
    std::vector<double> tau(alphas.size());
    for (std::size_t j = 1; j <= alphas.size(); ++j) {
        double t = -static_cast<double>(j) * alphas[j - 1];
        for (std::size_t k = 1; k < j; ++k)
            t -= alphas[j - k - 1] * tau[k - 1];
        tau[j - 1] = t;
    }
    return tau;
}

/// tau_j = j int lambda^{j-1} xi(lambda) dlambda.
inline double trace_via_shift(const ShiftProfile& prof, int j)
{
    if (j < 1)
        fail(ErrorKind::input, "trace_via_shift: order must be >= 1");
    if (prof.bands.empty())
        fail(ErrorKind::profile_incomplete, "trace_via_shift: profile has no bands");
    double integral = 0.0;
    for (const auto& b : prof.bands)
        for (std::size_t k = 0; k < b.nodes.size(); ++k)
            integral += b.weights[k] * std::pow(b.nodes[k], j - 1) * b.xi[k];
    for (const auto& pl : prof.plateaus)
        if (pl.value != 0)
            integral += pl.value * (std::pow(pl.span.hi, j) - std::pow(pl.span.lo, j)) / j;
    return j * integral;
}

enum class TraceMethod { direct, moment, recursion };

inline std::string_view to_string(TraceMethod m)
{
    switch (m) {
    case TraceMethod::direct: return "direct";
    case TraceMethod::moment: return "moment";
    case TraceMethod::recursion: return "recursion";
    }
    return "";
}

struct TraceReport {
    TraceMethod method = TraceMethod::direct;
    int J = 0;
    std::vector<double> taus;
};

inline TraceReport trace_report_direct(const Perturbation& p, int J)
{
    TraceReport r{TraceMethod::direct, J, {}};
    for (int j = 1; j <= J; ++j)
        r.taus.push_back(trace_direct(p, j));
    return r;
}

inline TraceReport trace_report_recursion(const Perturbation& p, int J, double radius = 0.0)
{
    return {TraceMethod::recursion, J, tau_from_recursion(alpha_expansion(p, J, radius))};
}

inline TraceReport trace_report_moment(const ShiftProfile& prof, int J)
{
    TraceReport r{TraceMethod::moment, J, {}};
    for (int j = 1; j <= J; ++j)
        r.taus.push_back(trace_via_shift(prof, j));
    return r;
}

} // namespace jacobi_scatter

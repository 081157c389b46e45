#pragma once

// Compactly supported perturbations H of a periodic background H_q: Jost
// solutions, Wronskians, the inverse transmission coefficient alpha(z),
// its asymptotic constants, the Green's function and the discrete spectrum.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "background.hpp"

namespace jacobi_scatter {

/// H with a(n), b(n) prescribed on a finite window and equal to the
/// background outside it.
class Perturbation {
public:
    /// Zero perturbation (empty window).
    explicit Perturbation(BackgroundOperator bg) : bg_(std::move(bg)) {}

    Perturbation(BackgroundOperator bg, int first, std::vector<double> a, std::vector<double> b)
        : bg_(std::move(bg)), first_(first), a_(std::move(a)), b_(std::move(b))
    {
        if (a_.size() != b_.size())
            fail(ErrorKind::input, "perturbation: a and b must have the window length");
        for (double v : a_)
            if (!(v > 0.0) || !std::isfinite(v))
                fail(ErrorKind::input, "perturbation: a(n) must be finite and positive");
        for (double v : b_)
            if (!std::isfinite(v))
                fail(ErrorKind::input, "perturbation: b(n) must be finite");
    }

    /// a = a_q + da, b = b_q + db on [first, first + size).
    static Perturbation from_deviation(BackgroundOperator bg, int first, const std::vector<double>& da,
                                       const std::vector<double>& db)
    {
        std::vector<double> a(da.size()), b(db.size());
        for (std::size_t i = 0; i < da.size(); ++i)
            a[i] = bg.a(first + static_cast<int>(i)) + da[i];
        for (std::size_t i = 0; i < db.size(); ++i)
            b[i] = bg.b(first + static_cast<int>(i)) + db[i];
        return {std::move(bg), first, std::move(a), std::move(b)};
    }

    const BackgroundOperator& background() const { return bg_; }
    SiteRange window() const { return {first_, first_ + static_cast<int>(a_.size()) - 1}; }
    bool empty() const { return a_.empty(); }
    const std::vector<double>& a_window() const { return a_; }
    const std::vector<double>& b_window() const { return b_; }

    double a(int n) const { return window().contains(n) ? a_[static_cast<std::size_t>(n - first_)] : bg_.a(n); }
    double b(int n) const { return window().contains(n) ? b_[static_cast<std::size_t>(n - first_)] : bg_.b(n); }

    /// Sites where H - H_q has a nonzero entry in its row: [n-, n+ + 1].
    SiteRange support() const { return empty() ? SiteRange{} : SiteRange{first_, window().last + 1}; }

    /// max |b| + 2 max a over the whole lattice.
    double gershgorin_bound() const
    {
        double bmax = 0.0, amax = 0.0;
        for (double v : bg_.b_period())
            bmax = std::max(bmax, std::abs(v));
        for (double v : b_)
            bmax = std::max(bmax, std::abs(v));
        for (double v : bg_.a_period())
            amax = std::max(amax, v);
        for (double v : a_)
            amax = std::max(amax, v);
        return bmax + 2.0 * amax;
    }

private:
    BackgroundOperator bg_;
    int first_ = 0;
    std::vector<double> a_;
    std::vector<double> b_;
};

struct JostSolution {
    Side side = Side::plus;
    cplx z;
    SiteSeries values;
};

namespace detail {

/// Jost solution (and optionally its z-derivative) on `range`, seeded from
/// the Floquet branch outside the window: psi_+ = psi_{q,+} for n >= n+ + 1,
/// psi_- = psi_{q,-} for n <= n- - 1, three-term recurrence of H elsewhere.
struct JostSeries {
    SiteSeries values;
    SiteSeries derivative;
};

inline JostSeries jost_series(const Perturbation& p, const FloquetBasis& fb, Side side, SiteRange range,
                              bool with_derivative)
{
    const auto& br = fb.branch(side);
    const cplx z = fb.z;
    JostSeries out;
    if (p.empty()) {
        out.values.first = out.derivative.first = range.first;
        for (int n = range.first; n <= range.last; ++n) {
            out.values.values.push_back(br.value(n));
            if (with_derivative)
                out.derivative.values.push_back(br.derivative(n));
        }
        return out;
    }

    const SiteRange win = p.window();
    if (side == Side::plus) {
        const int seed = win.last + 1;
        const int lo = std::min(range.first, seed), hi = std::max(range.last, seed + 1);
        SiteSeries v{lo, std::vector<cplx>(hi - lo + 1)}, dv{lo, std::vector<cplx>(hi - lo + 1)};
        for (int n = seed; n <= hi; ++n) {
            v(n) = br.value(n);
            if (with_derivative)
                dv(n) = br.derivative(n);
        }
        for (int n = seed; n > lo; --n) {
            v(n - 1) = ((z - p.b(n)) * v(n) - p.a(n) * v(n + 1)) / p.a(n - 1);
            if (with_derivative)
                dv(n - 1) = ((z - p.b(n)) * dv(n) + v(n) - p.a(n) * dv(n + 1)) / p.a(n - 1);
        }
        out.values = std::move(v);
        out.derivative = std::move(dv);
    } else {
        const int seed = win.first - 1;
        const int lo = std::min(range.first, seed - 1), hi = std::max(range.last, seed);
        SiteSeries v{lo, std::vector<cplx>(hi - lo + 1)}, dv{lo, std::vector<cplx>(hi - lo + 1)};
        for (int n = lo; n <= seed; ++n) {
            v(n) = br.value(n);
            if (with_derivative)
                dv(n) = br.derivative(n);
        }
        for (int n = seed; n < hi; ++n) {
            v(n + 1) = ((z - p.b(n)) * v(n) - p.a(n - 1) * v(n - 1)) / p.a(n);
            if (with_derivative)
                dv(n + 1) = ((z - p.b(n)) * dv(n) + v(n) - p.a(n - 1) * dv(n - 1)) / p.a(n);
        }
        out.values = std::move(v);
        out.derivative = std::move(dv);
    }
    // Trim to the requested range.
    auto trim = [&](SiteSeries& s) {
        if (s.values.empty())
            return;
        SiteSeries t{range.first, {}};
        for (int n = range.first; n <= range.last; ++n)
            t.values.push_back(s(n));
        s = std::move(t);
    };
    trim(out.values);
    if (with_derivative)
        trim(out.derivative);
    else
        out.derivative = SiteSeries{range.first, {}};
    return out;
}

/// Site at which alpha's Wronskians are evaluated: inside the window, as close to 0 as possible.
inline int wronskian_site(const Perturbation& p)
{
    return p.empty() ? 0 : std::clamp(0, p.window().first, p.window().last);
}

inline cplx site_wronskian(const Perturbation& p, int n, const SiteSeries& minus, const SiteSeries& plus)
{
    return p.a(n) * (minus(n) * plus(n + 1) - minus(n + 1) * plus(n));
}

struct AlphaJet {
    cplx value;
    cplx derivative;
    cplx w;     // perturbed Wronskian (internal normalization)
    cplx w_q;   // background Wronskian (same normalization)
};

inline AlphaJet alpha_jet(const Perturbation& p, cplx z, bool with_derivative)
{
    const auto& bg = p.background();
    const auto fb = floquet_basis(bg, z, false);
    const int s = wronskian_site(p);
    AlphaJet out;
    if (p.empty()) {
        // W = W_q identically; skip the rounding of the ratio
        out.w = out.w_q = fb.wronskian(bg, s);
        out.value = 1.0;
        out.derivative = 0.0;
        return out;
    }
    const SiteRange r{s, s + 1};
    const auto jp = jost_series(p, fb, Side::plus, r, with_derivative);
    const auto jm = jost_series(p, fb, Side::minus, r, with_derivative);
    out.w = site_wronskian(p, s, jm.values, jp.values);
    out.w_q = fb.wronskian(bg, s);
    out.value = out.w / out.w_q;
    if (with_derivative) {
        const cplx dw = p.a(s) * (jm.derivative(s) * jp.values(s + 1) + jm.values(s) * jp.derivative(s + 1) -
                                  jm.derivative(s + 1) * jp.values(s) - jm.values(s + 1) * jp.derivative(s));
        const cplx dwq = fb.wronskian_derivative(bg, s);
        out.derivative = (dw * out.w_q - out.w * dwq) / (out.w_q * out.w_q);
    }
    return out;
}

} // namespace detail

/// Jost solution psi_side(z, n) on `window` (Floquet normalization
/// psi_{q,+-}(z, 0) = 1 inherited from the background solutions).
inline JostSolution jost(const Perturbation& p, cplx z, Side side, SiteRange window)
{
    const auto fb = detail::floquet_basis(p.background(), z, true);
    return {side, z, detail::jost_series(p, fb, side, window, false).values};
}

/// d/dz psi_side(z, n) on `window`, by differentiating the recurrence seeded
/// with the differentiated Floquet eigenvector.
inline SiteSeries jost_z_derivative(const Perturbation& p, cplx z, Side side, SiteRange window)
{
    const auto fb = detail::floquet_basis(p.background(), z, true);
    return detail::jost_series(p, fb, side, window, true).derivative;
}

/// W_n(psi_-, psi_+) at site n (default: a site inside the window).
inline cplx wronskian(const Perturbation& p, cplx z, std::optional<int> site = std::nullopt)
{
    const int n = site.value_or(detail::wronskian_site(p));
    const auto fb = detail::floquet_basis(p.background(), z, true);
    const SiteRange r{n, n + 1};
    return detail::site_wronskian(p, n, detail::jost_series(p, fb, Side::minus, r, false).values,
                                  detail::jost_series(p, fb, Side::plus, r, false).values);
}

/// alpha(z) = W(psi_-, psi_+) / W_q(psi_{q,-}, psi_{q,+}), the inverse
/// transmission coefficient.
inline cplx alpha(const Perturbation& p, cplx z) { return detail::alpha_jet(p, z, false).value; }

/// alpha'(z) from the differentiated Wronskians.
inline cplx alpha_derivative(const Perturbation& p, cplx z) { return detail::alpha_jet(p, z, true).derivative; }

/// alpha(z) by the second route, prod_j (z - mu_j) W(psi_-, psi_+) / R^{1/2}(z),
/// with the branch of `r_sqrt` and psi normalized by psi_{q,+-}(z, 0) = 1.
inline cplx alpha_via_dirichlet(const Perturbation& p, const SpectralData& sd, cplx z)
{
    cplx prod = 1.0;
    for (double mu : sd.dirichlet)
        prod *= z - mu;
    return prod * wronskian(p, z) / r_sqrt(sd, z);
}

/// A_+-(n), B_+-(n) and the constants A, B of alpha(z) = (1 + B/z + ...)/A.
class AsymptoticData {
public:
    explicit AsymptoticData(const Perturbation& p) : first_(p.window().first)
    {
        for (int n = p.window().first; n <= p.window().last; ++n) {
            ratio_.push_back(p.a(n) / p.background().a(n));
            db_.push_back(p.background().b(n) - p.b(n));
        }
    }

    /// prod_{j >= n} a(j)/a_q(j)
    double A_plus(int n) const
    {
        double r = 1.0;
        for (std::size_t i = 0; i < ratio_.size(); ++i)
            if (site(i) >= n)
                r *= ratio_[i];
        return r;
    }

    /// sum_{m >= n+1} (b_q(m) - b(m))
    double B_plus(int n) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < db_.size(); ++i)
            if (site(i) >= n + 1)
                s += db_[i];
        return s;
    }

    /// prod_{j <= n-1} a(j)/a_q(j)
    double A_minus(int n) const
    {
        double r = 1.0;
        for (std::size_t i = 0; i < ratio_.size(); ++i)
            if (site(i) <= n - 1)
                r *= ratio_[i];
        return r;
    }

    /// sum_{m <= n-1} (b_q(m) - b(m))
    double B_minus(int n) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < db_.size(); ++i)
            if (site(i) <= n - 1)
                s += db_[i];
        return s;
    }

    double A() const { return A_minus(0) * A_plus(0); }
    double B() const { return B_minus(1) + B_plus(0); }

private:
    int site(std::size_t i) const { return first_ + static_cast<int>(i); }

    int first_;
    std::vector<double> ratio_;
    std::vector<double> db_;
};

inline AsymptoticData alpha_asymptotics(const Perturbation& p) { return AsymptoticData(p); }

/// Relative size of |W|/|W_q| below which z is treated as a discrete eigenvalue.
inline constexpr double eigenvalue_hit_tolerance = 1e-14;

/// G(z, m, n) = psi_-(min) psi_+(max) / W.
inline cplx green(const Perturbation& p, cplx z, int m, int n)
{
    const auto fb = detail::floquet_basis(p.background(), z, false);
    const int lo = std::min(m, n), hi = std::max(m, n);
    const int s = detail::wronskian_site(p);
    const SiteRange r{std::min(lo, s), std::max(hi, s + 1)};
    const auto jm = detail::jost_series(p, fb, Side::minus, r, false).values;
    const auto jp = detail::jost_series(p, fb, Side::plus, r, false).values;
    const cplx w = detail::site_wronskian(p, s, jm, jp);
    if (std::abs(w) <= eigenvalue_hit_tolerance * std::abs(fb.wronskian(p.background(), s)))
        fail(ErrorKind::eigenvalue_hit, "green: z is (numerically) a discrete eigenvalue of H");
    return jm(lo) * jp(hi) / w;
}

/// G(z, n, n) - G_q(z, n, n) for every n in `range`.
inline std::vector<cplx> green_diagonal_difference(const Perturbation& p, cplx z, SiteRange range)
{
    const auto& bg = p.background();
    const auto fb = detail::floquet_basis(bg, z, false);
    const int s = detail::wronskian_site(p);
    const SiteRange r{std::min(range.first, s), std::max(range.last, s + 1)};
    const auto jm = detail::jost_series(p, fb, Side::minus, r, false).values;
    const auto jp = detail::jost_series(p, fb, Side::plus, r, false).values;
    const cplx w = detail::site_wronskian(p, s, jm, jp);
    const cplx wq = fb.wronskian(bg, s);
    if (std::abs(w) <= eigenvalue_hit_tolerance * std::abs(wq))
        fail(ErrorKind::eigenvalue_hit, "green: z is (numerically) a discrete eigenvalue of H");
    std::vector<cplx> out;
    for (int n = range.first; n <= range.last; ++n)
        out.push_back(jm(n) * jp(n) / w - fb.minus.value(n) * fb.plus.value(n) / wq);
    return out;
}

/// Sampling grid on an open real interval used by the eigenvalue search:
/// uniform spacing <= `step`, graded geometrically towards the ends that are
/// band edges down to the exclusion radius.
inline std::vector<double> gap_search_grid(double lo, double hi, bool lo_is_edge, bool hi_is_edge,
                                           double step = 1e-3, double exclusion = band_edge_exclusion)
{
    std::vector<double> x;
    const double a = lo + (lo_is_edge ? exclusion : 0.0);
    const double b = hi - (hi_is_edge ? exclusion : 0.0);
    if (!(b > a))
        return x;
    const int n = std::max(2, static_cast<int>(std::ceil((b - a) / step)) + 1);
    for (int i = 0; i < n; ++i)
        x.push_back(a + (b - a) * i / (n - 1));
    for (double d = exclusion; d < step; d *= 2.0) {
        if (lo_is_edge && lo + d < b)
            x.push_back(lo + d);
        if (hi_is_edge && hi - d > a)
            x.push_back(hi - d);
    }
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    return x;
}

/// Discrete eigenvalues of H: zeros of alpha on R minus sigma(H_q), located by
/// sign changes on `gap_search_grid` within the padded Gershgorin interval and
/// refined by bracketed Newton. Eigenvalues within the band-edge exclusion
/// zone are not searched for.
inline std::vector<double> eigenvalues(const Perturbation& p, const SpectralData& sd)
{
    if (p.empty())
        return {};
    const double bound = p.gershgorin_bound() + 1.0;
    struct Piece {
        double lo, hi;
        bool lo_edge, hi_edge;
    };
    std::vector<Piece> pieces;
    pieces.push_back({-bound, sd.band_edges.front(), false, true});
    for (const auto& g : sd.gaps())
        pieces.push_back({g.lo, g.hi, true, true});
    pieces.push_back({sd.band_edges.back(), bound, true, false});

    auto f = [&](double x) { return alpha(p, cplx(x, 0.0)).real(); };
    auto fd = [&](double x) {
        const auto jet = detail::alpha_jet(p, cplx(x, 0.0), true);
        return std::pair{jet.value.real(), jet.derivative.real()};
    };

    std::vector<double> roots;
    for (const auto& pc : pieces) {
        const auto grid = gap_search_grid(pc.lo, pc.hi, pc.lo_edge, pc.hi_edge);
        if (grid.size() < 2)
            continue;
        double x0 = grid[0], f0 = f(x0);
        for (std::size_t i = 1; i < grid.size(); ++i) {
            const double x1 = grid[i], f1 = f(x1);
            if (f0 == 0.0) {
                roots.push_back(x0);
            } else if (f1 != 0.0 && !detail::same_sign(f0, f1)) {
                try {
                    roots.push_back(detail::bracketed_newton(fd, x0, x1));
                } catch (const Error& e) {
                    fail(ErrorKind::convergence, "eigenvalues: refinement failed on [" + std::to_string(x0) + ", " +
                                                     std::to_string(x1) + "]: " + e.what());
                }
            }
            x0 = x1;
            f0 = f1;
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

inline std::vector<double> eigenvalues(const Perturbation& p) { return eigenvalues(p, band_edges(p.background())); }

} // namespace jacobi_scatter

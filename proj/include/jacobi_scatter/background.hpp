#pragma once

// Periodic Jacobi operators H_q f(n) = a_q(n) f(n+1) + a_q(n-1) f(n-1) + b_q(n) f(n)
// and their Floquet theory: monodromy, discriminant, band structure, Floquet
// (Baker-Akhiezer) solutions, Dirichlet data, Wronskian and Green's function.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "roots.hpp"

namespace jacobi_scatter {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

enum class Side { minus, plus };

inline constexpr Side opposite(Side s) { return s == Side::plus ? Side::minus : Side::plus; }

/// Closed range of lattice sites [first, last]; empty when last < first.
struct SiteRange {
    int first = 0;
    int last = -1;

    int size() const { return last >= first ? last - first + 1 : 0; }
    bool empty() const { return last < first; }
    bool contains(int n) const { return n >= first && n <= last; }
};

/// Complex values indexed by lattice site.
struct SiteSeries {
    int first = 0;
    std::vector<cplx> values;

    int last() const { return first + static_cast<int>(values.size()) - 1; }
    SiteRange range() const { return {first, last()}; }
    cplx operator()(int n) const { return values.at(static_cast<std::size_t>(n - first)); }
    cplx& operator()(int n) { return values.at(static_cast<std::size_t>(n - first)); }
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

namespace detail {

inline int floor_div(int n, int d)
{
    int q = n / d;
    if ((n % d != 0) && ((n < 0) != (d < 0)))
        --q;
    return q;
}

inline cplx ipow(cplx x, int k)
{
    if (k < 0)
        return 1.0 / ipow(x, -k);
    cplx r = 1.0;
    while (k > 0) {
        if (k & 1)
            r *= x;
        x *= x;
        k >>= 1;
    }
    return r;
}

} // namespace detail

/// Period-N Jacobi operator, coefficients extended periodically to all of Z.
class BackgroundOperator {
public:
    BackgroundOperator(std::vector<double> a, std::vector<double> b)
        : a_(std::move(a)), b_(std::move(b))
    {
        if (a_.empty() || a_.size() != b_.size())
            fail(ErrorKind::input, "background: a and b must be non-empty and of equal length");
        for (double v : a_)
            if (!(v > 0.0) || !std::isfinite(v))
                fail(ErrorKind::input, "background: a_q(n) must be finite and positive");
        for (double v : b_)
            if (!std::isfinite(v))
                fail(ErrorKind::input, "background: b_q(n) must be finite");
    }

    /// Constant coefficients; the default is the free operator a = 1/2, b = 0.
    static BackgroundOperator constant(double a = 0.5, double b = 0.0) { return {{a}, {b}}; }

    int period() const { return static_cast<int>(a_.size()); }
    double a(int n) const { return a_[wrap(n)]; }
    double b(int n) const { return b_[wrap(n)]; }
    const std::vector<double>& a_period() const { return a_; }
    const std::vector<double>& b_period() const { return b_; }

    /// max |b| + 2 max a; every spectral point of H_q lies in [-bound, bound].
    double gershgorin_bound() const
    {
        double bmax = 0.0, amax = 0.0;
        for (double v : b_)
            bmax = std::max(bmax, std::abs(v));
        for (double v : a_)
            amax = std::max(amax, v);
        return bmax + 2.0 * amax;
    }

    bool operator==(const BackgroundOperator&) const = default;

private:
    int wrap(int n) const
    {
        const int N = period();
        const int r = n % N;
        return r < 0 ? r + N : r;
    }

    std::vector<double> a_;
    std::vector<double> b_;
};

/// Band edges E_0 < ... < E_{2g+1} (closed gaps removed), Dirichlet
/// eigenvalues mu_1..mu_g at base point 0, and the bands themselves.
struct SpectralData {
    std::vector<double> band_edges;
    int genus = 0;
    std::vector<double> dirichlet;
    std::vector<Interval> bands;

    std::vector<Interval> gaps() const
    {
        std::vector<Interval> out;
        for (std::size_t j = 0; j + 1 < bands.size(); ++j)
            out.push_back({bands[j].hi, bands[j + 1].lo});
        return out;
    }

    bool in_spectrum(double x) const
    {
        return std::any_of(bands.begin(), bands.end(), [x](const Interval& b) { return b.contains(x); });
    }

    double distance_to_edges(cplx z) const
    {
        double d = std::numeric_limits<double>::infinity();
        for (double e : band_edges)
            d = std::min(d, std::abs(z - e));
        return d;
    }

    /// Distance from z to the union of the bands.
    double distance_to_spectrum(cplx z) const
    {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& b : bands) {
            const double x = std::clamp(z.real(), b.lo, b.hi);
            d = std::min(d, std::abs(z - x));
        }
        return d;
    }
};

/// Solution values of H_q psi = z psi with its per-period multiplier w
/// (|w| < 1 off the spectrum); psi(n + N) = w^{+1} psi(n) for side plus and
/// w^{-1} psi(n) for side minus.
struct FloquetSolution {
    cplx multiplier;
    Side side = Side::plus;
    SiteSeries values;
};

/// Default radius of the band-edge exclusion zone used by z-grid generators.
inline constexpr double band_edge_exclusion = 1e-6;

// ---------------------------------------------------------------------------
// Transfer matrices
// ---------------------------------------------------------------------------

/// Maps (psi(n), psi(n-1)) to (psi(n+1), psi(n)) for H_q psi = z psi.
/// Its determinant is a_q(n-1)/a_q(n), so one full period is unimodular.
inline Mat2 transfer_matrix(const BackgroundOperator& bg, cplx z, int n)
{
    Mat2 t;
    t << (z - bg.b(n)) / bg.a(n), -bg.a(n - 1) / bg.a(n), 1.0, 0.0;
    return t;
}

struct MonodromyJet {
    Mat2 value;
    Mat2 derivative; // d/dz
};

/// Monodromy over sites 0..N-1 and its z-derivative (product rule, forward mode).
inline MonodromyJet monodromy_jet(const BackgroundOperator& bg, cplx z)
{
    Mat2 m = Mat2::Identity();
    Mat2 dm = Mat2::Zero();
    for (int n = 0; n < bg.period(); ++n) {
        const Mat2 t = transfer_matrix(bg, z, n);
        Mat2 dt = Mat2::Zero();
        dt(0, 0) = 1.0 / bg.a(n);
        dm = (dt * m + t * dm).eval();
        m = (t * m).eval();
    }
    return {m, dm};
}

inline Mat2 monodromy(const BackgroundOperator& bg, cplx z) { return monodromy_jet(bg, z).value; }

/// Delta(z) = tr M(z), a degree-N polynomial with leading coefficient 1/prod a_q.
inline cplx discriminant(const BackgroundOperator& bg, cplx z) { return monodromy(bg, z).trace(); }

inline cplx discriminant_derivative(const BackgroundOperator& bg, cplx z)
{
    return monodromy_jet(bg, z).derivative.trace();
}

// ---------------------------------------------------------------------------
// Band structure
// ---------------------------------------------------------------------------

namespace detail {

inline double real_discriminant(const BackgroundOperator& bg, double x)
{
    return discriminant(bg, cplx(x, 0.0)).real();
}

inline std::pair<double, double> real_discriminant_jet(const BackgroundOperator& bg, double x)
{
    const auto jet = monodromy_jet(bg, cplx(x, 0.0));
    return {jet.value.trace().real(), jet.derivative.trace().real()};
}

/// Off-corner entry m12 of the monodromy: the solution with psi(0) = 0,
/// psi(-1) = 1 evaluated at site N. Its zeros are the Dirichlet eigenvalues.
inline double dirichlet_function(const BackgroundOperator& bg, double x)
{
    return monodromy(bg, cplx(x, 0.0))(0, 1).real();
}

inline std::vector<double> dirichlet_in_gaps(const BackgroundOperator& bg, const std::vector<Interval>& gaps)
{
    std::vector<double> mu;
    for (const auto& gap : gaps) {
        const double flo = dirichlet_function(bg, gap.lo), fhi = dirichlet_function(bg, gap.hi);
        const double scale = std::abs(monodromy(bg, cplx(gap.mid(), 0.0))(0, 1)) + 1.0;
        if (std::abs(flo) <= 1e-13 * scale) {
            mu.push_back(gap.lo);
        } else if (std::abs(fhi) <= 1e-13 * scale) {
            mu.push_back(gap.hi);
        } else if (same_sign(flo, fhi)) {
            fail(ErrorKind::root_finding, "dirichlet: no sign change of m12 on gap [" + std::to_string(gap.lo) +
                                              ", " + std::to_string(gap.hi) + "]");
        } else {
            mu.push_back(bisect([&](double x) { return dirichlet_function(bg, x); }, gap.lo, gap.hi));
        }
    }
    return mu;
}

} // namespace detail

/// Closed-gap detection threshold on edge separation.
inline constexpr double closed_gap_tolerance = 1e-9;

/// Band edges as the real roots of Delta -+ 2. Initial approximations come
/// from the colleague matrix of the Chebyshev interpolant (N+1 points); each
/// edge is then polished by bracketed Newton iteration with the analytic
/// Delta'. Gaps narrower than `closed_gap_tolerance` are treated as closed.
inline SpectralData band_edges(const BackgroundOperator& bg)
{
    const int N = bg.period();
    const double R = bg.gershgorin_bound() + 1.0;

    auto c = detail::chebyshev_interpolate([&](double t) { return detail::real_discriminant(bg, R * t); }, N);
    std::vector<double> approx;
    for (double shift : {-2.0, 2.0}) {
        auto cs = c;
        cs[0] += shift;
        for (cplx r : detail::chebyshev_roots(cs))
            approx.push_back(R * r.real());
    }
    std::sort(approx.begin(), approx.end());

    std::vector<double> mids(N);
    for (int k = 0; k < N; ++k) {
        mids[k] = 0.5 * (approx[2 * k] + approx[2 * k + 1]);
        if (std::abs(detail::real_discriminant(bg, mids[k])) > 2.0 + 1e-6)
            fail(ErrorKind::root_finding, "band_edges: root approximations are inconsistent (ill-conditioned background)");
    }

    auto solve_level = [&](double target, double lo, double hi) {
        return detail::bracketed_newton(
            [&](double x) {
                auto [d, dd] = detail::real_discriminant_jet(bg, x);
                return std::pair{d - target, dd};
            },
            lo, hi);
    };
    auto level_of = [](double v) { return v > 0.0 ? 2.0 : -2.0; };

    SpectralData out;
    const double left = solve_level(level_of(detail::real_discriminant(bg, -R)), -R, mids.front());
    const double right = solve_level(level_of(detail::real_discriminant(bg, R)), mids.back(), R);

    out.band_edges.push_back(left);
    for (int k = 0; k + 1 < N; ++k) {
        const double extremum = detail::bisect(
            [&](double x) { return detail::real_discriminant_jet(bg, x).second; }, mids[k], mids[k + 1]);
        const double peak = detail::real_discriminant(bg, extremum);
        if (std::abs(peak) <= 2.0)
            continue;
        const double lo = solve_level(level_of(peak), mids[k], extremum);
        const double hi = solve_level(level_of(peak), extremum, mids[k + 1]);
        if (hi - lo < closed_gap_tolerance)
            continue;
        out.band_edges.push_back(lo);
        out.band_edges.push_back(hi);
    }
    out.band_edges.push_back(right);

    out.genus = static_cast<int>(out.band_edges.size()) / 2 - 1;
    for (std::size_t j = 0; j + 1 < out.band_edges.size(); j += 2)
        out.bands.push_back({out.band_edges[j], out.band_edges[j + 1]});
    out.dirichlet = detail::dirichlet_in_gaps(bg, out.gaps());
    return out;
}

/// Dirichlet eigenvalues mu_1..mu_g (one per open gap, base point n0 = 0).
inline std::vector<double> dirichlet_eigenvalues(const BackgroundOperator& bg) { return band_edges(bg).dirichlet; }

/// R^{1/2}_{2g+2}(z) on the branch -prod_k sqrt(z - E_{2k}) sqrt(z - E_{2k+1})
/// (principal roots), analytic off the bands and ~ -z^{g+1} at infinity.
/// With this branch W_q(z) prod_j (z - mu_j) = R^{1/2}(z) holds with sign.
inline cplx r_sqrt(const SpectralData& sd, cplx z)
{
    cplx r = -1.0;
    for (const auto& b : sd.bands)
        r *= std::sqrt(z - b.lo) * std::sqrt(z - b.hi);
    return r;
}

/// R_{2g+2}(z) = prod_j (z - E_j).
inline cplx r_poly(const SpectralData& sd, cplx z)
{
    cplx r = 1.0;
    for (double e : sd.band_edges)
        r *= z - e;
    return r;
}

// ---------------------------------------------------------------------------
// Floquet multiplier and Floquet solutions
// ---------------------------------------------------------------------------

namespace detail {

/// Threshold on |Delta^2 - 4| below which Floquet theory is declared degenerate.
inline constexpr double band_edge_tolerance = 1e-12;

/// Multiplier with |w| < 1; on the spectrum the branch is the limit from
/// Im z > 0 (conjugated for Im z < 0), selected by the sign of Delta'.
inline cplx select_multiplier(cplx delta, cplx ddelta, cplx z)
{
    const cplx disc = delta * delta - 4.0;
    if (std::abs(disc) < band_edge_tolerance)
        fail(ErrorKind::band_edge, "floquet: z = (" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) +
                                       ") is at a band edge (|Delta^2 - 4| below tolerance)");
    const cplx s = std::sqrt(disc);
    const cplx r1 = 0.5 * (delta + s), r2 = 0.5 * (delta - s);
    cplx w = 1.0 / (std::abs(r1) >= std::abs(r2) ? r1 : r2);
    if (std::abs(std::abs(w) - 1.0) < 1e-10) {
        // |w| = 1 up to rounding: on (or numerically on) a band.
        const double up = z.imag() >= 0.0 ? 1.0 : -1.0;
        const double want = -up * (ddelta.real() >= 0.0 ? 1.0 : -1.0);
        const cplx other = 1.0 / w;
        if ((w.imag() >= 0.0 ? 1.0 : -1.0) != want)
            w = other;
    }
    return w;
}

/// One Floquet branch: per-period multiplier mu (w or 1/w), and psi, psi'
/// on one period r = 0..N-1; psi(kN + r) = mu^k psi(r).
struct FloquetBranch {
    int period = 1;
    cplx mu;
    cplx dmu;
    std::vector<cplx> base;
    std::vector<cplx> dbase;

    cplx value(int n) const
    {
        const int k = floor_div(n, period);
        return ipow(mu, k) * base[static_cast<std::size_t>(n - k * period)];
    }

    cplx derivative(int n) const
    {
        const int k = floor_div(n, period);
        const auto r = static_cast<std::size_t>(n - k * period);
        const cplx muk = ipow(mu, k);
        const cplx dmuk = k == 0 ? cplx(0.0) : static_cast<double>(k) * ipow(mu, k - 1) * dmu;
        return dmuk * base[r] + muk * dbase[r];
    }

    void scale_by(cplx c, cplx dc)
    {
        for (std::size_t r = 0; r < base.size(); ++r) {
            dbase[r] = dc * base[r] + c * dbase[r];
            base[r] *= c;
        }
    }
};

/// Both Floquet branches at one z. With `unit_at_origin` the normalization is
/// psi(0) = 1; otherwise a holomorphic eigenvector normalization that never
/// vanishes (quantities such as alpha and Green's functions do not depend on it).
struct FloquetBasis {
    cplx z;
    cplx w;
    cplx dw;
    cplx delta;
    cplx ddelta;
    FloquetBranch plus;
    FloquetBranch minus;

    const FloquetBranch& branch(Side s) const { return s == Side::plus ? plus : minus; }

    /// W_n(psi_-, psi_+) = a(n) (psi_-(n) psi_+(n+1) - psi_-(n+1) psi_+(n)).
    cplx wronskian(const BackgroundOperator& bg, int n = 0) const
    {
        return bg.a(n) * (minus.value(n) * plus.value(n + 1) - minus.value(n + 1) * plus.value(n));
    }

    cplx wronskian_derivative(const BackgroundOperator& bg, int n = 0) const
    {
        return bg.a(n) * (minus.derivative(n) * plus.value(n + 1) + minus.value(n) * plus.derivative(n + 1) -
                          minus.derivative(n + 1) * plus.value(n) - minus.value(n + 1) * plus.derivative(n));
    }
};

inline FloquetBranch make_branch(const BackgroundOperator& bg, const MonodromyJet& jet, cplx z, cplx mu, cplx dmu)
{
    const Mat2& m = jet.value;
    const Mat2& dm = jet.derivative;
    // Two candidate eigenvectors of the 2x2 monodromy; keep the larger one.
    Eigen::Vector2cd v1(m(0, 1), mu - m(0, 0)), dv1(dm(0, 1), dmu - dm(0, 0));
    Eigen::Vector2cd v2(mu - m(1, 1), m(1, 0)), dv2(dmu - dm(1, 1), dm(1, 0));
    const bool first = v1.norm() >= v2.norm();
    const Eigen::Vector2cd v = first ? v1 : v2, dv = first ? dv1 : dv2;
    if (v.norm() <= 1e-14 * (m.norm() + 1.0))
        fail(ErrorKind::degenerate_eigenvector, "floquet: monodromy is (numerically) a multiple of the identity");

    const int N = bg.period();
    FloquetBranch br;
    br.period = N;
    br.mu = mu;
    br.dmu = dmu;
    br.base.resize(N);
    br.dbase.resize(N);
    if (std::abs(mu) >= 1.0) {
        // (psi(0), psi(-1)) = v; propagate forward through the period.
        cplx prev = v(1), dprev = dv(1), cur = v(0), dcur = dv(0);
        for (int n = 0; n < N; ++n) {
            br.base[n] = cur;
            br.dbase[n] = dcur;
            const cplx next = ((z - bg.b(n)) * cur - bg.a(n - 1) * prev) / bg.a(n);
            const cplx dnext = ((z - bg.b(n)) * dcur + cur - bg.a(n - 1) * dprev) / bg.a(n);
            prev = cur;
            dprev = dcur;
            cur = next;
            dcur = dnext;
        }
    } else {
        // Decaying branch: (psi(N), psi(N-1)) = mu v, propagate backward.
        cplx after = mu * v(0), dafter = dmu * v(0) + mu * dv(0);
        cplx cur = mu * v(1), dcur = dmu * v(1) + mu * dv(1);
        for (int n = N - 1; n >= 0; --n) {
            br.base[n] = cur;
            br.dbase[n] = dcur;
            const cplx before = ((z - bg.b(n)) * cur - bg.a(n) * after) / bg.a(n - 1);
            const cplx dbefore = ((z - bg.b(n)) * dcur + cur - bg.a(n) * dafter) / bg.a(n - 1);
            after = cur;
            dafter = dcur;
            cur = before;
            dcur = dbefore;
        }
    }
    return br;
}

inline void normalize_at_origin(FloquetBranch& br)
{
    const cplx v0 = br.base[0], dv0 = br.dbase[0];
    double scale = 0.0;
    for (const cplx& x : br.base)
        scale = std::max(scale, std::abs(x));
    if (std::abs(v0) <= 1e-13 * scale)
        fail(ErrorKind::degenerate_eigenvector,
             "floquet: psi(0) vanishes (z is a Dirichlet eigenvalue); normalization psi(0)=1 undefined");
    br.scale_by(1.0 / v0, -dv0 / (v0 * v0));
}

inline FloquetBasis floquet_basis(const BackgroundOperator& bg, cplx z, bool unit_at_origin)
{
    const MonodromyJet jet = monodromy_jet(bg, z);
    FloquetBasis fb;
    fb.z = z;
    fb.delta = jet.value.trace();
    fb.ddelta = jet.derivative.trace();
    fb.w = select_multiplier(fb.delta, fb.ddelta, z);
    // w^2 - Delta w + 1 = 0  =>  w' = Delta' w / (2w - Delta)
    fb.dw = fb.ddelta * fb.w / (2.0 * fb.w - fb.delta);
    fb.plus = make_branch(bg, jet, z, fb.w, fb.dw);
    fb.minus = make_branch(bg, jet, z, 1.0 / fb.w, -fb.dw / (fb.w * fb.w));
    if (unit_at_origin) {
        normalize_at_origin(fb.plus);
        normalize_at_origin(fb.minus);
    }
    return fb;
}

} // namespace detail

/// Floquet multiplier w(z): the monodromy eigenvalue with |w| < 1 off the
/// spectrum, the boundary value from the upper half-plane on the bands.
inline cplx floquet_multiplier(const BackgroundOperator& bg, cplx z)
{
    const auto jet = monodromy_jet(bg, z);
    return detail::select_multiplier(jet.value.trace(), jet.derivative.trace(), z);
}

/// Baker-Akhiezer (Floquet) solution psi_{q,side}(z, n) on `window`, with
/// psi(0) = 1.
inline FloquetSolution baker_akhiezer(const BackgroundOperator& bg, cplx z, Side side, SiteRange window)
{
    const auto fb = detail::floquet_basis(bg, z, true);
    const auto& br = fb.branch(side);
    FloquetSolution sol;
    sol.multiplier = fb.w;
    sol.side = side;
    sol.values.first = window.first;
    for (int n = window.first; n <= window.last; ++n)
        sol.values.values.push_back(br.value(n));
    return sol;
}

/// z-derivative of psi_{q,side}(z, n) (same normalization as baker_akhiezer).
inline SiteSeries baker_akhiezer_derivative(const BackgroundOperator& bg, cplx z, Side side, SiteRange window)
{
    const auto fb = detail::floquet_basis(bg, z, true);
    const auto& br = fb.branch(side);
    SiteSeries out{window.first, {}};
    for (int n = window.first; n <= window.last; ++n)
        out.values.push_back(br.derivative(n));
    return out;
}

/// W_q(z) = a_q(n) (psi_{q,-}(n) psi_{q,+}(n+1) - psi_{q,-}(n+1) psi_{q,+}(n)),
/// Floquet normalization psi_{q,+-}(z, 0) = 1.
inline cplx wronskian_background(const BackgroundOperator& bg, cplx z, int n = 0)
{
    return detail::floquet_basis(bg, z, true).wronskian(bg, n);
}

/// G_q(z, m, n) = psi_{q,-}(min) psi_{q,+}(max) / W_q.
inline cplx green_background(const BackgroundOperator& bg, cplx z, int m, int n)
{
    const auto fb = detail::floquet_basis(bg, z, false);
    return fb.minus.value(std::min(m, n)) * fb.plus.value(std::max(m, n)) / fb.wronskian(bg, 0);
}

} // namespace jacobi_scatter

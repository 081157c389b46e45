#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "jacobi_scatter/krein.hpp"
#include "oracles.hpp"

using namespace jacobi_scatter;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

bool throws_kind(ErrorKind kind, auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind() == kind;
    }
    return false;
}

/// tr(H^j - H_q^j) from dense sections on [-L, L]; the cut is far enough from
/// the support that its effect on the diagonal cancels in the difference.
double dense_trace(const Perturbation& p, int j, int L = 40)
{
    const auto h = oracle::dense_section(p, -L, L);
    const auto hq = oracle::dense_section(p.background(), -L, L);
    Eigen::MatrixXd x = Eigen::MatrixXd::Identity(h.rows(), h.cols()), y = x;
    for (int k = 0; k < j; ++k) {
        x = x * h;
        y = y * hq;
    }
    return (x - y).trace();
}

double log_slope(const std::vector<double>& xs, const std::vector<double>& ys)
{
    const double m = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double y = std::log(ys[i]);
        sx += xs[i];
        sy += y;
        sxx += xs[i] * xs[i];
        sxy += xs[i] * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

} // namespace

TEST_CASE("perturbation determinant")
{
    const auto free = oracle::free_background();
    REQUIRE(perturbation_determinant(Perturbation(oracle::alternating(0.3)), cplx(0.2, 0.3)) == cplx(1.0, 0.0));

    const double c = 0.5;
    REQUIRE_THAT(perturbation_determinant(oracle::single_site(c), 2.0).real(),
                 WithinAbs(1.0 - c / std::sqrt(3.0), 1e-15));
    REQUIRE_THAT(perturbation_determinant(oracle::single_site(c), 2.0).real(), WithinAbs(0.711325, 1e-6));
    for (cplx z : {cplx(0.3, 0.4), cplx(-1.7, 0.0), cplx(0.0, -2.0)})
        REQUIRE(std::abs(perturbation_determinant(oracle::single_site(c), z) - oracle::single_site_alpha(c, z)) <
                1e-14);

    SECTION("A alpha equals the determinant on a 20-point grid")
    {
        std::mt19937 rng(101);
        for (const auto& bg : {free, oracle::alternating(0.3)}) {
            for (int k = 0; k < 3; ++k) {
                const auto p = oracle::random_perturbation(bg, rng);
                const double A = alpha_asymptotics(p).A();
                for (int i = 0; i < 5; ++i) {
                    for (int jj = 0; jj < 4; ++jj) {
                        const cplx z(-2.0 + i, -1.5 + jj + (jj >= 2 ? 0.5 : 0.0));
                        const cplx det = perturbation_determinant(p, z);
                        REQUIRE(std::abs(A * alpha(p, z) - det) < 1e-10 * std::abs(det));
                    }
                }
            }
        }
    }
    SECTION("against a dense finite-section determinant")
    {
        // det(H - z) / det(H_q - z) on [-L, L] converges to det(1 + V G_q) as L grows
        std::mt19937 rng(103);
        const auto p = oracle::random_perturbation(free, rng);
        const cplx z(0.3, 1.2);
        const int L = 200;
        const Eigen::MatrixXcd h = oracle::dense_section(p, -L, L).cast<cplx>();
        const Eigen::MatrixXcd hq = oracle::dense_section(free, -L, L).cast<cplx>();
        const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(h.rows(), h.cols());
        const cplx ratio = (hq - z * id).partialPivLu().solve(h - z * id).determinant();
        REQUIRE(std::abs(ratio - perturbation_determinant(p, z)) < 1e-10 * std::abs(ratio));
    }
    REQUIRE(throws_kind(ErrorKind::band_edge, [&] { perturbation_determinant(oracle::single_site(0.1), -1.0); }));
}

TEST_CASE("log-derivative identity")
{
    const auto free = oracle::free_background();
    REQUIRE(alpha_log_derivative_residual(Perturbation(free), cplx(0.5, 0.5), 60) == 0.0);

    SECTION("single site c = 1/2, z = 2")
    {
        const auto p = oracle::single_site(0.5);
        const double z = 2.0;
        REQUIRE_THAT(alpha_derivative(p, z).real(), WithinRel(0.5 * z / std::pow(z * z - 1.0, 1.5), 1e-13));
        REQUIRE(alpha_log_derivative_residual(p, z, 60) < 1e-8);
    }
    SECTION("random instance at 1.5i + gap center")
    {
        std::mt19937 rng(107);
        const auto p = oracle::random_perturbation(oracle::alternating(0.3), rng);
        const int n_max = std::max(std::abs(p.support().first), std::abs(p.support().last)) + 60;
        REQUIRE(alpha_log_derivative_residual(p, cplx(0.0, 1.5), n_max) < 1e-7);
    }
    SECTION("residual decays like |w|^2 per site in n_max")
    {
        const auto p = oracle::single_site(0.4);
        const cplx z(0.4, 0.35);
        const double w2 = std::norm(floquet_multiplier(free, z));
        std::vector<double> ns, rs;
        for (int n = 6; n <= 30; n += 2) {
            ns.push_back(n);
            rs.push_back(alpha_log_derivative_residual(p, z, n));
        }
        REQUIRE(rs.back() > 1e-13);
        REQUIRE_THAT(std::exp(log_slope(ns, rs)), WithinRel(w2, 0.1));
    }
    REQUIRE(throws_kind(ErrorKind::input,
                        [&] { alpha_log_derivative_residual(oracle::single_site(0.4), cplx(0.0, 1.0), 0); }));
}

TEST_CASE("spectral shift function")
{
    const auto free = oracle::free_background();

    SECTION("zero perturbation")
    {
        const auto prof = spectral_shift(Perturbation(oracle::alternating(0.3)));
        for (const auto& b : prof.bands)
            for (double x : b.xi)
                REQUIRE(std::abs(x) < 1e-12);
        for (const auto& pl : prof.plateaus)
            REQUIRE(pl.value == 0);
        REQUIRE(prof.eigenvalue_steps.empty());
    }
    SECTION("single site c = 3/4: unit plateau on (1, 5/4)")
    {
        const auto p = oracle::single_site(0.75);
        const auto prof = spectral_shift(p);
        REQUIRE(prof.lambda_min < -1.0);
        bool found = false;
        for (const auto& pl : prof.plateaus) {
            if (pl.span.hi <= -1.0)
                REQUIRE(pl.value == 0);
            if (pl.span.lo >= 1.25 - 1e-12)
                REQUIRE(pl.value == 0);
            if (pl.span.lo >= 1.0 && pl.span.hi <= 1.25 + 1e-12) {
                found = true;
                REQUIRE_THAT(pl.span.lo, WithinAbs(1.0, 1e-14));
                REQUIRE_THAT(pl.span.hi, WithinAbs(1.25, 1e-12));
                REQUIRE(pl.value == 1);
                REQUIRE(std::abs(pl.raw - 1.0) < 1e-6);
            }
        }
        REQUIRE(found);
        REQUIRE(prof.eigenvalue_steps.size() == 1);
        REQUIRE(prof.eigenvalue_steps[0].second == -1);
        REQUIRE(prof.max_integrality_defect < 1e-6);

        // closed form inside the band: xi = (1/pi) arg(1 - c / sqrt(lambda^2 - 1)) from above,
        // sqrt(lambda^2 - 1) -> i sqrt(1 - lambda^2) on (-1, 1)
        for (const auto& b : prof.bands)
            for (std::size_t k = 0; k < b.nodes.size(); ++k) {
                const double l = b.nodes[k];
                const cplx ref = 1.0 - 0.75 / cplx(0.0, std::sqrt(1.0 - l * l));
                REQUIRE(std::abs(b.xi[k] - std::arg(ref) / std::numbers::pi) < 1e-5);
            }

        // int xi = tau_1 = c
        REQUIRE_THAT(trace_via_shift(prof, 1), WithinAbs(0.75, 1e-6));
    }
    SECTION("plateaus are integers on random instances")
    {
        std::mt19937 rng(109);
        for (const auto& bg : {free, oracle::alternating(0.3)}) {
            const auto p = oracle::random_perturbation(bg, rng, 0.4);
            const auto prof = spectral_shift(p);
            REQUIRE(prof.max_integrality_defect < 1e-6);
            REQUIRE(prof.plateaus.front().value == 0);
            REQUIRE(prof.plateaus.back().value == 0);
            for (const auto& [rho, jump] : prof.eigenvalue_steps)
                REQUIRE(jump == -1);
        }
    }
    SECTION("extrapolation weights reproduce polynomials in epsilon")
    {
        const auto w = detail::extrapolation_weights(default_epsilons);
        double s0 = 0, s1 = 0, s2 = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            s0 += w[i];
            s1 += w[i] * default_epsilons[i];
            s2 += w[i] * default_epsilons[i] * default_epsilons[i];
        }
        REQUIRE_THAT(s0, WithinAbs(1.0, 1e-12));
        REQUIRE_THAT(s1, WithinAbs(0.0, 1e-14));
        REQUIRE_THAT(s2, WithinAbs(0.0, 1e-16));
    }
    SECTION("invalid inputs")
    {
        const auto p = oracle::single_site(0.3);
        REQUIRE(throws_kind(ErrorKind::input, [&] { spectral_shift(p, std::vector<double>{1e-3, 1e-2}); }));
        REQUIRE(throws_kind(ErrorKind::input, [&] { spectral_shift(p, std::vector<double>{}); }));
        auto grid = make_shift_grid(p);
        grid.extra = {1.0 + 1e-8};
        REQUIRE(throws_kind(ErrorKind::input, [&] { spectral_shift(p, grid); }));
    }
}

TEST_CASE("Herglotz reconstruction")
{
    const auto free = oracle::free_background();

    const Perturbation zero(oracle::alternating(0.3));
    REQUIRE(alpha_from_shift(zero, spectral_shift(zero), cplx(0.1, 0.7)) == cplx(1.0, 0.0));

    const auto p = oracle::single_site(0.5);
    const auto prof = spectral_shift(p);
    const cplx z(0.0, 2.0);
    REQUIRE(std::abs(alpha_from_shift(p, prof, z) - alpha(p, z)) < 1e-5 * std::abs(alpha(p, z)));

    std::mt19937 rng(113);
    const auto q = oracle::random_perturbation(oracle::alternating(0.3), rng);
    const auto qprof = spectral_shift(q);
    for (cplx zz : {cplx(3.0, 0.0), cplx(0.5, 0.5), cplx(-1.0, -0.3), cplx(0.05, 0.0)})
        REQUIRE(std::abs(alpha_from_shift(q, qprof, zz) - alpha(q, zz)) < 1e-4 * std::abs(alpha(q, zz)));

    // a profile for another background does not cover the spectrum
    REQUIRE(throws_kind(ErrorKind::profile_incomplete, [&] { alpha_from_shift(q, prof, z); }));
    REQUIRE(throws_kind(ErrorKind::input, [&] { alpha_from_shift(p, prof, cplx(0.5, 0.0)); }));
}

TEST_CASE("direct traces")
{
    const auto free = oracle::free_background();
    REQUIRE(trace_direct(Perturbation(free), 3) == 0.0);

    const double c = 0.7;
    REQUIRE_THAT(trace_direct(oracle::single_site(c), 1), WithinAbs(c, 1e-15));
    REQUIRE_THAT(trace_direct(oracle::single_site(c), 2), WithinAbs(c * c, 1e-15));

    const double s = 0.3;
    const auto pa = Perturbation::from_deviation(free, 0, {0.5 * s}, {0.0});
    REQUIRE_THAT(trace_direct(pa, 2), WithinAbs(0.5 * ((1 + s) * (1 + s) - 1), 1e-15));

    std::mt19937 rng(127);
    for (const auto& bg : {free, oracle::alternating(0.3)}) {
        const auto p = oracle::random_perturbation(bg, rng);
        for (int j = 1; j <= 8; ++j)
            REQUIRE_THAT(trace_direct(p, j), WithinAbs(dense_trace(p, j), 1e-12));
        // tau_1 and tau_2 in coefficient form
        double t1 = 0, t2 = 0;
        for (int n = p.window().first; n <= p.window().last; ++n) {
            t1 += p.b(n) - bg.b(n);
            t2 += 2.0 * (p.a(n) * p.a(n) - bg.a(n) * bg.a(n)) + p.b(n) * p.b(n) - bg.b(n) * bg.b(n);
        }
        REQUIRE_THAT(trace_direct(p, 1), WithinAbs(t1, 1e-14));
        REQUIRE_THAT(trace_direct(p, 2), WithinAbs(t2, 1e-14));
    }
    REQUIRE_THROWS_AS(trace_direct(oracle::single_site(c), 0), Error);
}

TEST_CASE("Laurent coefficients and the trace recursion")
{
    const auto free = oracle::free_background();

    for (double x : alpha_expansion(Perturbation(free), 12))
        REQUIRE(x == 0.0);

    SECTION("single site: alpha = 1 - c/z - c/(2 z^3) - ...")
    {
        const double c = 0.5;
        const auto al = alpha_expansion(oracle::single_site(c), 6);
        REQUIRE_THAT(al[0], WithinAbs(-c, 1e-13));
        REQUIRE_THAT(al[1], WithinAbs(0.0, 1e-13));
        REQUIRE_THAT(al[2], WithinAbs(-c / 2.0, 1e-13));
        REQUIRE_THAT(al[4], WithinAbs(-3.0 * c / 8.0, 1e-13));
        const auto al2 = alpha_expansion(oracle::single_site(2.0 * c), 1);
        REQUIRE_THAT(al2[0], WithinAbs(2.0 * al[0], 1e-10));

        const auto taus = tau_from_recursion(al);
        REQUIRE_THAT(taus[0], WithinAbs(c, 1e-13));
        REQUIRE_THAT(taus[1], WithinAbs(c * c, 1e-13));
    }
    SECTION("recursion examples and the generating identity")
    {
        const double c = 0.75;
        const auto t = tau_from_recursion({-c, 0.0, -c / 2.0, 0.0});
        REQUIRE(t[0] == c);
        REQUIRE(t[1] == c * c);
        for (double x : tau_from_recursion(std::vector<double>(6, 0.0)))
            REQUIRE(x == 0.0);

        std::mt19937 rng(131);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<double> al(10);
        for (auto& x : al)
            x = u(rng);
        const auto taus = tau_from_recursion(al);
        const auto logc = oracle::series_log(al);
        for (std::size_t j = 1; j <= al.size(); ++j)
            REQUIRE(std::abs(logc[j - 1] + taus[j - 1] / static_cast<double>(j)) <
                    1e-10 * std::max(1.0, std::abs(logc[j - 1])));
    }
    SECTION("direct and recursion routes agree to order 8")
    {
        std::mt19937 rng(137);
        for (const auto& bg : {free, oracle::alternating(0.3)}) {
            const auto p = oracle::random_perturbation(bg, rng);
            const auto direct = trace_report_direct(p, 8);
            const auto rec = trace_report_recursion(p, 8);
            REQUIRE(direct.method == TraceMethod::direct);
            REQUIRE(rec.method == TraceMethod::recursion);
            for (int j = 0; j < 8; ++j)
                REQUIRE(std::abs(direct.taus[j] - rec.taus[j]) < 1e-8 * std::max(1.0, std::abs(direct.taus[j])));
        }
    }
    SECTION("circle too small")
    {
        const auto p = oracle::single_site(0.5);
        REQUIRE(throws_kind(ErrorKind::radius_too_small, [&] { alpha_expansion(p, 4, p.gershgorin_bound()); }));
        REQUIRE(throws_kind(ErrorKind::input, [&] { alpha_expansion(p, 13); }));
    }
}

TEST_CASE("moment traces")
{
    const Perturbation zero(oracle::free_background());
    const auto zprof = spectral_shift(zero);
    for (int j = 1; j <= 4; ++j)
        REQUIRE(std::abs(trace_via_shift(zprof, j)) < 1e-12);

    const auto p = oracle::single_site(0.75);
    const auto prof = spectral_shift(p);
    REQUIRE_THAT(trace_via_shift(prof, 1), WithinAbs(0.75, 1e-5));
    REQUIRE_THAT(trace_via_shift(prof, 2), WithinAbs(0.5625, 1e-4));

    std::mt19937 rng(139);
    const auto q = oracle::random_perturbation(oracle::alternating(0.3), rng);
    const auto rep = trace_report_moment(spectral_shift(q), 4);
    REQUIRE(rep.method == TraceMethod::moment);
    for (int j = 1; j <= 4; ++j)
        REQUIRE(std::abs(rep.taus[j - 1] - trace_direct(q, j)) < 1e-3 * std::max(1.0, std::abs(trace_direct(q, j))));
}

TEST_CASE("zeros of alpha are simple")
{
    std::mt19937 rng(149);
    for (const auto& bg : {oracle::free_background(), oracle::alternating(0.3)}) {
        const auto p = oracle::random_perturbation(bg, rng, 0.45);
        for (double rho : eigenvalues(p)) {
            REQUIRE(std::abs(alpha(p, rho)) < 1e-9);
            REQUIRE(std::abs(alpha_derivative(p, rho)) > 1e-8);
        }
    }
}

TEST_CASE("band quadrature refinement")
{
    // strong hopping deviations make xi oscillate inside the bands
    const auto bg = oracle::alternating(0.3);
    const Perturbation p(bg, -3,
                         {0.202327, 0.30825, 0.565166, 0.677011, 0.665647, 0.612219, 0.383109, 0.268469, 0.423273},
                         {-0.43977, 0.491139, -0.208185, 0.354985, -0.144527, 0.471704, -0.159016, 0.533334,
                          -0.416351});
    const auto grid = make_shift_grid(p);
    const cplx z(0.8, 0.2);

    const auto fixed = spectral_shift(p, grid, default_epsilons, ShiftRefinement{0.0, 64});
    REQUIRE(fixed.bands[0].nodes.size() == 64);

    const auto refined = spectral_shift(p, grid, default_epsilons, ShiftRefinement{});
    REQUIRE(refined.bands[0].nodes.size() > 64);
    REQUIRE(refined.warnings.empty());
    const double err_fixed = std::abs(alpha_from_shift(p, fixed, z) - alpha(p, z)) / std::abs(alpha(p, z));
    const double err_refined = std::abs(alpha_from_shift(p, refined, z) - alpha(p, z)) / std::abs(alpha(p, z));
    REQUIRE(err_refined < 1e-8);
    REQUIRE(err_refined < 1e-3 * err_fixed);

    const auto capped = spectral_shift(p, grid, default_epsilons, ShiftRefinement{1e-8, 128});
    REQUIRE(capped.bands[0].nodes.size() == 128);
    REQUIRE(capped.warnings.size() == 1);
}

#pragma once

// Lowest Toda flow in Flaschka variables,
//   a' = a (b^+ - b),   b' = 2 (a^2 - (a^-)^2),
// for a perturbation together with its periodic background.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "krein.hpp"
#include "perturbation.hpp"

namespace jacobi_scatter {

struct TodaState {
    double time = 0.0;
    Perturbation perturbation;

    const BackgroundOperator& background() const { return perturbation.background(); }
};

struct TodaOptions {
    int pad = 80;                      // background-equal sites kept on each side
    int grow_step = 20;                // sites added when a boundary deviates
    int max_window = 20000;            // WindowOverflow beyond this many sites
    double boundary_tolerance = 1e-14; // deviation allowed at the window boundary
};

/// Time derivatives of (a, b) on the window padded by one site, and of
/// (a_q, b_q) on one period.
struct TodaDerivative {
    SiteRange window;
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> a_q;
    std::vector<double> b_q;
};

inline TodaDerivative toda_vector_field(const TodaState& s)
{
    const auto& p = s.perturbation;
    const auto& bg = s.background();
    TodaDerivative d;
    if (!p.empty())
        d.window = {p.window().first - 1, p.window().last + 1};
    for (int n = d.window.first; n <= d.window.last && !p.empty(); ++n) {
        d.a.push_back(p.a(n) * (p.b(n + 1) - p.b(n)));
        d.b.push_back(2.0 * (p.a(n) * p.a(n) - p.a(n - 1) * p.a(n - 1)));
    }
    for (int n = 0; n < bg.period(); ++n) {
        d.a_q.push_back(bg.a(n) * (bg.b(n + 1) - bg.b(n)));
        d.b_q.push_back(2.0 * (bg.a(n) * bg.a(n) - bg.a(n - 1) * bg.a(n - 1)));
    }
    return d;
}

namespace detail {

/// Coupled state on a working window [first, first + m) plus one period of
/// the background: y = (a_W, b_W, a_q, b_q).
struct TodaWork {
    int first = 0;
    int m = 0;
    int period = 1;
    std::vector<double> y;

    double a(int n) const
    {
        return (n >= first && n < first + m) ? y[n - first] : aq(n);
    }
    double b(int n) const
    {
        return (n >= first && n < first + m) ? y[m + n - first] : bq(n);
    }
    double aq(int n) const { return y[2 * m + floor_div_mod(n)]; }
    double bq(int n) const { return y[2 * m + period + floor_div_mod(n)]; }

    int floor_div_mod(int n) const { return n - period * floor_div(n, period); }

    double deviation(int n) const { return std::max(std::abs(a(n) - aq(n)), std::abs(b(n) - bq(n))); }
};

inline std::vector<double> toda_rhs(const TodaWork& w)
{
    std::vector<double> f(w.y.size());
    const int m = w.m, N = w.period;
    for (int i = 0; i < m; ++i) {
        const int n = w.first + i;
        f[i] = w.a(n) * (w.b(n + 1) - w.b(n));
        f[m + i] = 2.0 * (w.a(n) * w.a(n) - w.a(n - 1) * w.a(n - 1));
    }
    for (int n = 0; n < N; ++n) {
        f[2 * m + n] = w.aq(n) * (w.bq(n + 1) - w.bq(n));
        f[2 * m + N + n] = 2.0 * (w.aq(n) * w.aq(n) - w.aq(n - 1) * w.aq(n - 1));
    }
    return f;
}

/// Working window from a state: the sites whose deviation exceeds the
/// tolerance, padded by `pad` on both sides. Empty if there are none.
inline TodaWork make_work(const TodaState& s, const TodaOptions& opt)
{
    const auto& p = s.perturbation;
    const auto& bg = s.background();
    int lo = 0, hi = -1;
    for (int n = p.window().first; n <= p.window().last && !p.empty(); ++n) {
        const double dev = std::max(std::abs(p.a(n) - bg.a(n)), std::abs(p.b(n) - bg.b(n)));
        if (dev > opt.boundary_tolerance) {
            if (hi < lo) {
                lo = n;
            }
            hi = n;
        }
    }
    TodaWork w;
    w.period = bg.period();
    if (hi >= lo) {
        w.first = lo - opt.pad;
        w.m = hi - lo + 1 + 2 * opt.pad;
    }
    w.y.resize(2 * w.m + 2 * w.period);
    for (int i = 0; i < w.m; ++i) {
        w.y[i] = p.a(w.first + i);
        w.y[w.m + i] = p.b(w.first + i);
    }
    for (int n = 0; n < w.period; ++n) {
        w.y[2 * w.m + n] = bg.a(n);
        w.y[2 * w.m + w.period + n] = bg.b(n);
    }
    return w;
}

/// Extends the working window by `k` background sites on the chosen side.
inline void grow(TodaWork& w, int k, bool left)
{
    TodaWork g;
    g.period = w.period;
    g.first = left ? w.first - k : w.first;
    g.m = w.m + k;
    g.y.resize(2 * g.m + 2 * g.period);
    for (int i = 0; i < g.m; ++i) {
        const int n = g.first + i;
        g.y[i] = w.a(n);
        g.y[g.m + i] = w.b(n);
    }
    std::copy(w.y.begin() + 2 * w.m, w.y.end(), g.y.begin() + 2 * g.m);
    w = std::move(g);
}

inline TodaState to_state(const TodaWork& w, double t)
{
    std::vector<double> aq(w.y.begin() + 2 * w.m, w.y.begin() + 2 * w.m + w.period);
    std::vector<double> bq(w.y.begin() + 2 * w.m + w.period, w.y.end());
    BackgroundOperator bg(std::move(aq), std::move(bq));
    if (w.m == 0)
        return {t, Perturbation(std::move(bg))};
    std::vector<double> a(w.y.begin(), w.y.begin() + w.m), b(w.y.begin() + w.m, w.y.begin() + 2 * w.m);
    return {t, Perturbation(std::move(bg), w.first, std::move(a), std::move(b))};
}

} // namespace detail

/// Classical RK4 from state.time to t_final with uniform steps no longer than
/// dt (the last step lands exactly on t_final). The working window grows by
/// opt.grow_step whenever an outermost site deviates from the background by
/// more than opt.boundary_tolerance.
inline TodaState evolve(const TodaState& state, double t_final, double dt, const TodaOptions& opt = {})
{
    if (!(dt > 0.0))
        fail(ErrorKind::input, "evolve: dt must be positive");
    if (!(t_final >= state.time))
        fail(ErrorKind::input, "evolve: t_final must not precede the state time");
    auto w = detail::make_work(state, opt);
    const double span = t_final - state.time;
    const long steps = span > 0.0 ? static_cast<long>(std::ceil(span / dt - 1e-9)) : 0;
    const double h = steps > 0 ? span / static_cast<double>(steps) : 0.0;

    std::vector<double> k1, k2, k3, k4;
    std::vector<double> carry(w.y.size(), 0.0); // compensated summation of the updates
    auto stage = [&](const std::vector<double>& base, const std::vector<double>& k, double c) {
        detail::TodaWork s = w;
        for (std::size_t i = 0; i < s.y.size(); ++i)
            s.y[i] = base[i] + c * k[i];
        return detail::toda_rhs(s);
    };
    for (long step = 0; step < steps; ++step) {
        const auto y0 = w.y;
        k1 = detail::toda_rhs(w);
        k2 = stage(y0, k1, 0.5 * h);
        k3 = stage(y0, k2, 0.5 * h);
        k4 = stage(y0, k3, h);
        for (std::size_t i = 0; i < y0.size(); ++i) {
            const double inc = h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) - carry[i];
            w.y[i] = y0[i] + inc;
            carry[i] = (w.y[i] - y0[i]) - inc;
        }

        const double t = state.time + h * static_cast<double>(step + 1);
        for (std::size_t i = 0; i < w.y.size(); ++i) {
            const bool is_a = i < static_cast<std::size_t>(w.m) ||
                              (i >= static_cast<std::size_t>(2 * w.m) &&
                               i < static_cast<std::size_t>(2 * w.m + w.period));
            if (!std::isfinite(w.y[i]) || (is_a && !(w.y[i] > 0.0)))
                fail(ErrorKind::positivity_loss, "evolve: a(n) lost positivity at t = " + std::to_string(t) +
                                                     " (step " + std::to_string(step + 1) +
                                                     ", dt = " + std::to_string(h) + ")");
        }
        if (w.m > 0) {
            if (w.deviation(w.first) > opt.boundary_tolerance) {
                detail::grow(w, opt.grow_step, true);
                carry.assign(w.y.size(), 0.0);
            }
            if (w.deviation(w.first + w.m - 1) > opt.boundary_tolerance) {
                detail::grow(w, opt.grow_step, false);
                carry.assign(w.y.size(), 0.0);
            }
            if (w.m > opt.max_window)
                fail(ErrorKind::window_overflow, "evolve: window of " + std::to_string(w.m) +
                                                     " sites exceeds the maximum at t = " + std::to_string(t));
        }
    }
    return detail::to_state(w, t_final);
}

struct ConservedRow {
    double t = 0.0;
    double A = 1.0;
    std::vector<double> taus;
    std::vector<cplx> alphas; // alpha at the probe points
};

struct ConservedReport {
    std::vector<ConservedRow> rows;
    double drift_A = 0.0;
    std::vector<double> drift_tau;
    std::vector<double> drift_alpha; // relative
    std::vector<TodaState> states;   // state at every requested time
};

/// Evolves through `times` and records A, tau_1..tau_J (trace_direct) and
/// alpha at the probe points, with drifts max_t |X(t) - X(t_0)|.
inline ConservedReport conserved_report(const TodaState& state0, const std::vector<double>& times, int J,
                                        double dt, const std::vector<cplx>& probes = {},
                                        const TodaOptions& opt = {})
{
    if (J < 1 || J > 8)
        fail(ErrorKind::input, "conserved_report: order must be in [1, 8]");
    for (std::size_t i = 0; i < times.size(); ++i)
        if ((i > 0 && !(times[i] > times[i - 1])) || times[i] < state0.time)
            fail(ErrorKind::input, "conserved_report: times must be increasing and not precede the state");

    ConservedReport rep;
    rep.drift_tau.assign(J, 0.0);
    rep.drift_alpha.assign(probes.size(), 0.0);
    TodaState s = state0;
    for (double t : times) {
        s = evolve(s, t, dt, opt);
        ConservedRow row;
        row.t = t;
        row.A = alpha_asymptotics(s.perturbation).A();
        for (int j = 1; j <= J; ++j)
            row.taus.push_back(trace_direct(s.perturbation, j));
        for (cplx z : probes)
            row.alphas.push_back(alpha(s.perturbation, z));
        rep.rows.push_back(std::move(row));
        rep.states.push_back(s);
    }
    if (!rep.rows.empty()) {
        const auto& r0 = rep.rows.front();
        for (const auto& r : rep.rows) {
            rep.drift_A = std::max(rep.drift_A, std::abs(r.A - r0.A));
            for (int j = 0; j < J; ++j)
                rep.drift_tau[j] = std::max(rep.drift_tau[j], std::abs(r.taus[j] - r0.taus[j]));
            for (std::size_t k = 0; k < probes.size(); ++k)
                rep.drift_alpha[k] =
                    std::max(rep.drift_alpha[k], std::abs(r.alphas[k] - r0.alphas[k]) / std::abs(r0.alphas[k]));
        }
    }
    return rep;
}

} // namespace jacobi_scatter

#pragma once

// Scenario documents (JSON in), tables and reports (CSV/JSON out).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "krein.hpp"
#include "perturbation.hpp"
#include "toda.hpp"

namespace jacobi_scatter::io {

using json = nlohmann::json;

/// Reals in CSV: 17 significant digits.
inline std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct ShiftSettings {
    std::vector<double> epsilons = default_epsilons;
    int nodes_per_band = default_nodes_per_band;
    std::vector<double> lambda; // extra reporting points
    ShiftRefinement refine;
};

struct TraceSettings {
    int orders = 8;        // direct and recursion
    int moment_orders = 4; // moment integral of xi
    double radius = 0.0;   // 0: twice the Gershgorin bound
};

struct TodaSettings {
    std::vector<double> times{0.0, 1.0, 2.0, 5.0};
    double dt = 1e-3;
    int orders = 3;
    std::vector<cplx> probes{cplx(0.0, 2.0)};
    TodaOptions options;
};

struct Scenario {
    BackgroundOperator background = BackgroundOperator::constant();
    Perturbation perturbation{BackgroundOperator::constant()};
    std::vector<cplx> z_grid;
    ShiftSettings shift;
    TraceSettings traces;
    TodaSettings toda;
};

namespace detail {

[[noreturn]] inline void schema(const std::string& what) { fail(ErrorKind::input, what); }

inline void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed)
{
    if (!j.is_object())
        schema(where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k))
            schema(where + ": unknown key \"" + k + "\"");
}

inline double real_of(const json& j, const std::string& where)
{
    if (!j.is_number())
        schema(where + ": expected a number");
    return j.get<double>();
}

inline int int_of(const json& j, const std::string& where)
{
    if (!j.is_number_integer())
        schema(where + ": expected an integer");
    return j.get<int>();
}

inline std::vector<double> reals_of(const json& j, const std::string& where)
{
    if (!j.is_array())
        schema(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j)
        out.push_back(real_of(v, where));
    return out;
}

inline cplx complex_of(const json& j, const std::string& where)
{
    if (j.is_number())
        return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2)
        schema(where + ": expected a number or [re, im]");
    return {real_of(j[0], where), real_of(j[1], where)};
}

/// {"from": x0, "to": x1, "count": n} or a single number.
inline std::vector<double> axis_of(const json& j, const std::string& where)
{
    if (j.is_number())
        return {j.get<double>()};
    check_keys(j, where, {"from", "to", "count"});
    if (!j.contains("from") || !j.contains("to") || !j.contains("count"))
        schema(where + ": axis needs from, to and count");
    const double x0 = real_of(j["from"], where), x1 = real_of(j["to"], where);
    const int n = int_of(j["count"], where);
    if (n < 1)
        schema(where + ": count must be >= 1");
    std::vector<double> out;
    for (int i = 0; i < n; ++i)
        out.push_back(n == 1 ? x0 : x0 + (x1 - x0) * i / (n - 1));
    return out;
}

} // namespace detail

/// {"period": N, "a": [...], "b": [...]}; "period" is optional and must match.
inline BackgroundOperator background_from_json(const json& j)
{
    detail::check_keys(j, "background", {"period", "a", "b"});
    if (!j.contains("a") || !j.contains("b"))
        detail::schema("background: a and b are required");
    auto a = detail::reals_of(j["a"], "background.a");
    auto b = detail::reals_of(j["b"], "background.b");
    if (j.contains("period")) {
        const int n = detail::int_of(j["period"], "background.period");
        if (n < 1 || static_cast<std::size_t>(n) != a.size() || a.size() != b.size())
            detail::schema("background: period must equal the length of a and b");
    }
    return {std::move(a), std::move(b)};
}

inline json to_json(const BackgroundOperator& bg)
{
    return {{"period", bg.period()}, {"a", bg.a_period()}, {"b", bg.b_period()}};
}

/// Drops the end sites of the window whose deviation from the background is
/// at most `tol`.
inline Perturbation truncate(const Perturbation& p, double tol)
{
    const auto& bg = p.background();
    auto dev = [&](int n) { return std::max(std::abs(p.a(n) - bg.a(n)), std::abs(p.b(n) - bg.b(n))); };
    int lo = p.window().first, hi = p.window().last;
    while (lo <= hi && dev(lo) <= tol)
        ++lo;
    while (hi >= lo && dev(hi) <= tol)
        --hi;
    if (hi < lo)
        return Perturbation(bg);
    std::vector<double> a, b;
    for (int n = lo; n <= hi; ++n) {
        a.push_back(p.a(n));
        b.push_back(p.b(n));
    }
    return {bg, lo, std::move(a), std::move(b)};
}

/// {"window": [n-, n+], "a": [...], "b": [...]} with absolute coefficients,
/// or "da"/"db" with deviations from the background. An optional "truncate"
/// tolerance trims negligible tails off the window.
inline Perturbation perturbation_from_json(const json& j, const BackgroundOperator& bg)
{
    detail::check_keys(j, "perturbation", {"window", "a", "b", "da", "db", "truncate"});
    if (j.contains("truncate")) {
        const double tol = detail::real_of(j["truncate"], "perturbation.truncate");
        if (!(tol >= 0.0))
            detail::schema("perturbation.truncate must be non-negative");
        json rest = j;
        rest.erase("truncate");
        return truncate(perturbation_from_json(rest, bg), tol);
    }
    if (!j.contains("window"))
        return Perturbation(bg);
    const auto& w = j["window"];
    if (!w.is_array() || w.size() != 2)
        detail::schema("perturbation.window: expected [n-, n+]");
    const int lo = detail::int_of(w[0], "perturbation.window"), hi = detail::int_of(w[1], "perturbation.window");
    if (hi < lo)
        detail::schema("perturbation.window: n+ < n-");
    const auto len = static_cast<std::size_t>(hi - lo + 1);
    const bool absolute = j.contains("a") || j.contains("b");
    const bool deviation = j.contains("da") || j.contains("db");
    if (absolute == deviation)
        detail::schema("perturbation: give either a/b or da/db");
    auto read = [&](const char* key) {
        auto v = j.contains(key) ? detail::reals_of(j[key], std::string("perturbation.") + key)
                                 : std::vector<double>(len, 0.0);
        if (v.size() != len)
            detail::schema(std::string("perturbation.") + key + ": length must match the window");
        return v;
    };
    if (absolute) {
        if (!j.contains("a") || !j.contains("b"))
            detail::schema("perturbation: a and b must both be given");
        return Perturbation(bg, lo, read("a"), read("b"));
    }
    return Perturbation::from_deviation(bg, lo, read("da"), read("db"));
}

inline json to_json(const Perturbation& p)
{
    if (p.empty())
        return json::object();
    return {{"window", {p.window().first, p.window().last}}, {"a", p.a_window()}, {"b", p.b_window()}};
}

/// z-grid: {"points": [[re, im], ...]} or a tensor grid {"re": axis, "im": axis}.
inline std::vector<cplx> z_grid_from_json(const json& j)
{
    detail::check_keys(j, "z_grid", {"points", "re", "im"});
    std::vector<cplx> out;
    if (j.contains("points")) {
        if (!j["points"].is_array())
            detail::schema("z_grid.points: expected an array");
        for (const auto& v : j["points"])
            out.push_back(detail::complex_of(v, "z_grid.points"));
    }
    if (j.contains("re") || j.contains("im")) {
        if (!j.contains("re") || !j.contains("im"))
            detail::schema("z_grid: re and im axes must both be given");
        const auto re = detail::axis_of(j["re"], "z_grid.re");
        const auto im = detail::axis_of(j["im"], "z_grid.im");
        for (double y : im)
            for (double x : re)
                out.emplace_back(x, y);
    }
    return out;
}

inline Scenario scenario_from_json(const json& j)
{
    detail::check_keys(j, "scenario", {"background", "perturbation", "z_grid", "shift", "traces", "toda"});
    Scenario s;
    if (j.contains("background"))
        s.background = background_from_json(j["background"]);
    s.perturbation = j.contains("perturbation") ? perturbation_from_json(j["perturbation"], s.background)
                                                : Perturbation(s.background);
    if (j.contains("z_grid"))
        s.z_grid = z_grid_from_json(j["z_grid"]);
    if (j.contains("shift")) {
        const auto& sh = j["shift"];
        detail::check_keys(sh, "shift",
                           {"epsilons", "nodes_per_band", "lambda", "refine_tolerance", "max_nodes_per_band"});
        if (sh.contains("epsilons"))
            s.shift.epsilons = detail::reals_of(sh["epsilons"], "shift.epsilons");
        if (sh.contains("nodes_per_band"))
            s.shift.nodes_per_band = detail::int_of(sh["nodes_per_band"], "shift.nodes_per_band");
        if (sh.contains("lambda"))
            s.shift.lambda = detail::reals_of(sh["lambda"], "shift.lambda");
        if (sh.contains("refine_tolerance"))
            s.shift.refine.tolerance = detail::real_of(sh["refine_tolerance"], "shift.refine_tolerance");
        if (sh.contains("max_nodes_per_band"))
            s.shift.refine.max_nodes = detail::int_of(sh["max_nodes_per_band"], "shift.max_nodes_per_band");
        if (s.shift.nodes_per_band < 2)
            detail::schema("shift.nodes_per_band must be >= 2");
        if (s.shift.refine.tolerance < 0.0)
            detail::schema("shift.refine_tolerance must be >= 0");
    }
    if (j.contains("traces")) {
        const auto& tr = j["traces"];
        detail::check_keys(tr, "traces", {"orders", "moment_orders", "radius"});
        if (tr.contains("orders"))
            s.traces.orders = detail::int_of(tr["orders"], "traces.orders");
        if (tr.contains("moment_orders"))
            s.traces.moment_orders = detail::int_of(tr["moment_orders"], "traces.moment_orders");
        if (tr.contains("radius"))
            s.traces.radius = detail::real_of(tr["radius"], "traces.radius");
        if (s.traces.orders < 1 || s.traces.orders > 12 || s.traces.moment_orders < 0 ||
            s.traces.moment_orders > s.traces.orders)
            detail::schema("traces: need 1 <= orders <= 12 and 0 <= moment_orders <= orders");
    }
    if (j.contains("toda")) {
        const auto& td = j["toda"];
        detail::check_keys(td, "toda", {"times", "dt", "orders", "probes", "pad", "grow_step", "max_window"});
        if (td.contains("times"))
            s.toda.times = detail::reals_of(td["times"], "toda.times");
        if (td.contains("dt"))
            s.toda.dt = detail::real_of(td["dt"], "toda.dt");
        if (td.contains("orders"))
            s.toda.orders = detail::int_of(td["orders"], "toda.orders");
        if (td.contains("probes")) {
            if (!td["probes"].is_array())
                detail::schema("toda.probes: expected an array");
            s.toda.probes.clear();
            for (const auto& v : td["probes"])
                s.toda.probes.push_back(detail::complex_of(v, "toda.probes"));
        }
        if (td.contains("pad"))
            s.toda.options.pad = detail::int_of(td["pad"], "toda.pad");
        if (td.contains("grow_step"))
            s.toda.options.grow_step = detail::int_of(td["grow_step"], "toda.grow_step");
        if (td.contains("max_window"))
            s.toda.options.max_window = detail::int_of(td["max_window"], "toda.max_window");
        if (s.toda.options.pad < 1 || s.toda.options.grow_step < 1)
            detail::schema("toda: pad and grow_step must be positive");
    }
    return s;
}

inline Scenario scenario_from_string(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::input, std::string("malformed JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

inline Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::input, "cannot open scenario file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_string(ss.str());
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const Scenario& s)
{
    json j;
    j["background"] = to_json(s.background);
    j["perturbation"] = to_json(s.perturbation);
    json pts = json::array();
    for (cplx z : s.z_grid)
        pts.push_back(complex_json(z));
    j["z_grid"] = {{"points", pts}};
    j["shift"] = {{"epsilons", s.shift.epsilons},
                  {"nodes_per_band", s.shift.nodes_per_band},
                  {"lambda", s.shift.lambda},
                  {"refine_tolerance", s.shift.refine.tolerance},
                  {"max_nodes_per_band", s.shift.refine.max_nodes}};
    j["traces"] = {{"orders", s.traces.orders},
                   {"moment_orders", s.traces.moment_orders},
                   {"radius", s.traces.radius}};
    json probes = json::array();
    for (cplx z : s.toda.probes)
        probes.push_back(complex_json(z));
    j["toda"] = {{"times", s.toda.times},
                 {"dt", s.toda.dt},
                 {"orders", s.toda.orders},
                 {"probes", probes},
                 {"pad", s.toda.options.pad},
                 {"grow_step", s.toda.options.grow_step},
                 {"max_window", s.toda.options.max_window}};
    return j;
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

inline json to_json(const SpectralData& sd)
{
    json bands = json::array();
    for (const auto& b : sd.bands)
        bands.push_back({b.lo, b.hi});
    return {{"edges", sd.band_edges}, {"genus", sd.genus}, {"dirichlet", sd.dirichlet}, {"bands", bands}};
}

/// Columns n, Re psi, Im psi.
inline void write_series_csv(std::ostream& os, const SiteSeries& s)
{
    os << "n,re_psi,im_psi\n";
    for (int n = s.first; n <= s.last(); ++n)
        os << n << ',' << fmt(s(n).real()) << ',' << fmt(s(n).imag()) << '\n';
}

inline json to_json(const ShiftProfile& prof)
{
    json bands = json::array();
    for (const auto& b : prof.bands)
        bands.push_back({{"band", {b.band.lo, b.band.hi}}, {"nodes", b.nodes}, {"weights", b.weights}, {"xi", b.xi}});
    json plateaus = json::array();
    for (const auto& p : prof.plateaus)
        plateaus.push_back({{"lo", p.span.lo}, {"hi", p.span.hi}, {"value", p.value}, {"raw", p.raw}});
    json steps = json::array();
    for (const auto& [rho, jump] : prof.eigenvalue_steps)
        steps.push_back({{"eigenvalue", rho}, {"jump", jump}});
    json extra = json::array();
    for (const auto& [l, x] : prof.extra)
        extra.push_back({{"lambda", l}, {"xi", x}});
    return {{"lambda_min", prof.lambda_min},
            {"lambda_max", prof.lambda_max},
            {"epsilon_used", prof.epsilon_used},
            {"bands", bands},
            {"plateaus", plateaus},
            {"eigenvalue_steps", steps},
            {"samples", extra},
            {"max_integrality_defect", prof.max_integrality_defect},
            {"warnings", prof.warnings}};
}

/// One row per band node, plateau, eigenvalue step and extra sample:
/// kind, lambda, lambda_hi, xi, weight.
inline void write_shift_csv(std::ostream& os, const ShiftProfile& prof)
{
    os << "kind,lambda,lambda_hi,xi,weight\n";
    for (const auto& b : prof.bands)
        for (std::size_t k = 0; k < b.nodes.size(); ++k)
            os << "band," << fmt(b.nodes[k]) << ',' << fmt(b.nodes[k]) << ',' << fmt(b.xi[k]) << ','
               << fmt(b.weights[k]) << '\n';
    for (const auto& p : prof.plateaus)
        os << "plateau," << fmt(p.span.lo) << ',' << fmt(p.span.hi) << ',' << p.value << ",\n";
    for (const auto& [rho, jump] : prof.eigenvalue_steps)
        os << "eigenvalue_step," << fmt(rho) << ',' << fmt(rho) << ',' << jump << ",\n";
    for (const auto& [l, x] : prof.extra)
        os << "sample," << fmt(l) << ',' << fmt(l) << ',' << fmt(x) << ",\n";
}

inline json to_json(const TraceReport& r)
{
    return {{"method", std::string(to_string(r.method))}, {"J", r.J}, {"taus", r.taus}};
}

inline json checkpoint_json(const TodaState& s)
{
    const auto& p = s.perturbation;
    json w = p.empty() ? json::array() : json::array({p.window().first, p.window().last});
    return {{"t", s.time},
            {"window", w},
            {"a", p.a_window()},
            {"b", p.b_window()},
            {"a_q", s.background().a_period()},
            {"b_q", s.background().b_period()}};
}

/// Restores a state from a checkpoint document.
inline TodaState state_from_checkpoint(const json& j)
{
    detail::check_keys(j, "checkpoint", {"t", "window", "a", "b", "a_q", "b_q"});
    for (const char* k : {"t", "window", "a", "b", "a_q", "b_q"})
        if (!j.contains(k))
            detail::schema(std::string("checkpoint: missing ") + k);
    BackgroundOperator bg(detail::reals_of(j["a_q"], "checkpoint.a_q"), detail::reals_of(j["b_q"], "checkpoint.b_q"));
    const double t = detail::real_of(j["t"], "checkpoint.t");
    if (j["window"].empty())
        return {t, Perturbation(std::move(bg))};
    json pj = {{"window", j["window"]}, {"a", j["a"]}, {"b", j["b"]}};
    return {t, perturbation_from_json(pj, bg)};
}

/// Columns t, A, tau_1..tau_J, then Re/Im alpha for each probe.
inline void write_conserved_csv(std::ostream& os, const ConservedReport& rep, std::size_t probes)
{
    const std::size_t J = rep.drift_tau.size();
    os << "t,A";
    for (std::size_t j = 1; j <= J; ++j)
        os << ",tau_" << j;
    for (std::size_t k = 0; k < probes; ++k)
        os << ",re_alpha_" << k << ",im_alpha_" << k;
    os << '\n';
    for (const auto& r : rep.rows) {
        os << fmt(r.t) << ',' << fmt(r.A);
        for (double tau : r.taus)
            os << ',' << fmt(tau);
        for (cplx a : r.alphas)
            os << ',' << fmt(a.real()) << ',' << fmt(a.imag());
        os << '\n';
    }
}

inline json to_json(const ConservedReport& rep)
{
    json rows = json::array();
    for (const auto& r : rep.rows) {
        json alphas = json::array();
        for (cplx a : r.alphas)
            alphas.push_back(complex_json(a));
        rows.push_back({{"t", r.t}, {"A", r.A}, {"taus", r.taus}, {"alphas", alphas}});
    }
    json checkpoints = json::array();
    for (const auto& s : rep.states)
        checkpoints.push_back(checkpoint_json(s));
    return {{"rows", rows},
            {"drift", {{"A", rep.drift_A}, {"taus", rep.drift_tau}, {"alpha_relative", rep.drift_alpha}}},
            {"checkpoints", checkpoints}};
}

} // namespace jacobi_scatter::io

#pragma once

// jscatter command-line front end. `run` is the whole program; main() only
// forwards argv and the standard streams.

#include <algorithm>
#include <atomic>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "io.hpp"
#include "krein.hpp"
#include "toda.hpp"

namespace jacobi_scatter::cli {

using json = nlohmann::json;

inline constexpr int exit_ok = 0;
inline constexpr int exit_input = 2;
inline constexpr int exit_numerical = 3;

struct Options {
    std::string command;
    std::string scenario;
    std::string out;
    std::string format;
    int jobs = 1;
};

namespace detail {

/// Evaluates f(i) for i in [0, n) on `jobs` threads; results keep index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int jobs, F&& f)
{
    std::vector<T> out(n);
    const auto workers = static_cast<std::size_t>(std::max(1, std::min<int>(jobs, static_cast<int>(n))));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = f(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++)
                out[i] = f(i);
        });
    for (auto& t : pool)
        t.join();
    return out;
}

struct AlphaRow {
    cplx z;
    cplx alpha;
    cplx det;
    double A = 1.0;
    double rel_gap = 0.0;
    std::string status = "ok";
};

inline AlphaRow alpha_row(const Perturbation& p, const SpectralData& sd, double A, cplx z)
{
    AlphaRow r;
    r.z = z;
    r.A = A;
    for (double e : sd.band_edges)
        if (std::abs(z - e) < band_edge_exclusion) {
            r.status = "band_edge";
            return r;
        }
    try {
        r.alpha = alpha(p, z);
        if (std::abs(r.alpha) <= eigenvalue_hit_tolerance) {
            // a zero of alpha: the relative gap is undefined
            r.status = std::string(to_string(ErrorKind::eigenvalue_hit));
            return r;
        }
        r.det = perturbation_determinant(p, z);
        r.rel_gap = std::abs(A * r.alpha - r.det) / std::abs(r.det);
    } catch (const Error& e) {
        r.status = std::string(to_string(e.kind()));
    }
    return r;
}

inline std::string blank_or(const AlphaRow& r, double x) { return r.status == "ok" ? io::fmt(x) : ""; }

inline int emit_alpha(const Options& opt, const io::Scenario& s, std::ostream& out, std::ostream& err,
                      bool det_first)
{
    if (s.z_grid.empty())
        fail(ErrorKind::input, "scenario has no z_grid");
    const auto& p = s.perturbation;
    const auto sd = band_edges(p.background());
    const double A = alpha_asymptotics(p).A();
    const auto rows = parallel_map<AlphaRow>(s.z_grid.size(), opt.jobs,
                                             [&](std::size_t i) { return alpha_row(p, sd, A, s.z_grid[i]); });
    const auto warnings = std::count_if(rows.begin(), rows.end(), [](const AlphaRow& r) { return r.status != "ok"; });

    if (opt.format == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
            json row = {{"z", io::complex_json(r.z)}, {"status", r.status}};
            if (r.status == "ok") {
                row["alpha"] = io::complex_json(r.alpha);
                row["det"] = io::complex_json(r.det);
                row["A_alpha"] = io::complex_json(r.A * r.alpha);
                row["rel_gap"] = r.rel_gap;
            }
            arr.push_back(row);
        }
        out << json{{"A", A}, {"rows", arr}, {"warnings", warnings}}.dump(2) << '\n';
    } else if (det_first) {
        out << "re_z,im_z,re_det,im_det,re_A_alpha,im_A_alpha,rel_gap,status\n";
        for (const auto& r : rows)
            out << io::fmt(r.z.real()) << ',' << io::fmt(r.z.imag()) << ',' << blank_or(r, r.det.real()) << ','
                << blank_or(r, r.det.imag()) << ',' << blank_or(r, (r.A * r.alpha).real()) << ','
                << blank_or(r, (r.A * r.alpha).imag()) << ',' << blank_or(r, r.rel_gap) << ',' << r.status << '\n';
    } else {
        out << "re_z,im_z,re_alpha,im_alpha,re_det,im_det,rel_gap,status\n";
        for (const auto& r : rows)
            out << io::fmt(r.z.real()) << ',' << io::fmt(r.z.imag()) << ',' << blank_or(r, r.alpha.real()) << ','
                << blank_or(r, r.alpha.imag()) << ',' << blank_or(r, r.det.real()) << ','
                << blank_or(r, r.det.imag()) << ',' << blank_or(r, r.rel_gap) << ',' << r.status << '\n';
    }
    if (warnings > 0)
        err << json{{"warnings", warnings}}.dump() << '\n';
    return exit_ok;
}

inline int emit_spectrum(const Options& opt, const io::Scenario& s, std::ostream& out)
{
    const auto sd = band_edges(s.background);
    const auto eigs = eigenvalues(s.perturbation, sd);
    if (opt.format == "csv") {
        out << "kind,index,value\n";
        for (std::size_t i = 0; i < sd.band_edges.size(); ++i)
            out << "edge," << i << ',' << io::fmt(sd.band_edges[i]) << '\n';
        for (std::size_t i = 0; i < sd.dirichlet.size(); ++i)
            out << "dirichlet," << i << ',' << io::fmt(sd.dirichlet[i]) << '\n';
        for (std::size_t i = 0; i < eigs.size(); ++i)
            out << "eigenvalue," << i << ',' << io::fmt(eigs[i]) << '\n';
        return exit_ok;
    }
    auto j = io::to_json(sd);
    j["eigenvalues"] = eigs;
    out << j.dump(2) << '\n';
    return exit_ok;
}

inline ShiftProfile shift_profile(const io::Scenario& s)
{
    const auto& p = s.perturbation;
    const auto sd = band_edges(p.background());
    auto grid = make_shift_grid(sd, eigenvalues(p, sd), s.shift.nodes_per_band);
    grid.extra = s.shift.lambda;
    return spectral_shift(p, grid, s.shift.epsilons, s.shift.refine);
}

inline int emit_shift(const Options& opt, const io::Scenario& s, std::ostream& out, std::ostream& err)
{
    const auto prof = shift_profile(s);
    if (opt.format == "json")
        out << io::to_json(prof).dump(2) << '\n';
    else
        io::write_shift_csv(out, prof);
    if (!prof.warnings.empty())
        err << json{{"warnings", prof.warnings.size()}, {"messages", prof.warnings}}.dump() << '\n';
    return exit_ok;
}

inline int emit_traces(const Options& opt, const io::Scenario& s, std::ostream& out)
{
    const auto& p = s.perturbation;
    const int J = s.traces.orders;
    const auto direct = trace_report_direct(p, J);
    const auto recursion = trace_report_recursion(p, J, s.traces.radius);
    TraceReport moment{TraceMethod::moment, 0, {}};
    if (s.traces.moment_orders > 0)
        moment = trace_report_moment(shift_profile(s), s.traces.moment_orders);

    if (opt.format == "csv") {
        out << "j,direct,recursion,moment\n";
        for (int j = 1; j <= J; ++j) {
            out << j << ',' << io::fmt(direct.taus[j - 1]) << ',' << io::fmt(recursion.taus[j - 1]) << ',';
            if (j <= moment.J)
                out << io::fmt(moment.taus[j - 1]);
            out << '\n';
        }
        return exit_ok;
    }
    json j = {{"A", alpha_asymptotics(p).A()},
              {"direct", io::to_json(direct)},
              {"recursion", io::to_json(recursion)},
              {"moment", io::to_json(moment)}};
    out << j.dump(2) << '\n';
    return exit_ok;
}

inline int emit_evolve(const Options& opt, const io::Scenario& s, std::ostream& out)
{
    const TodaState s0{0.0, s.perturbation};
    const auto rep = conserved_report(s0, s.toda.times, s.toda.orders, s.toda.dt, s.toda.probes, s.toda.options);
    if (opt.format == "json")
        out << io::to_json(rep).dump(2) << '\n';
    else
        io::write_conserved_csv(out, rep, s.toda.probes.size());
    return exit_ok;
}

inline std::string default_format(const std::string& command)
{
    return (command == "spectrum" || command == "traces") ? "json" : "csv";
}

inline int error_exit(std::ostream& err, std::string_view kind, const std::string& message, int code)
{
    err << json{{"error", kind}, {"message", message}}.dump() << '\n';
    return code;
}

} // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options opt;
    CLI::App app{"Scattering, perturbation determinants and trace formulas for Jacobi operators "
                 "with periodic backgrounds"};
    app.add_option("command", opt.command, "spectrum | alpha | det | shift | traces | evolve")
        ->required()
        ->check(CLI::IsMember({"spectrum", "alpha", "det", "shift", "traces", "evolve"}));
    app.add_option("--scenario", opt.scenario, "scenario JSON file")->required();
    app.add_option("--out", opt.out, "write output to this file instead of stdout");
    app.add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--jobs", opt.jobs, "worker threads for grid evaluations")->check(CLI::PositiveNumber);

    std::vector<const char*> argv{"jscatter"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        return detail::error_exit(err, to_string(ErrorKind::input), e.what(), exit_input);
    }
    if (opt.format.empty())
        opt.format = detail::default_format(opt.command);

    try {
        const auto scenario = io::load_scenario(opt.scenario);
        std::ostringstream buf;
        int code = exit_ok;
        if (opt.command == "spectrum")
            code = detail::emit_spectrum(opt, scenario, buf);
        else if (opt.command == "alpha")
            code = detail::emit_alpha(opt, scenario, buf, err, false);
        else if (opt.command == "det")
            code = detail::emit_alpha(opt, scenario, buf, err, true);
        else if (opt.command == "shift")
            code = detail::emit_shift(opt, scenario, buf, err);
        else if (opt.command == "traces")
            code = detail::emit_traces(opt, scenario, buf);
        else
            code = detail::emit_evolve(opt, scenario, buf);

        if (opt.out.empty()) {
            out << buf.str();
        } else {
            std::ofstream f(opt.out);
            if (!f)
                fail(ErrorKind::input, "cannot open output file " + opt.out);
            f << buf.str();
        }
        return code;
    } catch (const Error& e) {
        return detail::error_exit(err, to_string(e.kind()), e.what(),
                                  e.kind() == ErrorKind::input ? exit_input : exit_numerical);
    }
}

} // namespace jacobi_scatter::cli

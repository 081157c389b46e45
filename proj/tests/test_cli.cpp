#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "jacobi_scatter/cli.hpp"
#include "oracles.hpp"

using namespace jacobi_scatter;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string shipped(const std::string& name)
{
    const char* dir = std::getenv("JSCATTER_SCENARIOS");
    return (fs::path(dir ? dir : "scenarios") / name).string();
}

std::string write_temp(const std::string& name, const std::string& text)
{
    const auto path = fs::temp_directory_path() / ("jscatter_test_" + name);
    std::ofstream(path) << text;
    return path.string();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

const std::string single_half = R"({
  "background": {"a": [0.5], "b": [0.0]},
  "perturbation": {"window": [0, 0], "da": [0.0], "db": [0.5]},
  "z_grid": {"points": [[2.0, 0.0], [0.0, 2.0], [1.0000000001, 0.0]]},
  "toda": {"times": [0, 1], "dt": 1e-2, "orders": 2}
})";

} // namespace

TEST_CASE("spectrum")
{
    auto r = run({"spectrum", "--scenario", shipped("free_empty.json")});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    REQUIRE(j["edges"] == json::array({-1.0, 1.0}));
    REQUIRE(j["genus"] == 0);
    REQUIRE(j["eigenvalues"].empty());

    r = run({"spectrum", "--scenario", shipped("free_single_site.json")});
    REQUIRE(r.code == 0);
    j = json::parse(r.out);
    REQUIRE(j["eigenvalues"].size() == 1);
    REQUIRE_THAT(j["eigenvalues"][0].get<double>(), WithinAbs(1.25, 1e-13));

    r = run({"spectrum", "--scenario", shipped("period2_window.json"), "--format", "csv"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows[0] == std::vector<std::string>{"kind", "index", "value"});
    REQUIRE(rows[1][0] == "edge");
    REQUIRE(std::count_if(rows.begin(), rows.end(), [](const auto& x) { return x[0] == "edge"; }) == 4);
}

TEST_CASE("input errors exit with code 2")
{
    auto r = run({"spectrum", "--scenario", write_temp("bad.json", "{\"background\": [1, 2")});
    REQUIRE(r.code == 2);
    REQUIRE(json::parse(r.err)["error"] == "schema");

    r = run({"spectrum", "--scenario", write_temp("key.json", R"({"backgrund": {"a": [0.5], "b": [0]}})")});
    REQUIRE(r.code == 2);
    REQUIRE_THAT(r.err, ContainsSubstring("backgrund"));

    r = run({"spectrum", "--scenario", write_temp("neg.json", R"({"background": {"a": [-0.5], "b": [0]}})")});
    REQUIRE(r.code == 2);

    r = run({"spectrum", "--scenario", write_temp("period.json", R"({"background": {"period": 2, "a": [0.5], "b": [0]}})")});
    REQUIRE(r.code == 2);

    r = run({"spectrum", "--scenario", "/nonexistent/scenario.json"});
    REQUIRE(r.code == 2);

    r = run({"spectrum"});
    REQUIRE(r.code == 2);
    r = run({"bogus", "--scenario", shipped("free_empty.json")});
    REQUIRE(r.code == 2);
    r = run({"alpha", "--scenario", shipped("free_empty.json"), "--format", "xml"});
    REQUIRE(r.code == 2);
}

TEST_CASE("alpha and det tables")
{
    SECTION("zero perturbation: alpha column is 1")
    {
        const auto r = run({"alpha", "--scenario", shipped("free_empty.json")});
        REQUIRE(r.code == 0);
        const auto rows = csv_rows(r.out);
        REQUIRE(rows[0][2] == "re_alpha");
        REQUIRE(rows.size() == 3);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            REQUIRE(rows[i][2] == "1");
            REQUIRE(rows[i][3] == "0");
            REQUIRE(rows[i][7] == "ok");
        }
    }
    SECTION("single site c = 1/2 at z = 2, and an exclusion-zone row")
    {
        const auto r = run({"alpha", "--scenario", write_temp("half.json", single_half)});
        REQUIRE(r.code == 0);
        const auto rows = csv_rows(r.out);
        REQUIRE_THAT(std::stod(rows[1][2]), WithinAbs(0.711325, 1e-6));
        REQUIRE(std::stod(rows[1][6]) < 1e-12);
        REQUIRE(rows[3][7] == "band_edge");
        REQUIRE(rows[3][2].empty());
        REQUIRE(json::parse(r.err)["warnings"] == 1);
    }
    SECTION("det column order and JSON form")
    {
        const auto path = write_temp("half.json", single_half);
        const auto csv = run({"det", "--scenario", path});
        REQUIRE(csv.code == 0);
        const auto rows = csv_rows(csv.out);
        REQUIRE(rows[0][2] == "re_det");
        REQUIRE(rows[0][4] == "re_A_alpha");
        REQUIRE(rows[1][2] == rows[1][4].substr(0, 8) + rows[1][2].substr(8));

        const auto js = run({"det", "--scenario", path, "--format", "json"});
        const auto j = json::parse(js.out);
        REQUIRE(j["A"] == 1.0);
        REQUIRE(j["rows"].size() == 3);
        REQUIRE(j["rows"][1]["rel_gap"].get<double>() < 1e-12);
        REQUIRE(j["rows"][2]["status"] == "band_edge");
    }
    SECTION("an eigenvalue on the grid is a row-level marker")
    {
        const auto path = write_temp("hit.json", R"({
          "perturbation": {"window": [0, 0], "da": [0.0], "db": [0.75]},
          "z_grid": {"points": [[1.25, 0.0], [0.0, 1.0]]}})");
        const auto r = run({"alpha", "--scenario", path});
        REQUIRE(r.code == 0);
        const auto rows = csv_rows(r.out);
        REQUIRE(rows[1][7] == "eigenvalue_hit");
        REQUIRE(rows[1][6].empty());
        REQUIRE(rows[2][7] == "ok");
        REQUIRE(json::parse(r.err)["warnings"] == 1);
    }
}

TEST_CASE("determinism")
{
    for (const char* cmd : {"alpha", "det", "spectrum", "traces"}) {
        const auto a = run({cmd, "--scenario", shipped("period2_window.json")});
        const auto b = run({cmd, "--scenario", shipped("period2_window.json")});
        const auto c = run({cmd, "--scenario", shipped("period2_window.json"), "--jobs", "4"});
        REQUIRE(a.code == 0);
        REQUIRE(a.out == b.out);
        REQUIRE(a.out == c.out);
    }
}

TEST_CASE("shift, traces and evolve")
{
    SECTION("zero perturbation")
    {
        auto r = run({"shift", "--scenario", shipped("free_empty.json")});
        REQUIRE(r.code == 0);
        for (const auto& row : csv_rows(r.out))
            if (row[0] == "band" || row[0] == "plateau")
                REQUIRE(std::stod(row[3]) == 0.0);

        r = run({"traces", "--scenario", shipped("free_empty.json")});
        REQUIRE(r.code == 0);
        const auto j = json::parse(r.out);
        for (const char* m : {"direct", "recursion", "moment"})
            for (const auto& t : j[m]["taus"])
                REQUIRE(std::abs(t.get<double>()) < 1e-12);

        r = run({"evolve", "--scenario", shipped("free_empty.json")});
        REQUIRE(r.code == 0);
        const auto rows = csv_rows(r.out);
        REQUIRE(rows.size() == 5);
        for (std::size_t i = 2; i < rows.size(); ++i)
            for (std::size_t k = 1; k < rows[i].size(); ++k)
                REQUIRE(rows[i][k] == rows[1][k]);
    }
    SECTION("single site c = 3/4 traces")
    {
        const auto r = run({"traces", "--scenario", shipped("free_single_site.json")});
        REQUIRE(r.code == 0);
        const auto j = json::parse(r.out);
        REQUIRE(j["direct"]["method"] == "direct");
        REQUIRE(j["direct"]["taus"].size() == 8);
        REQUIRE_THAT(j["direct"]["taus"][0].get<double>(), WithinAbs(0.75, 1e-15));
        REQUIRE_THAT(j["direct"]["taus"][1].get<double>(), WithinAbs(0.5625, 1e-15));
        for (int k = 0; k < 8; ++k) {
            const double d = j["direct"]["taus"][k], rec = j["recursion"]["taus"][k];
            REQUIRE(std::abs(d - rec) < 1e-8 * std::max(1.0, std::abs(d)));
        }
        for (int k = 0; k < 4; ++k) {
            const double d = j["direct"]["taus"][k], mom = j["moment"]["taus"][k];
            REQUIRE(std::abs(d - mom) < 1e-3 * std::max(1.0, std::abs(d)));
        }
    }
    SECTION("shift samples and JSON")
    {
        const auto r = run({"shift", "--scenario", shipped("free_single_site.json"), "--format", "json"});
        REQUIRE(r.code == 0);
        const auto j = json::parse(r.out);
        REQUIRE(j["eigenvalue_steps"].size() == 1);
        REQUIRE(j["eigenvalue_steps"][0]["jump"] == -1);
        REQUIRE(j["samples"].size() == 3);
        REQUIRE_THAT(j["samples"][2]["xi"].get<double>(), WithinAbs(1.0, 1e-6));
    }
    SECTION("evolve: CSV header and JSON checkpoints")
    {
        const auto path = write_temp("half.json", single_half);
        const auto csv = run({"evolve", "--scenario", path});
        REQUIRE(csv.code == 0);
        const auto rows = csv_rows(csv.out);
        REQUIRE(rows[0] == std::vector<std::string>{"t", "A", "tau_1", "tau_2", "re_alpha_0", "im_alpha_0"});
        REQUIRE(rows.size() == 3);

        const auto js = run({"evolve", "--scenario", path, "--format", "json"});
        const auto j = json::parse(js.out);
        REQUIRE(j["checkpoints"].size() == 2);
        REQUIRE(j["drift"]["taus"][0].get<double>() < 1e-8);
        const auto state = io::state_from_checkpoint(j["checkpoints"][1]);
        REQUIRE(state.time == 1.0);
        REQUIRE(io::checkpoint_json(state) == j["checkpoints"][1]);
    }
    SECTION("dt too large: positivity loss, exit 3 with step diagnostics")
    {
        const auto path = write_temp("blowup.json", R"({
          "perturbation": {"window": [0, 0], "da": [0.0], "db": [8.0]},
          "toda": {"times": [0, 10], "dt": 2.0}})");
        const auto r = run({"evolve", "--scenario", path});
        REQUIRE(r.code == 3);
        const auto e = json::parse(r.err);
        REQUIRE(e["error"] == "positivity_loss");
        REQUIRE_THAT(e["message"].get<std::string>(), ContainsSubstring("step"));
    }
}

TEST_CASE("--out writes the file")
{
    const auto dest = (fs::temp_directory_path() / "jscatter_test_out.json").string();
    fs::remove(dest);
    const auto r = run({"spectrum", "--scenario", shipped("free_single_site.json"), "--out", dest});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.empty());
    std::ifstream in(dest);
    const auto j = json::parse(in);
    REQUIRE(j["genus"] == 0);
}

TEST_CASE("schema round-trip")
{
    for (const char* name : {"free_empty.json", "free_single_site.json", "period2_window.json"}) {
        const auto s = io::load_scenario(shipped(name));
        const auto j = io::to_json(s);
        const auto back = io::scenario_from_json(j);
        REQUIRE(io::to_json(back) == j);
        // the text form is lossless as well
        REQUIRE(io::to_json(io::scenario_from_string(j.dump())) == j);
    }

    // tensor z-grid, absolute coefficients and truncation
    const auto s = io::load_scenario(shipped("period2_window.json"));
    REQUIRE(s.z_grid.size() == 15);
    REQUIRE(s.perturbation.window().last == 2);
    REQUIRE_THAT(s.perturbation.b(1), WithinAbs(-0.3 - 0.1, 1e-15));
    const auto t = io::scenario_from_string(R"({
      "perturbation": {"window": [-2, 2], "da": [1e-16, 0.0, 0.1, 0.0, 0.0], "db": [0, 0, 0.2, 1e-15, 0],
                       "truncate": 1e-12}})");
    REQUIRE(t.perturbation.window().first == 0);
    REQUIRE(t.perturbation.window().last == 0);

    // JSON numbers keep full double precision
    const double x = 0.1 + 0.2;
    REQUIRE(json::parse(json(x).dump()).get<double>() == x);
    REQUIRE(io::fmt(x) == "0.30000000000000004");
}

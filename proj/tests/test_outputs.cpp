#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "rabi/format.hpp"
#include "rabi/oracle.hpp"
#include "rabi/spectrum.hpp"

using namespace rabi;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_SUITE("outputs") {

TEST_CASE("shortest round-trip doubles") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e21, 0.2000000000006613})
        CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(0.25) == "0.25");
}

TEST_CASE("sweep CSV round-trips through its schema") {
    const ModelParams p{1.0, 0.0, 1.2, 0.3};
    const auto sweep = sweep_spectrum(p, 0.1, 0.3, 3, 4);
    std::vector<Eigen::VectorXd> oracle;
    for (double g : sweep.g_values) oracle.push_back(oracle_levels(p.with_g(g), 4, 60).values);

    std::ostringstream os;
    write_sweep_csv(os, sweep, &oracle);
    const auto rows = parse_csv(os.str());
    REQUIRE(rows.size() == 1 + 3 * 4);
    CHECK(rows[0] == std::vector<std::string>{"g", "N", "x", "E", "on_baseline", "oracle_dE"});
    for (std::size_t r = 1; r < rows.size(); ++r) {
        REQUIRE(rows[r].size() == 6);
        const int col = static_cast<int>((r - 1) / 4), n = static_cast<int>((r - 1) % 4);
        const auto& sp = sweep.levels[col][n];
        CHECK(std::stod(rows[r][0]) == sweep.g_values(col));
        CHECK(std::stoi(rows[r][1]) == n);
        CHECK(std::stod(rows[r][2]) == sp.x);
        CHECK(std::stod(rows[r][3]) == sp.energy);
        CHECK(rows[r][4] == (sp.on_baseline ? sp.on_baseline->label() : ""));
        CHECK(std::abs(std::stod(rows[r][5])) < 1e-6);
    }

    std::ostringstream again;
    write_sweep_csv(again, sweep_spectrum(p, 0.1, 0.3, 3, 4), &oracle);
    CHECK(again.str() == os.str());
}

TEST_CASE("sweep CSV without oracle column") {
    const auto sweep = sweep_spectrum(ModelParams{1.0, 0.0, 1.2, 0.3}, 0.1, 0.2, 2, 2);
    std::ostringstream os;
    write_sweep_csv(os, sweep);
    CHECK(parse_csv(os.str())[0] == std::vector<std::string>{"g", "N", "x", "E", "on_baseline"});
}

TEST_CASE("baselines CSV rows") {
    const auto sweep = sweep_spectrum(ModelParams{1.0, 0.0, 1.2, 0.3}, 0.5, 1.0, 2, 1);
    std::ostringstream os;
    write_baselines_csv(os, sweep, 1);
    const auto rows = parse_csv(os.str());
    REQUIRE(rows.size() == 1 + 2 * 2 * 2);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double g = std::stod(rows[r][0]);
        const int n = std::stoi(rows[r][1]);
        const double s = rows[r][2] == "plus" ? 1.0 : -1.0;
        CHECK(std::stod(rows[r][3]) == doctest::Approx(n - g * g + s * 0.3).epsilon(1e-15));
    }
}

}  // TEST_SUITE

// Files written by the CLI tests; skipped when run outside ctest.
TEST_SUITE("cli_files") {

TEST_CASE("CLI outputs parse against their schemas") {
    const char* dir_env = std::getenv("RABI_CLI_OUT");
    if (!dir_env) return;
    const std::filesystem::path dir(dir_env);
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        REQUIRE(in.good());
        return std::string(std::istreambuf_iterator<char>(in), {});
    };

    const auto spectrum = parse_csv(slurp(dir / "a" / "spectrum.csv"));
    CHECK(spectrum[0] == std::vector<std::string>{"g", "N", "x", "E", "on_baseline", "oracle_dE"});
    CHECK(spectrum.size() == 1 + 12 * 6);
    for (std::size_t r = 1; r < spectrum.size(); ++r) {
        const double g = std::stod(spectrum[r][0]), x = std::stod(spectrum[r][2]), e = std::stod(spectrum[r][3]);
        CHECK(e == doctest::Approx(x - g * g).epsilon(1e-15));
        CHECK(std::abs(std::stod(spectrum[r][5])) < 1e-6);
    }
    const auto baselines = parse_csv(slurp(dir / "a" / "spectrum_baselines.csv"));
    CHECK(baselines[0] == std::vector<std::string>{"g", "baseline_N", "branch", "E"});

    const auto ex = nlohmann::json::parse(slurp(dir / "exceptional.json"));
    CHECK(ex["params"]["delta"] == 1.2);
    for (const auto& r : ex["records"]) {
        CHECK((r["class"] == "S1" || r["class"] == "S2" || r["class"] == "ambiguous"));
        CHECK(r["x_p"].get<double>() ==
              doctest::Approx(r["N"].get<int>() + (r["branch"] == "plus" ? 0.3 : -0.3)).epsilon(1e-15));
    }
    std::map<std::pair<int, std::string>, int> s2;
    for (const auto& c : ex["counts"]) s2[{c["N"].get<int>(), c["branch"].get<std::string>()}] = c["s2"];
    CHECK(s2[{1, "plus"}] == 1);
    CHECK(s2[{1, "minus"}] == 1);
    CHECK(s2[{2, "plus"}] == 2);
    CHECK(s2[{2, "minus"}] == 2);

    const auto oc = nlohmann::json::parse(slurp(dir / "oracle.json"));
    for (const char* key : {"spectrum_equivalence", "symmetry_invariance", "cutoff_convergence"})
        CHECK(oc[key]["pass"] == true);
    CHECK(oc["pass"] == true);
}

}  // TEST_SUITE

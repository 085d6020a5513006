#include <doctest.h>

#include <map>
#include <sstream>

#include "rabi/oracle.hpp"
#include "rabi/spectrum.hpp"

using namespace rabi;

TEST_SUITE("spectrum") {

TEST_CASE("displaced oscillator gives a doubled ladder") {
    const ModelParams p{1.0, 0.5, 0.0, 0.0};
    const auto pts = scan_zeros(p, -0.5, 3.5);
    REQUIRE(pts.size() == 8);
    for (int i = 0; i < 8; ++i) {
        CHECK(pts[i].x == doctest::Approx(i / 2).epsilon(1e-10));
        CHECK(pts[i].energy == doctest::Approx(i / 2 - 0.25).epsilon(1e-10));
        CHECK(pts[i].index == i);
    }
}

TEST_CASE("scan matches the oracle on a wide window") {
    const ModelParams p{1.0, 0.7, 1.2, 0.3};
    const auto pts = scan_zeros(p, -2.0, 5.0);
    const auto ref = oracle_levels(p, 16, 60).values;
    int matched = 0;
    for (Eigen::Index i = 0; i < ref.size(); ++i) {
        const double x = ref(i) + p.g * p.g;
        if (x <= -2.0 || x >= 5.0) continue;
        REQUIRE(matched < static_cast<int>(pts.size()));
        CHECK(std::abs(pts[matched].energy - ref(i)) < 1e-6);
        ++matched;
    }
    CHECK(matched == static_cast<int>(pts.size()));
}

TEST_CASE("levels are ordered and energies are x minus g^2") {
    const ModelParams p{1.0, 0.9, 1.2, 0.3};
    const auto pts = energy_levels(p, 10);
    REQUIRE(pts.size() == 10);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts[i].energy == pts[i].x - p.g * p.g);
        if (i) CHECK(pts[i].x > pts[i - 1].x);
    }
}

TEST_CASE("a non-degenerate baseline crossing appears once") {
    const ModelParams p{1.0, 0.2, 1.2, 0.3};
    const auto pts = energy_levels(p, 6);
    int on = 0;
    for (const auto& s : pts)
        if (s.on_baseline) {
            ++on;
            CHECK(s.on_baseline->label() == "1+");
            CHECK(s.x == doctest::Approx(1.3).epsilon(1e-8));
        }
    CHECK(on == 1);
}

TEST_CASE("a degenerate point at zero bias appears twice") {
    const ModelParams p{1.0, 0.4, 0.6, 0.0};
    const auto pts = energy_levels(p, 6);
    const auto ref = oracle_levels(p, 6, 60).values;
    int on = 0;
    for (int i = 0; i < 6; ++i) {
        CHECK(std::abs(pts[i].energy - ref(i)) < 1e-6);
        on += pts[i].on_baseline.has_value();
    }
    CHECK(on == 2);
}

TEST_CASE("spectra are invariant under sign flips") {
    const ModelParams p{1.0, 0.55, 1.2, 0.3};
    const auto ref = energy_levels(p, 8);
    for (ModelParams q : {ModelParams{1.0, -0.55, 1.2, 0.3}, ModelParams{1.0, 0.55, -1.2, 0.3},
                          ModelParams{1.0, 0.55, 1.2, -0.3}}) {
        const auto got = energy_levels(q, 8);
        for (int i = 0; i < 8; ++i) CHECK(std::abs(got[i].energy - ref[i].energy) < 1e-10);
    }
}

TEST_CASE("enlarging the window keeps earlier roots") {
    const ModelParams p{1.0, 0.8, 1.2, 0.3};
    const auto small = scan_zeros(p, -2.0, 2.0);
    const auto big = scan_zeros(p, -2.0, 4.0);
    REQUIRE(big.size() >= small.size());
    for (std::size_t i = 0; i < small.size(); ++i) CHECK(std::abs(big[i].x - small[i].x) < 1e-9);
}

TEST_CASE("sweep columns are continuous") {
    const auto sweep = sweep_spectrum(ModelParams{1.0, 0.0, 1.2, 0.3}, 0.05, 1.2, 47, 6);
    CHECK_FALSE(sweep.any_flagged());
    const double dg = sweep.g_values(1) - sweep.g_values(0);
    for (int j = 1; j < sweep.g_values.size(); ++j) {
        for (int n = 0; n < 6; ++n) {
            const double slope_bound = 2.0 * (sweep.g_values(j) + 1.0) * dg + 1e-9;
            CHECK(std::abs(sweep.levels[j][n].energy - sweep.levels[j - 1][n].energy) < slope_bound);
        }
    }
}

TEST_CASE("zero bias merges the two baseline families") {
    SpectrumSweep sweep = sweep_spectrum(ModelParams{1.0, 0.0, 1.2, 0.0}, 0.1, 0.3, 3, 2);
    std::ostringstream os;
    write_baselines_csv(os, sweep, 2);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "g,baseline_N,branch,E");
    std::map<std::string, std::string> seen;
    while (std::getline(is, line)) {
        const auto c1 = line.find(','), c2 = line.find(',', c1 + 1), c3 = line.find(',', c2 + 1);
        const std::string key = line.substr(0, c2);
        const std::string e = line.substr(c3 + 1);
        if (seen.count(key)) CHECK(seen[key] == e);
        seen[key] = e;
    }
    CHECK(seen.size() == 9);
}

TEST_CASE("weak coupling approaches the uncoupled doublet") {
    const ModelParams p{1.0, 0.05, 1.2, 0.3};
    const auto pts = energy_levels(p, 2);
    const double split = std::sqrt(1.53);
    CHECK(std::abs(pts[0].energy + split) < 5e-3);
    CHECK(std::abs(pts[1].energy - (1.0 - split)) < 5e-3);
}

TEST_CASE("the scan window has a ceiling") {
    ScanOptions opts;
    opts.x_ceiling = 3.0;
    CHECK_THROWS_AS(energy_levels(ModelParams{1.0, 0.5, 1.2, 0.3}, 20, {}, opts), WindowExhausted);
}

}  // TEST_SUITE

// Command-line front end: spectra, exceptional points, constraint curves and
// oracle cross-checks. Exit codes: 0 ok, 1 flagged non-convergence,
// 2 validation error, 3 oracle check failed.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rabi/curves.hpp"
#include "rabi/exceptional.hpp"
#include "rabi/format.hpp"
#include "rabi/gfunction.hpp"
#include "rabi/oracle.hpp"
#include "rabi/spectrum.hpp"

namespace {

using namespace rabi;
using ojson = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFlagged = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCheckFailed = 3;

struct Scan {
    double lo = 0.0;
    double hi = 0.0;
    int steps = 0;
};

Scan parse_scan(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() != 3) throw std::invalid_argument("expected lo:hi:steps, got '" + text + "'");
    Scan s;
    try {
        s.lo = std::stod(parts[0]);
        s.hi = std::stod(parts[1]);
        s.steps = std::stoi(parts[2]);
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed range '" + text + "'");
    }
    if (!(s.hi > s.lo)) throw std::invalid_argument("range '" + text + "' needs hi > lo");
    if (s.steps < 1) throw std::invalid_argument("range '" + text + "' needs steps >= 1");
    return s;
}

struct Common {
    ModelParams params{1.0, 0.0, 0.0, 0.0};
    Truncation trunc;
    std::string out;
    std::string format = "csv";

    void add_to(CLI::App* app, std::string default_out) {
        out = std::move(default_out);
        app->add_option("--omega", params.omega, "Boson frequency")->capture_default_str();
        app->add_option("--delta", params.delta, "Level splitting")->capture_default_str();
        app->add_option("--epsilon", params.epsilon, "Bias")->capture_default_str();
        app->add_option("--nmax", trunc.n_max, "Series index cutoff")->capture_default_str();
        app->add_option("--tail-tol", trunc.tail_tol, "Relative tail stopping threshold")
            ->capture_default_str();
        app->add_option("--out", out, "Output path")->capture_default_str();
        app->add_option("--format", format, "Output format")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
    }

    void validate() const {
        params.validate(false);
        trunc.validate();
        require_non_resonant(params);
    }
};

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return os;
}

std::vector<Baseline> baseline_list(int n_min, int n_max, const std::string& branch) {
    if (n_min < 0 || n_max < n_min) throw std::invalid_argument("need 0 <= n-min <= n-max");
    std::vector<Baseline> out;
    for (int n = n_min; n <= n_max; ++n) {
        if (branch != "minus") out.push_back({n, Branch::plus});
        if (branch != "plus") out.push_back({n, Branch::minus});
    }
    return out;
}

ojson params_json(const ModelParams& p, const Truncation& t) {
    ojson j;
    j["omega"] = p.omega;
    j["delta"] = p.delta;
    j["epsilon"] = p.epsilon;
    j["n_max"] = t.n_max;
    j["tail_tol"] = t.tail_tol;
    return j;
}

// --- spectrum ---------------------------------------------------------------

struct SpectrumCmd {
    Common common;
    std::string g_range = "0.05:1.2:200";
    int levels = 8;
    int oracle_cutoff = 0;
    int baseline_top = 4;
    bool allow_flagged = false;

    int run() const {
        common.validate();
        const Scan g = parse_scan(g_range);
        if (levels < 1) throw std::invalid_argument("--levels must be >= 1");
        if (g.steps < 2) throw std::invalid_argument("--g needs at least 2 steps");

        const SpectrumSweep sweep =
            sweep_spectrum(common.params, g.lo, g.hi, g.steps, levels, common.trunc);

        std::vector<Eigen::VectorXd> oracle;
        double worst = 0.0;
        if (oracle_cutoff > 0) {
            for (Eigen::Index i = 0; i < sweep.g_values.size(); ++i) {
                const auto ref = oracle_levels(common.params.with_g(sweep.g_values(i)), levels,
                                               oracle_cutoff);
                for (const auto& sp : sweep.levels[i])
                    worst = std::max(worst, std::abs(sp.energy - ref.values(sp.index)));
                oracle.push_back(ref.values);
            }
        }

        const std::filesystem::path out(common.out);
        if (common.format == "csv") {
            auto os = open_out(out);
            write_sweep_csv(os, sweep, oracle_cutoff > 0 ? &oracle : nullptr);
            auto bs = open_out(out.parent_path() / (out.stem().string() + "_baselines.csv"));
            write_baselines_csv(bs, sweep, baseline_top);
        } else {
            ojson doc;
            doc["params"] = params_json(common.params, common.trunc);
            ojson rows = ojson::array();
            for (Eigen::Index i = 0; i < sweep.g_values.size(); ++i) {
                for (const auto& sp : sweep.levels[i]) {
                    ojson r;
                    r["g"] = sweep.g_values(i);
                    r["N"] = sp.index;
                    r["x"] = sp.x;
                    r["E"] = sp.energy;
                    r["on_baseline"] = sp.on_baseline ? sp.on_baseline->label() : "";
                    if (oracle_cutoff > 0) r["oracle_dE"] = sp.energy - oracle[i](sp.index);
                    rows.push_back(std::move(r));
                }
            }
            doc["levels"] = std::move(rows);
            auto os = open_out(out);
            os << doc.dump(2) << '\n';
        }

        if (oracle_cutoff > 0) std::cerr << "max |E - E_oracle| = " << worst << '\n';
        if (sweep.any_flagged() && !allow_flagged) {
            std::cerr << "spectrum: some columns are truncated or unconverged\n";
            return kExitFlagged;
        }
        return kExitOk;
    }
};

// --- exceptional ------------------------------------------------------------

struct ExceptionalCmd {
    Common common;
    int n_min = 1;
    int n_max_level = 4;
    std::string branch = "both";
    std::string g_range = "0.001:5:2000";
    bool no_oracle = false;

    int run() const {
        common.validate();
        const Scan g = parse_scan(g_range);
        ExceptionalOptions opts;
        opts.s2_steps = g.steps;
        opts.verify_with_oracle = !no_oracle;

        std::vector<ExceptionalPoint> all;
        ojson counts = ojson::array();
        for (const Baseline& b : baseline_list(n_min, n_max_level, branch)) {
            const auto s1 = find_s1(b, common.params, g.lo, g.hi, common.trunc, opts);
            const auto s2 = find_s2(b, common.params, g.lo, g.hi, common.trunc, opts);
            ojson c;
            c["N"] = b.n_level;
            c["branch"] = branch_name(b.branch);
            c["s1"] = s1.size();
            c["s2"] = s2.size();
            counts.push_back(std::move(c));
            all.insert(all.end(), s1.begin(), s1.end());
            all.insert(all.end(), s2.begin(), s2.end());
        }

        auto os = open_out(common.out);
        if (common.format == "json") {
            ojson doc;
            doc["params"] = params_json(common.params, common.trunc);
            doc["g_window"] = {g.lo, g.hi};
            doc["records"] = ojson::parse(exceptional_json(all));
            doc["counts"] = std::move(counts);
            os << doc.dump(2) << '\n';
        } else {
            os << "N,branch,delta,g,x_p,energy,class,constraint_value\n";
            for (const auto& pt : all)
                os << pt.baseline.n_level << ',' << branch_name(pt.baseline.branch) << ','
                   << format_double(pt.delta) << ',' << format_double(pt.g) << ','
                   << format_double(pt.x_p) << ',' << format_double(pt.energy) << ','
                   << class_name(pt.cls) << ',' << format_double(pt.constraint_value) << '\n';
        }
        return kExitOk;
    }
};

// --- curves -----------------------------------------------------------------

struct CurvesCmd {
    Common common;
    std::string preset;
    int n_min = 0;
    int n_max_level = 3;
    std::string branch = "plus";
    std::string delta_range = "0:6:600";
    std::string g_range = "0.02:3:600";

    int run() {
        if (preset == "unbiased") {
            common.params.epsilon = 0.0;
            branch = "plus";  // both branches coincide at epsilon = 0
        } else if (preset == "biased") {
            common.params.epsilon = 0.3;
            branch = "both";
        }
        common.validate();
        if (common.format != "csv") throw std::invalid_argument("curves writes CSV only");
        const Scan d = parse_scan(delta_range);
        const Scan g = parse_scan(g_range);
        if (!(g.lo > 0.0)) throw std::invalid_argument("--g-range must start above 0");
        const auto paths = emit_figure(baseline_list(n_min, n_max_level, branch), common.params,
                                       {d.lo, d.hi, d.steps}, {g.lo, g.hi, g.steps}, common.trunc,
                                       common.out);
        for (const auto& p : paths) std::cout << p.string() << '\n';
        return kExitOk;
    }
};

// --- oracle-check -----------------------------------------------------------

struct OracleCheckCmd {
    Common common;
    std::string g_range = "0.1:1.0:10";
    int levels = 6;
    int cutoff = 60;

    int run() const {
        common.validate();
        const Scan g = parse_scan(g_range);
        if (g.steps < 2) throw std::invalid_argument("--g needs at least 2 steps");
        const Eigen::VectorXd gs = Eigen::VectorXd::LinSpaced(g.steps, g.lo, g.hi);

        double equivalence = 0.0, symmetry = 0.0, drift = 0.0;
        bool converged = true;
        for (double gv : gs) {
            const ModelParams p = common.params.with_g(gv);
            const auto scan = energy_levels(p, levels, common.trunc);
            const auto ref = oracle_levels(p, levels, cutoff);
            drift = std::max(drift, ref.cutoff_drift);
            converged = converged && ref.converged;
            for (int i = 0; i < levels; ++i) {
                equivalence = std::max(equivalence, std::abs(scan[i].energy - ref.values(i)));
                converged = converged && scan[i].converged;
            }
            ModelParams flips[3] = {p, p, p};
            flips[0].epsilon = -p.epsilon;
            flips[1].g = -p.g;
            flips[2].delta = -p.delta;
            for (const ModelParams& q : flips) {
                const auto scan_q = energy_levels(q, levels, common.trunc);
                const auto ref_q = oracle_levels(q, levels, cutoff);
                for (int i = 0; i < levels; ++i) {
                    symmetry = std::max(symmetry, std::abs(scan_q[i].energy - scan[i].energy));
                    symmetry = std::max(symmetry, std::abs(ref_q.values(i) - ref.values(i)));
                }
            }
        }

        const bool pass_eq = equivalence < 1e-6;
        const bool pass_sym = symmetry < 1e-10;
        const bool pass_cut = drift < 1e-9;
        ojson report;
        report["params"] = params_json(common.params, common.trunc);
        report["g_values"] = std::vector<double>(gs.begin(), gs.end());
        report["levels"] = levels;
        report["fock_cutoff"] = cutoff;
        report["spectrum_equivalence"] = {{"max_abs_dE", equivalence}, {"tol", 1e-6}, {"pass", pass_eq}};
        report["symmetry_invariance"] = {{"max_abs_dE", symmetry}, {"tol", 1e-10}, {"pass", pass_sym}};
        report["cutoff_convergence"] = {{"max_drift", drift}, {"tol", 1e-9}, {"pass", pass_cut}};
        report["pass"] = pass_eq && pass_sym && pass_cut;

        if (common.out == "-") {
            std::cout << report.dump(2) << '\n';
        } else {
            auto os = open_out(common.out);
            os << report.dump(2) << '\n';
        }
        if (!converged) return kExitFlagged;
        return report["pass"].get<bool>() ? kExitOk : kExitCheckFailed;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized Rabi model spectra from the regularized G-function"};
    app.require_subcommand(1);

    SpectrumCmd spectrum;
    auto* sp = app.add_subcommand("spectrum", "Lowest levels as a function of g (CSV/JSON)");
    spectrum.common.add_to(sp, "spectrum.csv");
    sp->add_option("--g", spectrum.g_range, "Coupling sweep lo:hi:steps")->capture_default_str();
    sp->add_option("--levels", spectrum.levels, "Levels per coupling")->capture_default_str();
    sp->add_option("--oracle-check", spectrum.oracle_cutoff,
                   "Append E - E_oracle using this Fock cutoff");
    sp->add_option("--baseline-top", spectrum.baseline_top, "Highest N in the baselines file")
        ->capture_default_str();
    sp->add_flag("--allow-flagged", spectrum.allow_flagged, "Exit 0 even with flagged columns");

    ExceptionalCmd exceptional;
    auto* ex = app.add_subcommand("exceptional", "S1/S2 exceptional points on baselines");
    exceptional.common.add_to(ex, "exceptional.json");
    exceptional.common.format = "json";
    ex->add_option("--n-min", exceptional.n_min, "Lowest baseline N")->capture_default_str();
    ex->add_option("--n-max", exceptional.n_max_level, "Highest baseline N")->capture_default_str();
    ex->add_option("--branch", exceptional.branch, "plus, minus or both")
        ->check(CLI::IsMember({"plus", "minus", "both"}))
        ->capture_default_str();
    ex->add_option("--g", exceptional.g_range, "Coupling window lo:hi:steps (S2 grid)")
        ->capture_default_str();
    ex->add_flag("--no-oracle", exceptional.no_oracle, "Skip oracle degeneracy verification");

    CurvesCmd curves;
    auto* cu = app.add_subcommand("curves", "Constraint curves in the delta-g plane");
    curves.common.add_to(cu, "curves");
    cu->add_option("--preset", curves.preset, "unbiased (epsilon=0) or biased (epsilon=0.3, both branches)")
        ->check(CLI::IsMember({"unbiased", "biased"}));
    cu->add_option("--n-min", curves.n_min, "Lowest baseline N")->capture_default_str();
    cu->add_option("--n-max", curves.n_max_level, "Highest baseline N")->capture_default_str();
    cu->add_option("--branch", curves.branch, "plus, minus or both")
        ->check(CLI::IsMember({"plus", "minus", "both"}))
        ->capture_default_str();
    cu->add_option("--delta-range", curves.delta_range, "lo:hi:cells")->capture_default_str();
    cu->add_option("--g-range", curves.g_range, "lo:hi:cells")->capture_default_str();

    OracleCheckCmd oracle;
    auto* oc = app.add_subcommand("oracle-check", "Cross-validate against exact diagonalization");
    oracle.common.add_to(oc, "-");
    oracle.common.params.delta = 1.2;
    oracle.common.params.epsilon = 0.3;
    oc->add_option("--g", oracle.g_range, "Couplings lo:hi:steps")->capture_default_str();
    oc->add_option("--levels", oracle.levels, "Levels compared")->capture_default_str();
    oc->add_option("--cutoff", oracle.cutoff, "Fock cutoff M")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*sp) return spectrum.run();
        if (*ex) return exceptional.run();
        if (*cu) return curves.run();
        if (*oc) return oracle.run();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ResonantParameters& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFlagged;
    }
    return kExitOk;
}

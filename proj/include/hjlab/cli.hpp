#pragma once

// Command-line front end: experiments, ergodic brackets, evolutions,
// Hopf-Lax evaluations, (H4) checks and minimizer extraction.
//
// Exit codes: 0 success, 1 failed verdict or computation, 2 usage or
// configuration error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hjlab/core.hpp"
#include "hjlab/ergodic.hpp"
#include "hjlab/experiments.hpp"
#include "hjlab/fd_solver.hpp"
#include "hjlab/hamiltonians.hpp"
#include "hjlab/variational.hpp"

namespace hjlab {

namespace cli {

/// Bad flags, files or parameters; maps to exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

struct HamiltonianFlags {
    std::string family = "quadratic";
    double drift = 0.0;
    double c = 0.0;
    double alpha = 1.0;
    double eps = 0.1;
    std::string f_path;
    std::string table_path;
    std::optional<double> shift;

    void attach(CLI::App* app) {
        app->add_option("--family", family, "quadratic | eikonal-shift | abs-shift | quad-potential | tabulated")
            ->check(CLI::IsMember({"quadratic", "eikonal-shift", "abs-shift", "quad-potential", "tabulated"}));
        app->add_option("--drift", drift, "quadratic: H = -drift p + p^2/2");
        app->add_option("--c", c, "eikonal-shift: H = |p - c|");
        app->add_option("--alpha", alpha, "abs-shift: H = |p + alpha| - |alpha|");
        app->add_option("--eps", eps, "quad-potential: H = p^2 - eps f(x)");
        app->add_option("--f", f_path, "quad-potential: potential f as CSV x,value");
        app->add_option("--table", table_path, "tabulated: H(p) as CSV x,value on a uniform p grid");
        app->add_option("--shift", shift, "subtract a constant: H - shift");
    }
};

struct Csv {
    std::vector<double> x;
    std::vector<double> value;
};

inline Csv read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw UsageError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,value") throw UsageError(path + ": expected header x,value");
    Csv c;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        try {
            if (comma == std::string::npos) throw std::invalid_argument("missing comma");
            std::size_t used = 0;
            double x = std::stod(line.substr(0, comma), &used);
            double v = std::stod(line.substr(comma + 1), &used);
            c.x.push_back(x);
            c.value.push_back(v);
        } catch (const std::exception&) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": malformed row");
        }
    }
    if (c.x.size() < 2) throw UsageError(path + ": need at least two rows");
    return c;
}

inline SampledFn load_fn(const std::string& path, Extension ext) {
    Csv c = read_csv(path);
    try {
        return SampledFn(std::move(c.x), std::move(c.value), ext);
    } catch (const Error& e) {
        throw UsageError(path + ": " + e.what());
    }
}

inline Hamiltonian build_hamiltonian(const HamiltonianFlags& f) {
    try {
        std::optional<Hamiltonian> h;
        if (f.family == "quadratic") {
            h = Hamiltonian::quadratic(f.drift);
        } else if (f.family == "eikonal-shift") {
            h = Hamiltonian::eikonal_shift(f.c);
        } else if (f.family == "abs-shift") {
            h = Hamiltonian::abs_shift(f.alpha);
        } else if (f.family == "quad-potential") {
            SampledFn pot = f.f_path.empty()
                                ? SampledFn::sample(Grid1D(-1.0, 1.0, 201),
                                                    [](double x) { return -detail::compact_bump(x, -1.0, 1.0); },
                                                    Extension::constant)
                                : load_fn(f.f_path, Extension::constant);
            h = Hamiltonian::quad_potential(f.eps, std::move(pot));
        } else {
            if (f.table_path.empty()) throw UsageError("tabulated family needs --table");
            Csv c = read_csv(f.table_path);
            Grid1D pg(c.x.front(), c.x.back(), c.x.size());
            for (std::size_t i = 0; i < c.x.size(); ++i)
                if (std::abs(c.x[i] - pg.node(i)) > 1e-9 * std::max(1.0, std::abs(c.x[i])))
                    throw UsageError(f.table_path + ": momentum grid must be uniform");
            h = Hamiltonian::tabulated({std::nullopt, pg, std::move(c.value)});
        }
        if (f.shift) h = Hamiltonian::shifted(*h, *f.shift);
        return *h;
    } catch (const UsageError&) {
        throw;
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

inline SampledFn initial_data(const std::string& path) {
    if (path.empty()) return SampledFn(Grid1D(-1.0, 1.0, 3), {1.0, 0.0, 1.0});  // |x|
    return load_fn(path, Extension::linear);
}

inline OutputFormat parse_format(const std::string& s) {
    if (s == "json") return OutputFormat::json;
    if (s == "csv") return OutputFormat::csv;
    return OutputFormat::both;
}

/// JSON to <out>/<stem>.json when --out is set, else to `os`.
inline void emit_json(const json& j, const std::string& out_dir, const std::string& stem, std::ostream& os) {
    std::string text = j.dump(2) + "\n";
    if (out_dir.empty()) {
        os << text;
        return;
    }
    std::filesystem::create_directories(out_dir);
    write_atomic(std::filesystem::path(out_dir) / (stem + ".json"), text);
}

inline void emit_csv(const Series& s, const std::string& header, const std::string& out_dir, const std::string& stem) {
    std::filesystem::create_directories(out_dir);
    write_atomic(std::filesystem::path(out_dir) / (stem + ".csv"), series_csv(s, header));
}

inline json load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot open " + path);
    try {
        json j = json::parse(is);
        // a full report is accepted: its config echo is the override set
        if (j.is_object() && j.contains("config") && j.contains("verdicts")) return j.at("config");
        return j;
    } catch (const json::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
}

inline json status_json(SolveStatus s) { return s == SolveStatus::solved ? "solved" : "failed"; }

}  // namespace cli

/// Entry point; `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    using namespace cli;
    CLI::App app{"Hamilton-Jacobi long-time behaviour toolkit", "hjlab"};
    app.require_subcommand(1);

    std::string out_dir, format = "both";
    auto add_output = [&](CLI::App* sub) {
        sub->add_option("--out", out_dir, "output directory (created if absent)");
        sub->add_option("--format", format, "json | csv | both")->check(CLI::IsMember({"json", "csv", "both"}));
    };

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a named experiment (or 'all')");
    std::string exp_name, config_path;
    std::vector<std::string> sets;
    exp->add_option("name", exp_name, "experiment name")->required();
    exp->add_option("--config", config_path, "JSON file with config overrides");
    exp->add_option("--set", sets, "override key=value (value parsed as JSON)");
    add_output(exp);

    // ergodic
    auto* erg = app.add_subcommand("ergodic", "bracket lambda_min for H(x, Du) = lambda");
    HamiltonianFlags erg_h;
    erg_h.attach(erg);
    std::vector<double> lambda_range, radii{2.0, 4.0, 8.0};
    double erg_tol = 0.05, dx_fraction = 0.01;
    erg->add_option("--lambda-range", lambda_range, "lambda_lo lambda_hi")->expected(2);
    erg->add_option("--radii", radii, "increasing ball radii");
    erg->add_option("--tol", erg_tol, "bracket width");
    erg->add_option("--dx-fraction", dx_fraction, "grid spacing as a fraction of the smallest radius");
    add_output(erg);

    // evolve
    auto* evo = app.add_subcommand("evolve", "explicit monotone evolution, snapshots to CSV");
    HamiltonianFlags evo_h;
    evo_h.attach(evo);
    std::string u0_path, scheme = "lax-friedrichs";
    double x_min = -5.0, x_max = 5.0, t_end = 1.0, cfl = 0.9, margin = 1.0;
    std::size_t nodes = 501;
    std::optional<double> theta;
    std::vector<double> snaps, m_window;
    evo->add_option("--u0", u0_path, "initial data CSV x,value (default |x|)");
    evo->add_option("--x-min", x_min);
    evo->add_option("--x-max", x_max);
    evo->add_option("--n", nodes, "grid nodes");
    evo->add_option("--t-end", t_end);
    evo->add_option("--cfl", cfl);
    evo->add_option("--theta", theta, "numerical viscosity");
    evo->add_option("--gradient-margin", margin);
    evo->add_option("--scheme", scheme)->check(CLI::IsMember({"lax-friedrichs", "godunov"}));
    evo->add_option("--snapshots", snaps, "snapshot times");
    evo->add_option("--m-window", m_window, "lo hi")->expected(2);
    add_output(evo);

    // hopflax
    auto* hl = app.add_subcommand("hopflax", "pointwise Hopf-Lax values");
    HamiltonianFlags hl_h;
    hl_h.attach(hl);
    std::string hl_u0;
    std::vector<double> hl_x;
    double hl_t = 1.0;
    hl->add_option("--u0", hl_u0, "initial data CSV x,value (default |x|)");
    hl->add_option("--x", hl_x, "query points")->required();
    hl->add_option("--t", hl_t, "time");
    add_output(hl);

    // h4check
    auto* h4 = app.add_subcommand("h4check", "sampled (H4) margin estimate");
    HamiltonianFlags h4_h;
    h4_h.attach(h4);
    double eta = 0.25, k_box = 5.0;
    std::size_t samples = 4000;
    h4->add_option("--eta", eta);
    h4->add_option("--k-box", k_box);
    h4->add_option("--samples", samples);
    add_output(h4);

    // trajectory
    auto* tr = app.add_subcommand("trajectory", "minimizing straight line ending at (x, t)");
    HamiltonianFlags tr_h;
    tr_h.attach(tr);
    std::string tr_u0;
    double tr_x = 0.0, tr_t = 1.0;
    std::size_t tr_samples = 101;
    tr->add_option("--u0", tr_u0, "initial data CSV x,value (default |x|)");
    tr->add_option("--x", tr_x);
    tr->add_option("--t", tr_t);
    tr->add_option("--samples", tr_samples);
    add_output(tr);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    const OutputFormat fmt = parse_format(format);
    try {
        if (exp->parsed()) {
            json overrides = config_path.empty() ? json::object() : load_config_file(config_path);
            for (const auto& s : sets) {
                auto eq = s.find('=');
                if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value");
                std::string key = s.substr(0, eq), raw = s.substr(eq + 1);
                json v = json::parse(raw, nullptr, false);
                overrides[key] = v.is_discarded() ? json(raw) : v;
            }
            std::vector<std::string> names;
            if (exp_name == "all") {
                if (!overrides.empty()) throw UsageError("overrides need a single experiment");
                names = experiment_names();
            } else {
                if (std::find(experiment_names().begin(), experiment_names().end(), exp_name) ==
                    experiment_names().end())
                    throw UsageError("unknown experiment '" + exp_name + "'");
                names = {exp_name};
            }
            bool all_passed = true;
            for (const auto& name : names) {
                ExperimentReport rep;
                try {
                    rep = run_experiment(name, overrides);
                } catch (const Error& e) {
                    throw UsageError(e.what());
                }
                out << name << ": " << (rep.passed() ? "PASS" : "FAIL") << "\n";
                if (rep.error) out << "  error: " << *rep.error << "\n";
                for (const auto& v : rep.verdicts)
                    out << "  " << (v.passed ? "ok   " : "FAIL ") << v.id << "  " << format_number(v.measured) << " "
                        << v.relation << " " << format_number(v.threshold) << "\n";
                if (!out_dir.empty()) write_report(rep, out_dir, fmt);
                all_passed = all_passed && rep.passed();
            }
            return all_passed ? 0 : 1;
        }

        if (erg->parsed()) {
            Hamiltonian h = build_hamiltonian(erg_h);
            if (radii.empty()) throw UsageError("--radii must not be empty");
            std::pair<double, double> range;
            if (lambda_range.size() == 2) {
                range = {lambda_range[0], lambda_range[1]};
            } else {
                // above sup_x H(x, 0) every ball problem is solvable
                Grid1D g = Grid1D::symmetric(radii.back(), dx_fraction * radii.front());
                double top = -INFINITY, bottom = INFINITY;
                for (double x : g.nodes()) {
                    top = std::max(top, h(x, 0.0));
                    bottom = std::min(bottom, minimize_in_p(h, x).value);
                }
                range = {bottom - 1.0, top + 1.0};
            }
            ErgodicOptions opts;
            opts.dx_fraction = dx_fraction;
            auto rep = estimate_lambda_min(h, range, radii, erg_tol, opts);
            json j;
            j["hamiltonian"] = h.describe();
            j["lambda_range"] = {range.first, range.second};
            j["radii"] = rep.radii;
            j["lower_bound"] = rep.lower_bound;
            j["lambda_min_bracket"] = {rep.bracket.first, rep.bracket.second};
            j["lambda_grid"] = rep.lambda_grid;
            json st = json::array();
            for (auto s : rep.statuses) st.push_back(status_json(s));
            j["statuses"] = st;
            json defect = json::array();
            for (double d : rep.stabilization_defect) defect.push_back(std::isfinite(d) ? json(d) : json(nullptr));
            j["stabilization_defect"] = defect;
            if (fmt != OutputFormat::csv || out_dir.empty()) emit_json(j, out_dir, "ergodic", out);
            if (fmt != OutputFormat::json && !out_dir.empty()) {
                for (std::size_t k = 0; k < rep.profiles.size(); ++k) {
                    if (rep.profiles[k].empty()) continue;
                    const SampledFn& v = rep.profiles[k].back();
                    Series s;
                    for (std::size_t i = 0; i < v.size(); ++i) s.emplace_back(v.nodes()[i], v.values()[i]);
                    emit_csv(s, "x,value", out_dir, "ergodic_profile_" + std::to_string(k));
                }
            }
            return 0;
        }

        if (evo->parsed()) {
            Hamiltonian h = build_hamiltonian(evo_h);
            SampledFn u0 = initial_data(u0_path);
            if (!(cfl > 0.0) || cfl > 1.0) throw UsageError("--cfl must lie in (0, 1]");
            std::optional<EvolveConfig> cfg;
            try {
                cfg.emplace(Grid1D(x_min, x_max, nodes));
            } catch (const Error& e) {
                throw UsageError(e.what());
            }
            cfg->t_end = t_end;
            cfg->cfl = cfl;
            cfg->theta = theta;
            cfg->gradient_margin = margin;
            cfg->scheme = scheme == "godunov" ? Scheme::godunov : Scheme::lax_friedrichs;
            cfg->snapshot_times = snaps;
            if (m_window.size() == 2) cfg->m_window = Window(m_window[0], m_window[1]);
            auto res = evolve_lf(h, u0, *cfg);
            json j;
            j["hamiltonian"] = h.describe();
            j["dt"] = res.dt;
            j["theta"] = res.theta;
            j["steps"] = res.steps;
            json times = json::array();
            for (const auto& s : res.snapshots) times.push_back(s.time);
            j["snapshot_times"] = times;
            j["m_final"] = res.m_series.empty() ? json(nullptr) : json(res.m_series.back().second);
            if (fmt != OutputFormat::csv || out_dir.empty()) emit_json(j, out_dir, "evolve", out);
            if (fmt != OutputFormat::json && !out_dir.empty()) {
                for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
                    const auto& u = res.snapshots[k].u;
                    Series s;
                    for (std::size_t i = 0; i < u.size(); ++i) s.emplace_back(u.nodes()[i], u.values()[i]);
                    emit_csv(s, "x,value", out_dir, "evolve_snapshot_" + std::to_string(k));
                }
                emit_csv(res.m_series, "t,value", out_dir, "evolve_m");
            }
            return 0;
        }

        if (hl->parsed()) {
            Hamiltonian h = build_hamiltonian(hl_h);
            SampledFn u0 = initial_data(hl_u0);
            json pts = json::array();
            Series s;
            for (double x : hl_x) {
                auto p = hopf_lax(h, u0, x, hl_t);
                pts.push_back({{"x", x}, {"value", p.value}, {"argmin", p.argmin}, {"unique", p.unique}});
                s.emplace_back(x, p.value);
            }
            json j{{"hamiltonian", h.describe()}, {"t", hl_t}, {"points", pts}};
            if (fmt != OutputFormat::csv || out_dir.empty()) emit_json(j, out_dir, "hopflax", out);
            if (fmt != OutputFormat::json && !out_dir.empty()) emit_csv(s, "x,value", out_dir, "hopflax");
            return 0;
        }

        if (h4->parsed()) {
            Hamiltonian h = build_hamiltonian(h4_h);
            auto rep = check_h4(h, eta, k_box, samples);
            json j;
            j["hamiltonian"] = h.describe();
            j["status"] = rep.status == H4Status::holds_with_margin ? "holds_with_margin" : "violated";
            j["psi_estimate"] = rep.psi_estimate;
            j["worst_margin"] = rep.worst_margin;
            j["admissible"] = rep.admissible;
            if (rep.witness) {
                const auto& w = *rep.witness;
                j["witness"] = {{"index", w.index}, {"x", w.x}, {"p", w.p}, {"q", w.q}, {"mu", w.mu}, {"margin", w.margin}};
            } else {
                j["witness"] = nullptr;
            }
            emit_json(j, out_dir, "h4check", out);
            return 0;
        }

        if (tr->parsed()) {
            Hamiltonian h = build_hamiltonian(tr_h);
            SampledFn u0 = initial_data(tr_u0);
            auto r = backtrack_minimizer(h, u0, tr_x, tr_t, tr_samples);
            Series path;
            for (std::size_t k = 0; k < r.times.size(); ++k) path.emplace_back(r.times[k], r.positions[k]);
            json j{{"hamiltonian", h.describe()}, {"x", tr_x},        {"t", tr_t},
                   {"start_point", r.start_point}, {"action", r.action}, {"unique", r.unique}};
            if (fmt != OutputFormat::csv || out_dir.empty()) emit_json(j, out_dir, "trajectory", out);
            if (fmt != OutputFormat::json && !out_dir.empty()) emit_csv(path, "t,value", out_dir, "trajectory");
            return 0;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace hjlab

#pragma once

// Named, scripted runs with pass/fail verdicts, plus JSON and CSV output.
//
// Every run takes a flat JSON config; overrides are merged over the
// defaults and type-checked, and the merged config is echoed in the report.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hjlab/core.hpp"
#include "hjlab/ergodic.hpp"
#include "hjlab/fd_solver.hpp"
#include "hjlab/hamiltonians.hpp"
#include "hjlab/variational.hpp"

namespace hjlab {

using json = nlohmann::json;
using Series = std::vector<std::pair<double, double>>;

struct Verdict {
    std::string id;
    double measured = 0.0;
    std::string relation;  // "<=", "<", ">=", ">"
    double threshold = 0.0;
    bool passed = false;
};

inline bool compare(double measured, const std::string& relation, double threshold) {
    if (relation == "<=") return measured <= threshold;
    if (relation == "<") return measured < threshold;
    if (relation == ">=") return measured >= threshold;
    if (relation == ">") return measured > threshold;
    throw Error("unknown verdict relation '" + relation + "'");
}

struct ExperimentReport {
    std::string name;
    json config = json::object();
    std::map<std::string, Series> series;
    std::vector<Verdict> verdicts;
    std::optional<std::string> error;

    void check(std::string id, double measured, std::string relation, double threshold) {
        bool ok = std::isfinite(measured) && compare(measured, relation, threshold);
        verdicts.push_back({std::move(id), measured, std::move(relation), threshold, ok});
    }

    bool passed() const {
        if (error || verdicts.empty()) return false;
        return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
    }
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{
        "E1_counterexample",  "E2_instability",      "E3_namah_roquejoffre",
        "E4_phi_convergence", "E5_geodesic_escape", "E6_h4_decay",
    };
    return names;
}

// ---------------------------------------------------------------------------
// Config handling

/// Defaults overlaid with `overrides`. Unknown keys and values whose JSON
/// kind differs from the default's are errors.
inline json merge_config(const json& defaults, const json& overrides) {
    if (!overrides.is_object()) throw Error("config overrides must be a JSON object");
    json out = defaults;
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        const std::string& key = it.key();
        if (!defaults.contains(key)) throw Error("unknown config key '" + key + "'");
        const json& d = defaults[key];
        const json& v = it.value();
        bool ok = false;
        if (d.is_number_integer())  // integer settings are counts
            ok = v.is_number_integer() && v.get<long long>() >= 0;
        else if (d.is_number())
            ok = v.is_number();
        else if (d.is_boolean())
            ok = v.is_boolean();
        else if (d.is_string())
            ok = v.is_string();
        else if (d.is_array())
            ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
        if (!ok) throw Error("config key '" + key + "' has the wrong type");
        out[key] = v;
    }
    return out;
}

namespace detail {

inline std::vector<double> numbers(const json& cfg, const char* key) { return cfg.at(key).get<std::vector<double>>(); }

inline Window window_from(const json& cfg, const char* key) {
    auto v = numbers(cfg, key);
    if (v.size() != 2) throw Error(std::string(key) + " must have two entries");
    return Window(v[0], v[1]);
}

/// Smooth bump (1 - s^2)^3 on (lo, hi), s mapping the interval to (-1, 1);
/// peak 1 at the midpoint, zero outside.
inline double compact_bump(double x, double lo, double hi) {
    const double s = (2.0 * x - lo - hi) / (hi - lo);
    if (std::abs(s) >= 1.0) return 0.0;
    const double w = 1.0 - s * s;
    return w * w * w;
}

/// slope * x + height * bump sampled finely around the support.
inline SampledFn affine_plus_bump(double slope, double height, Window support, double dx) {
    if (!(support.width() > 0.0)) throw Error("bump support must have positive width");
    Grid1D g = Grid1D::with_max_spacing(support.lo - 1.0, support.hi + 1.0, dx);
    return SampledFn::sample(g, [&](double x) { return slope * x + height * compact_bump(x, support.lo, support.hi); });
}

/// At most `keep` evenly strided points, always including the last one.
inline Series thin(const Series& s, std::size_t keep) {
    if (s.size() <= keep || keep < 2) return s;
    const std::size_t stride = (s.size() + keep - 1) / keep;
    Series out;
    for (std::size_t i = 0; i < s.size(); i += stride) out.push_back(s[i]);
    if (out.back() != s.back()) out.push_back(s.back());
    return out;
}

inline std::vector<double> window_nodes(Window w, double dx) {
    Grid1D g = Grid1D::with_max_spacing(w.lo, w.hi, dx);
    return g.nodes();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiments

namespace experiments {

inline json defaults(const std::string& name) {
    if (name == "E1_counterexample")
        return {{"sequence", {1.0, 10.0, 1e3, 1e6, 1e10, 1e15}},
                {"drift", 1.0},
                {"tol", 1e-2},
                {"finite_k_tol", 1e-3},
                {"identity_tol", 1e-9},
                {"gap_min", 1.4}};
    if (name == "E2_instability")
        return {{"eps", 0.5},
                {"bump_support", {-1.0, 1.0}},
                {"times", {1.0, 10.0, 100.0, 1000.0, 10000.0}},
                {"far_t", 1.0},
                {"far_x", {2.0, 5.0, 10.0, 20.0}},
                {"dx", 0.01},
                {"tol", 1e-2}};
    if (name == "E3_namah_roquejoffre")
        return {{"eps", 0.1},
                {"f_support", {-1.0, 1.0}},
                {"domain", 60.0},
                {"dx", 0.02},
                {"t_end", 25.0},
                {"snapshot_every", 1.0},
                {"window", {-3.0, 3.0}},
                {"scheme", "godunov"},
                {"stab_tol", 1e-3}};
    if (name == "E4_phi_convergence" || name == "E5_geodesic_escape") {
        json j = {{"bump_height", 1.0},
                  {"bump_support", {-1.0, 1.0}},
                  {"times", {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}},
                  {"dx", 0.01},
                  {"tol", 1e-2}};
        if (name == "E4_phi_convergence") {
            j["rerun_bump_height"] = -0.5;
            j["rerun_bump_support"] = {-2.0, 0.5};
            j["window"] = {-5.0, 5.0};
            j["eval_dx"] = 0.05;
            j["late_from"] = 8.0;
        } else {
            j["x"] = 0.0;
            j["thresholds"] = {5.0, 10.0, 20.0};
        }
        return j;
    }
    if (name == "E6_h4_decay")
        return {{"eta", 0.25},
                {"k_box", 5.0},
                {"samples", 4000},
                {"shift", 0.5},
                {"alpha", 1.0},
                {"domain", 30.0},
                {"dx", 0.05},
                {"t_end", 40.0},
                {"m_window", {-10.0, 10.0}},
                {"m_thresholds", {0.2, 0.1, 0.05}},
                {"bump_height", 1.0},
                {"sawtooth_period", 8.0},
                {"sawtooth_slope", 0.5},
                {"sawtooth_t_end", 10.0}};
    throw Error("unknown experiment '" + name + "'");
}

/// Staircase data with H = -e p + p^2/2: u(0, t)/t at t_k = a_{2k+2}/4
/// (plateau, minimizer y = e t) and t'_k = a_{2k+1}/4 (slope, y = (e+1) t).
inline void run_e1(const json& cfg, ExperimentReport& rep) {
    StaircaseSpec spec{detail::numbers(cfg, "sequence")};
    spec.validate();
    const auto& a = spec.a;
    const double tol = cfg.at("tol"), ktol = cfg.at("finite_k_tol"), itol = cfg.at("identity_tol");
    const Hamiltonian h = Hamiltonian::quadratic(cfg.at("drift").get<double>());
    const SampledFn u0 = build_staircase_u0(a, Grid1D(0.0, a.back(), 2));
    const auto corners = spec.corner_values();

    Series plateau, plateau_exact, plateau_y, slope, slope_exact, slope_y;
    for (std::size_t k = 0; 2 * k + 2 < a.size(); ++k) {
        const double t = a[2 * k + 2] / 4.0;
        const auto hl = hopf_lax(h, u0, 0.0, t);
        const double r = hl.value / t;
        const double exact = corners[2 * k + 1] / t;
        plateau.emplace_back(t, r);
        plateau_exact.emplace_back(t, exact);
        plateau_y.emplace_back(t, hl.argmin / t);
        const std::string id = "plateau_k" + std::to_string(k);
        rep.check(id + "_bound", std::abs(r), "<=", 4.0 * a[2 * k + 1] / a[2 * k + 2] + tol);
        rep.check(id + "_finite_k", std::abs(r - exact), "<=", ktol);
        rep.check(id + "_ybar_equals_t", std::abs(hl.argmin / t - 1.0), "<=", itol);
    }
    for (std::size_t k = 1; 2 * k + 1 < a.size(); ++k) {
        const double t = a[2 * k + 1] / 4.0;
        const auto hl = hopf_lax(h, u0, 0.0, t);
        const double r = hl.value / t;
        const double correction = (corners[2 * k] + a[2 * k]) / t;
        const double exact = -1.5 + correction;
        slope.emplace_back(t, r);
        slope_exact.emplace_back(t, exact);
        slope_y.emplace_back(t, hl.argmin / t);
        const std::string id = "slope_k" + std::to_string(k);
        rep.check(id + "_bound", std::abs(r + 1.5), "<=", std::abs(correction) + tol);
        rep.check(id + "_finite_k", std::abs(r - exact), "<=", ktol);
        rep.check(id + "_ybar_equals_2t", std::abs(hl.argmin / t - 2.0), "<=", itol);
    }
    if (plateau.empty() || slope.empty()) throw Error("sequence too short for both subsequences");
    rep.check("subsequence_gap", std::abs(plateau.back().second - slope.back().second), ">=",
              cfg.at("gap_min").get<double>());
    rep.series["plateau_ratio"] = plateau;
    rep.series["plateau_ratio_finite_k"] = plateau_exact;
    rep.series["plateau_ybar_over_t"] = plateau_y;
    rep.series["slope_ratio"] = slope;
    rep.series["slope_ratio_finite_k"] = slope_exact;
    rep.series["slope_ybar_over_t"] = slope_y;
}

/// A small negative bump eps * (-bump) under H = p^2/2 and H = -p + p^2/2.
inline void run_e2(const json& cfg, ExperimentReport& rep) {
    const double eps = cfg.at("eps"), tol = cfg.at("tol");
    if (!(eps > 0.0)) throw Error("eps must be positive");
    const SampledFn u0 = detail::affine_plus_bump(0.0, -eps, detail::window_from(cfg, "bump_support"),
                                                  cfg.at("dx"));
    const auto times = detail::numbers(cfg, "times");
    if (times.empty()) throw Error("times must not be empty");
    const Hamiltonian still = Hamiltonian::quadratic(0.0), moving = Hamiltonian::quadratic(1.0);

    Series a_origin, b_trace, b_origin, far;
    double b_trace_err = 0.0;
    for (double t : times) {
        a_origin.emplace_back(t, hopf_lax_evaluate(still, u0, 0.0, t));
        double v = hopf_lax_evaluate(moving, u0, -t, t);
        b_trace.emplace_back(t, v);
        b_trace_err = std::max(b_trace_err, std::abs(v + eps));
        b_origin.emplace_back(t, hopf_lax_evaluate(moving, u0, 0.0, t));
    }
    const double far_t = cfg.at("far_t");
    for (double x : detail::numbers(cfg, "far_x")) far.emplace_back(x, hopf_lax_evaluate(still, u0, x, far_t));
    if (far.empty()) throw Error("far_x must not be empty");

    rep.check("a_origin_tends_to_minus_eps", std::abs(a_origin.back().second + eps), "<=", tol);
    rep.check("a_far_field_zero", std::abs(far.back().second), "<=", tol);
    rep.check("b_trace_equals_minus_eps", b_trace_err, "<=", tol);
    rep.check("b_origin_tends_to_zero", std::abs(b_origin.back().second), "<=", tol);
    rep.series["a_u_origin"] = a_origin;
    rep.series["a_u_far_profile"] = far;
    rep.series["b_u_trace"] = b_trace;
    rep.series["b_u_origin"] = b_origin;
}

/// u_t + |Du|^2 = eps f with min f = f(0) = -1. The ergodic constant is eps
/// and u + eps t converges to u_inf with |Du_inf|^2 = eps (f + 1).
inline void run_e3(const json& cfg, ExperimentReport& rep) {
    const double eps = cfg.at("eps"), dx = cfg.at("dx"), t_end = cfg.at("t_end"), every = cfg.at("snapshot_every");
    if (!(eps > 0.0)) throw Error("eps must be positive");
    if (!(every > 0.0) || !(every < t_end)) throw Error("snapshot_every must lie in (0, t_end)");
    const Window support = detail::window_from(cfg, "f_support");
    const SampledFn f = SampledFn::sample(Grid1D::with_max_spacing(support.lo, support.hi, std::min(dx, 0.01)),
                                          [&](double x) { return -detail::compact_bump(x, support.lo, support.hi); },
                                          Extension::constant);
    const double xk = 0.5 * (support.lo + support.hi);
    const Hamiltonian h = Hamiltonian::quad_potential(eps, f);

    const double half = cfg.at("domain");
    const Grid1D grid = Grid1D::symmetric(half, dx);
    EvolveConfig ec{grid};
    ec.t_end = t_end;
    const std::string scheme = cfg.at("scheme");
    if (scheme == "godunov")
        ec.scheme = Scheme::godunov;
    else if (scheme != "lax_friedrichs")
        throw Error("scheme must be godunov or lax_friedrichs");
    for (double t = 0.0; t < t_end + 1e-9 * t_end; t += every) ec.snapshot_times.push_back(std::min(t, t_end));
    const SampledFn u0 = SampledFn::sample(grid, [](double) { return 0.0; });
    const EvolveResult res = evolve_lf(h, u0, ec);

    const Window w = detail::window_from(cfg, "window");
    const Window inner = interior_window(grid, res.theta, res.final().time);
    if (w.lo < inner.lo || w.hi > inner.hi) throw Error("window not inside the interior window at t_end");
    const std::vector<double> xs = grid.nodes();
    const auto [lo, hi] = node_range(xs, w);
    if (lo >= hi) throw Error("window empty");

    Series origin, stab;
    double max_increase = -INFINITY;
    for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
        const auto& s = res.snapshots[k];
        origin.emplace_back(s.time, s.u(xk) + eps * s.time);
        if (k == 0) continue;
        const auto& p = res.snapshots[k - 1];
        auto cur = s.u.values(), prev = p.u.values();
        double d = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            d = std::max(d, std::abs((cur[i] + eps * s.time) - (prev[i] + eps * p.time)));
        stab.emplace_back(s.time, d);
        max_increase = std::max(max_increase, s.u(xk) - p.u(xk));
    }
    if (stab.empty()) throw Error("need at least two snapshots");

    const auto& last = res.final();
    auto v = last.u.values();
    Series limit, residual;
    double res_max = 0.0;
    for (std::size_t i = std::max<std::size_t>(lo, 1); i < hi && i + 1 < xs.size(); ++i) {
        const double p = (v[i + 1] - v[i - 1]) / (2.0 * dx);
        const double r = std::abs(p * p - eps * f(xs[i]) - eps);
        res_max = std::max(res_max, r);
        limit.emplace_back(xs[i], v[i] + eps * last.time);
        residual.emplace_back(xs[i], r);
    }

    rep.check("stabilized", stab.back().second, "<", cfg.at("stab_tol").get<double>());
    rep.check("stationary_residual", res_max, "<", 5.0 * std::sqrt(dx));
    rep.check("decreasing_on_K", max_increase, "<=", 0.0);
    rep.series["u_plus_eps_t_at_K"] = origin;
    rep.series["snapshot_difference"] = stab;
    rep.series["limit_profile"] = limit;
    rep.series["stationary_residual"] = residual;
}

inline SampledFn phi_plus_bump(const json& cfg, const char* height, const char* support) {
    return detail::affine_plus_bump(1.0, cfg.at(height).get<double>(), detail::window_from(cfg, support),
                                    cfg.at("dx"));
}

/// phi(x) = x solves p^2/2 = 1/2; data phi + compact bump. Defect
/// sup_w |u(., t) + t/2 - phi| on a time panel, and a rerun with a
/// different bump converging to the same limit.
inline void run_e4(const json& cfg, ExperimentReport& rep) {
    const Hamiltonian h = Hamiltonian::quadratic(0.0);
    const double lambda = 0.5, tol = cfg.at("tol");
    const auto times = detail::numbers(cfg, "times");
    if (times.empty()) throw Error("times must not be empty");
    const std::vector<double> xs = detail::window_nodes(detail::window_from(cfg, "window"), cfg.at("eval_dx"));

    auto run = [&](const SampledFn& u0, Series& defect) {
        std::vector<double> last;
        for (double t : times) {
            double d = 0.0;
            last.clear();
            for (double x : xs) {
                double v = hopf_lax_evaluate(h, u0, x, t) + lambda * t;
                last.push_back(v);
                d = std::max(d, std::abs(v - x));
            }
            defect.emplace_back(t, d);
        }
        return last;
    };
    Series first, second;
    const auto lim1 = run(phi_plus_bump(cfg, "bump_height", "bump_support"), first);
    const auto lim2 = run(phi_plus_bump(cfg, "rerun_bump_height", "rerun_bump_support"), second);

    const double late = cfg.at("late_from");
    double worst_rise = -INFINITY;
    for (std::size_t k = 1; k < first.size(); ++k)
        if (first[k - 1].first >= late) worst_rise = std::max(worst_rise, first[k].second - first[k - 1].second);
    if (!std::isfinite(worst_rise)) worst_rise = 0.0;
    double gap = 0.0;
    Series limit_gap;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        gap = std::max(gap, std::abs(lim1[i] - lim2[i]));
        limit_gap.emplace_back(xs[i], lim1[i] - lim2[i]);
    }

    rep.check("defect_below_tol", first.back().second, "<=", tol);
    rep.check("defect_nonincreasing_late", worst_rise, "<=", 1e-12);
    rep.check("rerun_defect_below_tol", second.back().second, "<=", tol);
    rep.check("same_limit", gap, "<=", 2.0 * tol);
    rep.series["defect"] = first;
    rep.series["rerun_defect"] = second;
    rep.series["limit_difference"] = limit_gap;
}

/// Start points of the minimizing lines ending at (x, t) in the E4 setting.
inline void run_e5(const json& cfg, ExperimentReport& rep) {
    const Hamiltonian h = Hamiltonian::quadratic(0.0);
    const SampledFn u0 = phi_plus_bump(cfg, "bump_height", "bump_support");
    const double x = cfg.at("x");
    const auto times = detail::numbers(cfg, "times");
    if (times.size() < 2) throw Error("times needs at least two entries");

    Series start, unique;
    for (double t : times) {
        auto tr = backtrack_minimizer(h, u0, x, t, 2);
        start.emplace_back(t, std::abs(tr.start_point));
        unique.emplace_back(t, tr.unique ? 1.0 : 0.0);
    }
    double min_step = INFINITY;
    for (std::size_t k = 1; k < start.size(); ++k) min_step = std::min(min_step, start[k].second - start[k - 1].second);

    for (double c : detail::numbers(cfg, "thresholds")) {
        std::string id = "escapes_beyond_" + std::to_string(static_cast<long long>(std::llround(c)));
        rep.check(id, start.back().second, ">", c);
    }
    rep.check("monotone_growth", min_step, ">", 0.0);
    rep.series["start_distance"] = start;
    rep.series["minimizer_unique"] = unique;
}

/// (H4) estimates for p^2/2 - shift and |p + alpha| - |alpha|, and m(t) for
/// a strongly convex run (plus the sawtooth diagnostic, no verdict).
inline void run_e6(const json& cfg, ExperimentReport& rep) {
    const double eta = cfg.at("eta"), kbox = cfg.at("k_box");
    const auto samples = cfg.at("samples").get<std::size_t>();
    if (samples == 0) throw Error("samples must be positive");
    const Hamiltonian convex = Hamiltonian::shifted(Hamiltonian::quadratic(0.0), cfg.at("shift").get<double>());
    const Hamiltonian kinked = Hamiltonian::abs_shift(cfg.at("alpha").get<double>());

    const H4Report good = check_h4(convex, eta, kbox, samples);
    const H4Report bad = check_h4(kinked, eta, kbox, samples);
    rep.check("h4_holds_strongly_convex", good.psi_estimate, ">", 0.0);
    rep.check("h4_violated_abs_shift", bad.worst_margin, "<=", h4_zero_margin);
    double replay = INFINITY;
    if (bad.witness) {
        const auto& w = *bad.witness;
        replay = std::abs(h4_margin(kinked, w.x, w.p, w.q, w.mu) - w.margin);
        rep.series["abs_shift_witness"] = {{0.0, w.x}, {1.0, w.p}, {2.0, w.q}, {3.0, w.mu}, {4.0, w.margin}};
    }
    rep.check("witness_reproducible", replay, "<=", 1e-12);
    rep.series["h4_psi"] = {{0.0, good.psi_estimate}, {1.0, bad.psi_estimate}};
    rep.series["h4_worst_margin"] = {{0.0, good.worst_margin}, {1.0, bad.worst_margin}};

    const double dx = cfg.at("dx");
    const Grid1D grid = Grid1D::symmetric(cfg.at("domain").get<double>(), dx);
    const double height = cfg.at("bump_height");
    EvolveConfig ec{grid};
    ec.t_end = cfg.at("t_end");
    ec.m_window = detail::window_from(cfg, "m_window");
    const auto decay = evolve_lf(Hamiltonian::quadratic(0.0),
                                 SampledFn::sample(grid, [&](double x) { return height * detail::compact_bump(x, -1.0, 1.0); }),
                                 ec);
    if (decay.m_series.empty()) throw Error("decay run took no steps");
    const double m_end = decay.m_series.back().second;
    for (double m : detail::numbers(cfg, "m_thresholds")) {
        char buf[32];
        auto [end, ec2] = std::to_chars(buf, buf + sizeof buf, m);
        (void)ec2;
        rep.check("m_below_" + std::string(buf, end), m_end, "<", m);
    }
    rep.series["m_strongly_convex"] = detail::thin(decay.m_series, 400);

    const double period = cfg.at("sawtooth_period"), slope = cfg.at("sawtooth_slope");
    if (!(period > 0.0)) throw Error("sawtooth_period must be positive");
    const Grid1D wide = Grid1D::symmetric(cfg.at("domain").get<double>() + 10.0, dx);
    EvolveConfig sc{wide};
    sc.t_end = cfg.at("sawtooth_t_end");
    sc.m_window = ec.m_window;
    auto saw = [&](double x) {
        double r = std::fmod(std::fmod(x, period) + period, period);
        return slope * (r < 0.5 * period ? r : period - r);
    };
    rep.series["m_abs_shift_sawtooth"] = detail::thin(evolve_lf(kinked, SampledFn::sample(wide, saw), sc).m_series, 400);
}

}  // namespace experiments

/// Runs a named experiment. Unknown names and malformed overrides throw;
/// failures inside the run are reported in `error` with a failed verdict.
inline ExperimentReport run_experiment(const std::string& name, const json& overrides = json::object()) {
    ExperimentReport rep;
    rep.name = name;
    rep.config = merge_config(experiments::defaults(name), overrides);
    try {
        if (name == "E1_counterexample") experiments::run_e1(rep.config, rep);
        else if (name == "E2_instability") experiments::run_e2(rep.config, rep);
        else if (name == "E3_namah_roquejoffre") experiments::run_e3(rep.config, rep);
        else if (name == "E4_phi_convergence") experiments::run_e4(rep.config, rep);
        else if (name == "E5_geodesic_escape") experiments::run_e5(rep.config, rep);
        else experiments::run_e6(rep.config, rep);
    } catch (const Error& e) {
        rep.error = e.what();
        rep.series.clear();
        rep.verdicts.clear();
        rep.verdicts.push_back({"preconditions", NAN, "<=", 0.0, false});
    } catch (const json::exception& e) {
        rep.error = std::string("config: ") + e.what();
        rep.series.clear();
        rep.verdicts.clear();
        rep.verdicts.push_back({"preconditions", NAN, "<=", 0.0, false});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Serialization

inline json to_json(const ExperimentReport& r) {
    json j;
    j["name"] = r.name;
    j["config"] = r.config;
    json series = json::object();
    for (const auto& [k, s] : r.series) {
        json arr = json::array();
        for (const auto& [t, v] : s) arr.push_back({t, v});
        series[k] = std::move(arr);
    }
    j["series"] = std::move(series);
    json verdicts = json::array();
    for (const auto& v : r.verdicts)
        verdicts.push_back({{"id", v.id},
                            {"measured", v.measured},
                            {"relation", v.relation},
                            {"threshold", v.threshold},
                            {"passed", v.passed}});
    j["verdicts"] = std::move(verdicts);
    j["passed"] = r.passed();
    j["error"] = r.error ? json(*r.error) : json(nullptr);
    return j;
}

namespace detail {
// null encodes a non-finite value
inline double number_or_nan(const json& j) { return j.is_null() ? NAN : j.get<double>(); }
}  // namespace detail

inline ExperimentReport report_from_json(const json& j) {
    try {
        ExperimentReport r;
        r.name = j.at("name").get<std::string>();
        r.config = j.at("config");
        for (auto it = j.at("series").begin(); it != j.at("series").end(); ++it) {
            Series s;
            for (const auto& p : it.value()) s.emplace_back(detail::number_or_nan(p.at(0)), detail::number_or_nan(p.at(1)));
            r.series[it.key()] = std::move(s);
        }
        for (const auto& v : j.at("verdicts"))
            r.verdicts.push_back({v.at("id").get<std::string>(), detail::number_or_nan(v.at("measured")),
                                  v.at("relation").get<std::string>(), detail::number_or_nan(v.at("threshold")),
                                  v.at("passed").get<bool>()});
        if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed report: ") + e.what());
    }
}

inline std::string dump_report(const ExperimentReport& r) { return to_json(r).dump(2) + "\n"; }

inline std::string format_number(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error("number formatting failed");
    return std::string(buf, end);
}

inline std::string series_csv(const Series& s, const std::string& header = "t,value") {
    std::string out = header + "\n";
    for (const auto& [t, v] : s) out += format_number(t) + "," + format_number(v) + "\n";
    return out;
}

/// Writes via a temporary file in the same directory and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open " + tmp.string() + " for writing");
        os << content;
        os.flush();
        if (!os) throw Error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("rename failed: " + path.string());
    }
}

enum class OutputFormat { json, csv, both };

/// `<dir>/<name>.json` and/or one `<dir>/<name>_<series>.csv` per series.
/// Returns the written paths.
inline std::vector<std::filesystem::path> write_report(const ExperimentReport& r, const std::filesystem::path& dir,
                                                       OutputFormat format) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    if (format != OutputFormat::csv) {
        written.push_back(dir / (r.name + ".json"));
        write_atomic(written.back(), dump_report(r));
    }
    if (format != OutputFormat::json) {
        for (const auto& [k, s] : r.series) {
            written.push_back(dir / (r.name + "_" + k + ".csv"));
            write_atomic(written.back(), series_csv(s));
        }
    }
    return written;
}

}  // namespace hjlab

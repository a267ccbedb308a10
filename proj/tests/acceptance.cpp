// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hjlab/ergodic.hpp"
#include "hjlab/experiments.hpp"
#include "hjlab/fd_solver.hpp"
#include "hjlab/hamiltonians.hpp"
#include "hjlab/variational.hpp"

using namespace hjlab;

namespace {

struct Outcome {
    bool ok;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

const Verdict& verdict(const ExperimentReport& r, const std::string& id) {
    for (const auto& v : r.verdicts)
        if (v.id == id) return v;
    throw Error("missing verdict " + id);
}

Outcome counterexample() {
    auto t0 = std::chrono::steady_clock::now();
    auto r = run_experiment("E1_counterexample");
    const double secs = seconds_since(t0);
    if (r.error) return {false, *r.error};
    const auto& plateau = r.series.at("plateau_ratio").back();
    const auto& slope = r.series.at("slope_ratio").back();
    // staircase value at 2t: the intervals (a2, a3) and (a4, 2t) descend
    const std::vector<double> a{1, 10, 1e3, 1e6, 1e10, 1e15};
    const double t = slope.first;
    const double analytic = (-(a[3] - a[2]) - (2 * t - a[4]) + t / 2) / t;
    const double e1 = std::abs(plateau.second + 999000.0 / 2.5e9);
    const double e2 = std::abs(slope.second - analytic);
    const double gap = std::abs(plateau.second - slope.second);
    bool ok = e1 <= 1e-3 && e2 <= 1e-3 && gap >= 1.4 && secs < 10.0;
    return {ok, fmt("plateau err %.3g, slope err %.3g, gap %.4f", e1, e2, gap) + fmt(", %.2fs", secs)};
}

Outcome lambda_min_shifted_abs() {
    auto t0 = std::chrono::steady_clock::now();
    auto h = Hamiltonian::eikonal_shift(1.0);
    auto rep = estimate_lambda_min(h, {-1.0, 2.0}, {2.0, 4.0, 8.0}, 0.05);
    const double secs = seconds_since(t0);
    const double periodic = constant_profile_residual(h, 1.0, Grid1D::symmetric(8.0, 0.02));
    auto [lo, hi] = rep.bracket;
    bool ok = lo >= -0.05 && hi <= 0.05 && periodic == 0.0 && hi < 1.0 && secs < 60.0;
    return {ok, fmt("bracket [%.4g, %.4g], periodic residual %.3g", lo, hi, periodic) + fmt(", %.2fs", secs)};
}

Outcome eikonal_ball() {
    const double dx = 0.02, R = 2.0;
    auto sol = solve_dirichlet_ball(BallProblem::make(Hamiltonian::eikonal_shift(0.0), 1.0, R, dx));
    if (!sol.solved()) return {false, sol.reason};
    double err = 0.0;
    for (double x : sol.u->nodes()) err = std::max(err, std::abs((*sol.u)(x) - (R - std::abs(x))));
    return {err <= 2 * dx, fmt("max error %.3g (bound %.3g)", err, 2 * dx)};
}

Outcome phi_convergence() {
    auto r = run_experiment("E4_phi_convergence");
    if (r.error) return {false, *r.error};
    const auto& d = verdict(r, "defect_below_tol");
    const auto& late = verdict(r, "defect_nonincreasing_late");
    const auto& same = verdict(r, "same_limit");
    bool ok = d.passed && d.measured < 1e-2 && late.passed && same.passed && same.measured <= 2e-2 &&
              verdict(r, "rerun_defect_below_tol").passed;
    return {ok, fmt("final defect %.3g, rerun limit difference %.3g", d.measured, same.measured)};
}

Outcome geodesic_escape() {
    auto r = run_experiment("E5_geodesic_escape");
    if (r.error) return {false, *r.error};
    const auto& s = r.series.at("start_distance");
    bool monotone = true;
    for (std::size_t k = 1; k < s.size(); ++k) monotone = monotone && s[k].second > s[k - 1].second;
    const double last = s.back().second;
    return {last > 20.0 && monotone, fmt("last |gamma(0)| %.4g at t=%.4g", last, s.back().first)};
}

double huber(double x, double t) { return std::abs(x) <= t ? x * x / (2 * t) : std::abs(x) - t / 2; }

Outcome huber_convergence() {
    const double t = 2.0;
    auto h = Hamiltonian::quadratic(0.0);
    auto u0 = SampledFn::sample(Grid1D(-20, 20, 41), [](double y) { return std::abs(y); });
    std::vector<double> errs;
    bool bounded = true;
    std::string detail = "errors";
    for (std::size_t n : {201u, 401u, 801u, 1601u}) {
        Grid1D g(-8, 8, n);
        EvolveConfig cfg{g};
        cfg.t_end = t;
        auto res = evolve_lf(h, u0, cfg);
        const auto& s = res.final();
        Window w = interior_window(g, res.theta, s.time);
        double err = 0.0;
        for (double x : s.u.nodes())
            if (w.contains(x)) err = std::max(err, std::abs(s.u(x) - huber(x, s.time)));
        bounded = bounded && err <= 5.0 * std::sqrt(g.dx());
        errs.push_back(err);
        detail += fmt(" %.3g", err);
    }
    bool shrinking = true;
    detail += ", ratios";
    for (std::size_t k = 1; k < errs.size(); ++k) {
        const double ratio = errs[k - 1] / errs[k];
        shrinking = shrinking && ratio >= 1.3;
        detail += fmt(" %.3g", ratio);
    }
    return {bounded && shrinking, detail};
}

Outcome comparison_and_contraction() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto h = Hamiltonian::quadratic(0.0);
    Grid1D g(-5, 5, 201);
    double worst_order = -INFINITY, worst_contraction = -INFINITY;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(g.size()), b(g.size()), c(g.size());
        a[0] = U(rng);
        for (std::size_t i = 1; i < a.size(); ++i) a[i] = a[i - 1] + 0.05 * U(rng);
        const double phase = 3.0 * U(rng), amp = 0.25 * (1.0 + U(rng));
        const double cphase = 3.0 * U(rng), camp = 0.3 * U(rng);
        for (std::size_t i = 0; i < a.size(); ++i) {
            b[i] = a[i] + amp * (1.0 + std::sin(phase + 0.7 * g.node(i)));  // b >= a
            c[i] = a[i] + camp * std::sin(cphase + 0.9 * g.node(i));        // unordered
        }
        EvolveConfig cfg{g};
        cfg.t_end = 1.0;
        cfg.theta = 1.5;
        cfg.snapshot_times = {0.25, 0.5, 0.75};
        auto ra = evolve_lf(h, SampledFn(g, a), cfg);
        auto rb = evolve_lf(h, SampledFn(g, b), cfg);
        auto rc = evolve_lf(h, SampledFn(g, c), cfg);
        double gap0 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) gap0 = std::max(gap0, std::abs(a[i] - c[i]));
        for (std::size_t k = 0; k < ra.snapshots.size(); ++k) {
            Window w = dependence_window(g, ra.snapshots[k].step);
            auto va = ra.snapshots[k].u.values(), vb = rb.snapshots[k].u.values(), vc = rc.snapshots[k].u.values();
            for (std::size_t i = 0; i < va.size(); ++i) {
                if (!w.contains(g.node(i))) continue;
                worst_order = std::max(worst_order, va[i] - vb[i]);
                worst_contraction = std::max(worst_contraction, std::abs(va[i] - vc[i]) - gap0);
            }
        }
    }
    bool ok = worst_order <= 1e-12 && worst_contraction <= 1e-12;
    return {ok, fmt("max(u_a - u_b) %.3g, max excess over initial gap %.3g", worst_order, worst_contraction)};
}

Outcome h4_and_decay() {
    auto good = check_h4(Hamiltonian::shifted(Hamiltonian::quadratic(0.0), 0.5), 0.25, 5.0, 4000);
    auto abs_shift = Hamiltonian::abs_shift(1.0);
    auto bad = check_h4(abs_shift, 0.25, 5.0, 4000);
    auto again = check_h4(abs_shift, 0.25, 5.0, 4000);
    bool reproducible = false;
    if (bad.witness && again.witness) {
        const auto& w = *bad.witness;
        const double m = h4_margin(abs_shift, w.x, w.p, w.q, w.mu);
        reproducible = w.index == again.witness->index && w.p == again.witness->p &&
                       w.q == again.witness->q && w.mu == again.witness->mu && m <= h4_zero_margin;
    }
    auto r = run_experiment("E6_h4_decay");
    if (r.error) return {false, *r.error};
    const double m_end = r.series.at("m_strongly_convex").back().second;
    bool ok = good.status == H4Status::holds_with_margin && good.psi_estimate > 0.0 &&
              bad.status == H4Status::violated && reproducible && m_end < 0.05;
    return {ok, fmt("psi %.4g, witness reproducible %g, m(t_end) %.3g", good.psi_estimate,
                    reproducible ? 1.0 : 0.0, m_end)};
}

Outcome large_time_stabilization() {
    auto r = run_experiment("E3_namah_roquejoffre");
    if (r.error) return {false, *r.error};
    const double dx = r.config.at("dx").get<double>();
    const double stab = verdict(r, "stabilized").measured;
    const double res = verdict(r, "stationary_residual").measured;
    return {stab < 1e-3 && res < 5 * std::sqrt(dx), fmt("snapshot difference %.3g, residual %.3g", stab, res)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1 counterexample ratios", counterexample},
        {"2 lambda_min of |p-1|", lambda_min_shifted_abs},
        {"3 eikonal ball", eikonal_ball},
        {"4 convergence to phi", phi_convergence},
        {"5 geodesic escape", geodesic_escape},
        {"6 Huber convergence", huber_convergence},
        {"7 comparison and contraction", comparison_and_contraction},
        {"8 H4 and decay", h4_and_decay},
        {"9 large-time stabilization", large_time_stabilization},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o{false, ""};
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.ok) ++failed;
        std::printf("%s %s: %s\n", o.ok ? "PASS" : "FAIL", name, o.detail.c_str());
    }
    return failed == 0 ? 0 : 1;
}

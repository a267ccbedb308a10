#pragma once

// Monotone explicit evolution of u_t + H(x, Du) = 0 on a truncated 1-D
// domain (Lax-Friedrichs or Godunov numerical Hamiltonian), with the
// sup-norm time-derivative diagnostic m(t).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "hjlab/core.hpp"
#include "hjlab/hamiltonians.hpp"

namespace hjlab {

enum class BoundaryPolicy { lipschitz_extrapolate, dirichlet_from_exact };

/// lax_friedrichs: central gradient plus theta-viscosity.
/// godunov: upwind min/max of H over [D-u, D+u]; no added viscosity, so
/// smooth extrema are not smeared. Both are monotone under the same step.
enum class Scheme { lax_friedrichs, godunov };

struct EvolveConfig {
    explicit EvolveConfig(Grid1D g) : grid(std::move(g)) {}

    Grid1D grid;
    double t_end = 1.0;
    double cfl = 0.9;
    /// Numerical viscosity; defaults to half the bound on |H_p| over the
    /// working gradient range |p| <= Lip(u0) + gradient_margin.
    std::optional<double> theta;
    BoundaryPolicy boundary = BoundaryPolicy::lipschitz_extrapolate;
    Scheme scheme = Scheme::lax_friedrichs;
    /// Exact solution g(x, t) for dirichlet_from_exact.
    std::function<double(double, double)> exact;
    std::vector<double> snapshot_times;
    double gradient_margin = 1.0;
    /// Window for m(t); defaults to the grid minus its end nodes.
    std::optional<Window> m_window;
};

struct Snapshot {
    double time = 0.0;
    std::size_t step = 0;
    SampledFn u;
    /// Level one step earlier (absent for step 0).
    std::optional<SampledFn> previous;
};

struct EvolveResult {
    std::vector<Snapshot> snapshots;
    /// (t, max |u^{n+1} - u^n| / dt) over the m window, one entry per step.
    std::vector<std::pair<double, double>> m_series;
    double dt = 0.0;
    double theta = 0.0;
    std::size_t steps = 0;

    const Snapshot& at_step(std::size_t step) const {
        for (const auto& s : snapshots)
            if (s.step == step) return s;
        throw Error("no snapshot at requested step");
    }
    const Snapshot& final() const { return snapshots.back(); }
};

/// Working gradient bound and the smallest admissible viscosity for `u0`.
struct MonotonicityRange {
    double gradient_bound;
    double min_theta;
};

inline MonotonicityRange monotonicity_range(const Hamiltonian& h, const Grid1D& grid,
                                            const SampledFn& u0, double margin) {
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = u0(grid.node(i));
    SampledFn on_grid(grid, std::move(vals));
    const double g = on_grid.lipschitz() + margin;
    std::vector<double> xs;
    if (h.x_independent())
        xs.push_back(0.0);
    else
        xs = grid.nodes();
    return {g, 0.5 * slope_bound(h, xs, g)};
}

/// Explicit Lax-Friedrichs scheme
///
///   u_i^{n+1} = u_i^n - dt H(x_i, (u_{i+1} - u_{i-1}) / 2dx)
///               + theta (dt/dx) (u_{i+1} - 2u_i + u_{i-1}),
///
/// monotone when theta >= max|H_p| / 2 and theta dt / dx <= 1/2; the step is
/// dt = cfl dx / (2 theta). Steps have a fixed size, and snapshots are taken
/// at the step nearest each requested time.
///
/// With Scheme::godunov the update is u_i - dt G_i(D-u, D+u); theta then only
/// sets the step, and dt max|H_p| <= cfl dx keeps it monotone.
inline EvolveResult evolve_lf(const Hamiltonian& h, const SampledFn& u0, const EvolveConfig& cfg) {
    const Grid1D& grid = cfg.grid;
    const std::size_t n = grid.size();
    if (n < 3) throw Error("evolution grid needs at least 3 nodes");
    if (!(cfg.t_end >= 0.0)) throw Error("t_end must be nonnegative");
    if (!(cfg.cfl > 0.0) || cfg.cfl > 1.0) throw Error("CFL violation: cfl must lie in (0, 1]");
    if (cfg.boundary == BoundaryPolicy::dirichlet_from_exact && !cfg.exact)
        throw Error("dirichlet boundary requires an exact solution");

    const auto range = monotonicity_range(h, grid, u0, cfg.gradient_margin);
    const double theta = cfg.theta.value_or(std::max(range.min_theta, 1e-3));
    if (theta < range.min_theta * (1.0 - 1e-9))
        throw Error("artificial viscosity violates monotonicity condition");
    const double dx = grid.dx();
    const double dt = cfg.cfl * dx / (2.0 * theta);
    if (theta * dt / dx > 0.5 * (1.0 + 1e-12)) throw Error("CFL violation");
    const double lam = theta * dt / dx;

    const auto total = static_cast<std::size_t>(std::llround(cfg.t_end / dt));
    std::vector<std::size_t> snap_steps;
    for (double t : cfg.snapshot_times) {
        if (t < 0.0 || t > cfg.t_end + 0.5 * dt) throw Error("snapshot time outside [0, t_end]");
        snap_steps.push_back(std::min(total, static_cast<std::size_t>(std::llround(t / dt))));
    }
    snap_steps.push_back(total);
    std::sort(snap_steps.begin(), snap_steps.end());
    snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());

    const Window mwin = cfg.m_window.value_or(Window(grid.node(1), grid.node(n - 2)));
    const std::vector<double> xs = grid.nodes();
    const auto [m_lo, m_hi] = node_range(xs, mwin);
    if (m_lo >= m_hi) throw Error("m window contains no grid nodes");

    std::vector<double> u(n), next(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = u0(xs[i]);

    EvolveResult res;
    res.dt = dt;
    res.theta = theta;
    res.steps = total;
    res.m_series.reserve(total);

    auto apply_boundary = [&](std::vector<double>& v, double t) {
        if (cfg.boundary == BoundaryPolicy::dirichlet_from_exact) {
            v[0] = cfg.exact(xs[0], t);
            v[n - 1] = cfg.exact(xs[n - 1], t);
        } else {
            v[0] = 2.0 * v[1] - v[2];
            v[n - 1] = 2.0 * v[n - 2] - v[n - 3];
        }
    };
    if (cfg.boundary == BoundaryPolicy::dirichlet_from_exact) apply_boundary(u, 0.0);

    std::size_t next_snap = 0;
    auto take_snapshot = [&](std::size_t step, const std::vector<double>* prev) {
        Snapshot s{static_cast<double>(step) * dt, step, SampledFn(grid, u), std::nullopt};
        if (prev) s.previous = SampledFn(grid, *prev);
        res.snapshots.push_back(std::move(s));
    };
    if (snap_steps[next_snap] == 0) {
        take_snapshot(0, nullptr);
        ++next_snap;
    }

    const double inv2dx = 0.5 / dx;
    const double gbound = range.gradient_bound;
    std::vector<detail::GodunovNode> godunov;
    if (cfg.scheme == Scheme::godunov) {
        godunov.reserve(n);
        for (std::size_t i = 0; i < n; ++i) godunov.emplace_back(h, xs[i]);
    }
    for (std::size_t step = 1; step <= total; ++step) {
        if (cfg.scheme == Scheme::godunov) {
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double a = (u[i] - u[i - 1]) / dx, b = (u[i + 1] - u[i]) / dx;
                if (std::abs(a) > gbound || std::abs(b) > gbound)
                    throw Error("monotonicity range exceeded, increase θ");
                next[i] = u[i] - dt * godunov[i](a, b);
            }
        } else {
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double p = (u[i + 1] - u[i - 1]) * inv2dx;
                if (std::abs(p) > gbound) throw Error("monotonicity range exceeded, increase θ");
                next[i] = u[i] - dt * h(xs[i], p) + lam * (u[i + 1] - 2.0 * u[i] + u[i - 1]);
            }
        }
        apply_boundary(next, static_cast<double>(step) * dt);

        double m = 0.0;
        for (std::size_t i = m_lo; i < m_hi; ++i) m = std::max(m, std::abs(next[i] - u[i]));
        res.m_series.emplace_back(static_cast<double>(step) * dt, m / dt);

        std::swap(u, next);
        if (next_snap < snap_steps.size() && snap_steps[next_snap] == step) {
            take_snapshot(step, &next);
            ++next_snap;
        }
    }
    return res;
}

/// m(t) = sup_w |u^n - u^{n-1}| / dt at every snapshot that carries the
/// previous level.
inline std::vector<std::pair<double, double>> time_derivative_sup(const EvolveResult& result,
                                                                 const Window& w) {
    std::vector<std::pair<double, double>> out;
    for (const auto& s : result.snapshots) {
        if (!s.previous) continue;
        auto [lo, hi] = node_range(s.u.nodes(), w);
        if (lo >= hi) throw Error("window empty");
        auto cur = s.u.values();
        auto prev = s.previous->values();
        double m = 0.0;
        for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(cur[i] - prev[i]));
        out.emplace_back(s.time, m / result.dt);
    }
    if (out.empty()) throw Error("result has no consecutive time levels");
    return out;
}

/// Grid window minus the physical domain of dependence 2 theta t on each side.
inline Window interior_window(const Grid1D& grid, double theta, double t) {
    return Window(grid.x_min(), grid.x_max()).shrunk(2.0 * theta * t);
}

/// Grid window minus one cell per time step on each side: nodes in it are
/// untouched by the boundary treatment after `steps` steps.
inline Window dependence_window(const Grid1D& grid, std::size_t steps) {
    return Window(grid.x_min(), grid.x_max()).shrunk(static_cast<double>(steps) * grid.dx());
}

}  // namespace hjlab

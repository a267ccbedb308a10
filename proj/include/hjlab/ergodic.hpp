#pragma once

// Stationary problems H(x, Du) = lambda: the Dirichlet problem on a ball
// (an interval [-R, R] in 1-D) with zero boundary data, its normalized
// profiles v_R = u_R - u_R(0), and a bracket for lambda_min, the least
// lambda with a solution on the whole line.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hjlab/core.hpp"
#include "hjlab/hamiltonians.hpp"
#include "hjlab/numerics.hpp"

namespace hjlab {

struct BallProblem {
    Hamiltonian h;
    double lambda;
    double radius;
    Grid1D grid;

    /// Symmetric grid on [-R, R] with 0 as a node and spacing `dx`.
    static BallProblem make(Hamiltonian h, double lambda, double radius, double dx) {
        if (!(radius > 0.0)) throw Error("ball radius must be positive");
        double cells = std::round(radius / dx);
        if (cells < 1.0 || std::abs(cells * dx - radius) > 1e-9 * radius)
            throw Error("ball radius must be a multiple of dx");
        return BallProblem{std::move(h), lambda, radius, Grid1D::symmetric(radius, dx)};
    }
};

enum class SolveStatus { solved, failed };

struct DirichletOptions {
    double residual_tol = 1e-8;
    /// 0 selects 4 n + 20 sweeps.
    std::size_t max_sweeps = 0;
};

struct DirichletSolution {
    SolveStatus status = SolveStatus::failed;
    std::optional<SampledFn> u;
    double residual = std::numeric_limits<double>::infinity();
    std::size_t sweeps = 0;
    std::string reason;

    bool solved() const { return status == SolveStatus::solved; }
};

/// Maximal discrete subsolution of H(x, Du) = lambda on [-R, R] with zero
/// boundary values, by Gauss-Seidel sweeps in alternating directions.
///
/// Each interior update sets u_i to the largest value with
/// G_i((u_i - u_{i-1})/dx, (u_{i+1} - u_i)/dx) <= lambda, where G_i is the
/// Godunov Hamiltonian; G_i is nondecreasing in u_i, so the update is a
/// bisection. Iterates start from a constant supersolution above every
/// subsolution and decrease monotonically. The boundary values stay at 0;
/// where the equation cannot meet them the solution has a boundary layer
/// and the residual is measured on interior nodes only.
///
/// Failure is returned as a status: no admissible gradient at some node
/// (lambda < min_p H(x_i, p)), or a residual above tolerance.
inline DirichletSolution solve_dirichlet_ball(const BallProblem& prob,
                                              const DirichletOptions& opts = {}) {
    const Grid1D& grid = prob.grid;
    const std::size_t n = grid.size();
    if (n < 3 || n % 2 == 0 || std::abs(grid.x_min() + grid.x_max()) > 1e-9 * grid.x_max())
        throw Error("ball grid must be symmetric with 0 as a node");
    const double dx = grid.dx();
    const double lambda = prob.lambda;
    const Hamiltonian& h = prob.h;

    DirichletSolution sol;
    std::vector<detail::GodunovNode> nodes;
    nodes.reserve(n);
    const double slack = 1e-12 * std::max(1.0, std::abs(lambda));
    double radius = 0.0;  // bound on |p| over the sublevel sets
    for (std::size_t i = 0; i < n; ++i) {
        nodes.emplace_back(h, grid.node(i));
        if (i == 0 || i + 1 == n) continue;
        const auto& g = nodes.back();
        if (g.hmin() > lambda + slack) {
            sol.reason = "no admissible gradient at x=" + std::to_string(grid.node(i));
            return sol;
        }
        double r = 1.0;
        while (h(grid.node(i), g.pmin() + r) <= lambda || h(grid.node(i), g.pmin() - r) <= lambda) {
            r *= 2.0;
            if (r > 1e12) throw Error("Hamiltonian is not coercive");
        }
        radius = std::max(radius, std::abs(g.pmin()) + r);
    }

    std::vector<double> u(n, 2.0 * prob.radius * radius + 1.0);
    u.front() = 0.0;
    u.back() = 0.0;

    auto local_solve = [&](std::size_t i) {
        const auto& g = nodes[i];
        const double ul = u[i - 1], ur = u[i + 1];
        auto excess = [&](double v) { return g((v - ul) / dx, (ur - v) / dx) - lambda - slack; };
        double lo = std::min(ul + dx * g.pmin(), ur - dx * g.pmin());
        double step = dx * (1.0 + std::abs(g.pmin()));
        double hi = lo + step;
        while (excess(hi) <= 0.0) {
            lo = hi;
            step *= 2.0;
            hi = lo + step;
        }
        return numerics::bisect(excess, lo, hi, 1e-16);
    };

    const std::size_t max_sweeps = opts.max_sweeps ? opts.max_sweeps : 4 * n + 20;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double change = 0.0, scale = 1.0;
        auto visit = [&](std::size_t i) {
            double v = local_solve(i);
            change = std::max(change, std::abs(v - u[i]));
            scale = std::max(scale, std::abs(v));
            u[i] = v;
        };
        if (sweep % 2 == 0)
            for (std::size_t i = 1; i + 1 < n; ++i) visit(i);
        else
            for (std::size_t i = n - 2; i >= 1; --i) visit(i);
        sol.sweeps = sweep + 1;
        if (change <= 1e-14 * scale && sweep >= 1) break;
    }

    double res = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i)
        res = std::max(res, std::abs(nodes[i]((u[i] - u[i - 1]) / dx, (u[i + 1] - u[i]) / dx) - lambda));
    sol.residual = res;
    sol.u = SampledFn(grid, std::move(u));
    if (res <= opts.residual_tol) {
        sol.status = SolveStatus::solved;
    } else {
        sol.reason = "residual " + std::to_string(res) + " above tolerance";
    }
    return sol;
}

/// v = u - u(0) for a solution on a symmetric grid.
inline SampledFn normalize_at_origin(const SampledFn& u) {
    const double u0 = u(0.0);
    std::vector<double> v(u.values().begin(), u.values().end());
    for (double& x : v) x -= u0;
    return u.with_values(std::move(v));
}

/// max_x |H(x, 0) - lambda|: the residual of a constant profile.
inline double constant_profile_residual(const Hamiltonian& h, double lambda, const Grid1D& grid) {
    double r = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) r = std::max(r, std::abs(h(grid.node(i), 0.0) - lambda));
    return r;
}

// ---------------------------------------------------------------------------
// lambda_min bracket

struct ErgodicOptions {
    DirichletOptions dirichlet;
    /// Grid spacing as a fraction of the smallest radius.
    double dx_fraction = 0.01;
    /// Uniform lambda samples checked for monotone solvability.
    std::size_t sweep_points = 9;
};

struct ErgodicReport {
    std::vector<double> lambda_grid;  // sorted
    std::vector<SolveStatus> statuses;
    std::vector<double> stabilization_defect;  // inf when a solve failed
    /// profiles[k][r]: v_R for lambda_grid[k] and radii[r]; empty if failed.
    std::vector<std::vector<SampledFn>> profiles;
    std::vector<double> radii;
    double lower_bound = 0.0;  // sampled inf_{x,p} H
    std::pair<double, double> bracket{0.0, 0.0};
};

struct SolvabilityCheck {
    SolveStatus status = SolveStatus::failed;
    double defect = std::numeric_limits<double>::infinity();
    std::vector<SampledFn> profiles;
};

/// Solves every ball problem at `lambda` and measures how much the
/// normalized profiles of the two largest radii differ on the inner half of
/// the smaller ball. Solvable means every solve succeeded and that defect is
/// below 10 x the residual tolerance.
inline SolvabilityCheck check_solvability(const Hamiltonian& h, double lambda,
                                          const std::vector<double>& radii, double dx,
                                          const DirichletOptions& opts) {
    SolvabilityCheck out;
    for (double r : radii) {
        auto sol = solve_dirichlet_ball(BallProblem::make(h, lambda, r, dx), opts);
        if (!sol.solved()) {
            out.profiles.clear();
            return out;
        }
        out.profiles.push_back(normalize_at_origin(*sol.u));
    }
    if (out.profiles.size() == 1) {
        out.defect = 0.0;
    } else {
        const SampledFn& big = out.profiles.back();
        const SampledFn& small = out.profiles[out.profiles.size() - 2];
        const double inner = 0.5 * radii[radii.size() - 2];
        out.defect = 0.0;
        for (double x : small.nodes())
            if (std::abs(x) <= inner) out.defect = std::max(out.defect, std::abs(big(x) - small(x)));
    }
    if (out.defect < 10.0 * opts.residual_tol) out.status = SolveStatus::solved;
    return out;
}

/// Bisection on lambda for solvability, with the lower end clamped to the
/// sampled inf_{x,p} H (no solution exists below it).
inline ErgodicReport estimate_lambda_min(const Hamiltonian& h, std::pair<double, double> lambda_range,
                                         std::vector<double> radii, double tol,
                                         const ErgodicOptions& opts = {}) {
    if (radii.empty()) throw Error("at least one radius is required");
    for (std::size_t i = 0; i < radii.size(); ++i)
        if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1])))
            throw Error("radii must be positive and increasing");
    if (!(lambda_range.first < lambda_range.second)) throw Error("lambda range must be increasing");
    if (!(tol > 0.0)) throw Error("bracket tolerance must be positive");

    const double dx = opts.dx_fraction * radii.front();
    // every radius must be a multiple of dx
    for (double& r : radii) r = std::round(r / dx) * dx;

    ErgodicReport rep;
    rep.radii = radii;

    // inf over the largest grid and a momentum box of H (Step: no solution below inf H)
    {
        Grid1D g = Grid1D::symmetric(radii.back(), dx);
        double lb = std::numeric_limits<double>::infinity();
        if (h.x_independent()) {
            lb = minimize_in_p(h, 0.0).value;
        } else {
            for (std::size_t i = 0; i < g.size(); ++i) lb = std::min(lb, minimize_in_p(h, g.node(i)).value);
        }
        rep.lower_bound = lb;
    }

    struct Eval {
        double lambda;
        SolvabilityCheck check;
    };
    std::vector<Eval> evals;
    auto status_at = [&](double lambda) {
        for (const auto& e : evals)
            if (e.lambda == lambda) return e.check.status;
        evals.push_back({lambda, check_solvability(h, lambda, radii, dx, opts.dirichlet)});
        return evals.back().check.status;
    };

    double lo = std::max(lambda_range.first, rep.lower_bound);
    double hi = lambda_range.second;
    if (lo > hi) throw Error("lambda range lies below inf H");
    if (status_at(hi) != SolveStatus::solved) throw Error("upper end of lambda range is not solvable");

    if (status_at(lo) == SolveStatus::solved) {
        rep.bracket = {rep.lower_bound, lo};
    } else {
        while (hi - lo > tol) {
            double mid = 0.5 * (lo + hi);
            (status_at(mid) == SolveStatus::solved ? hi : lo) = mid;
        }
        rep.bracket = {lo, hi};
    }

    for (std::size_t k = 0; k < opts.sweep_points; ++k) {
        double lam = lambda_range.first + (lambda_range.second - lambda_range.first) *
                                              static_cast<double>(k) /
                                              static_cast<double>(std::max<std::size_t>(opts.sweep_points - 1, 1));
        status_at(lam);
    }

    std::sort(evals.begin(), evals.end(), [](const Eval& a, const Eval& b) { return a.lambda < b.lambda; });
    bool seen_solved = false;
    for (auto& e : evals) {
        if (e.check.status == SolveStatus::solved)
            seen_solved = true;
        else if (seen_solved)
            throw Error("monotonicity violated, refine grids");
        rep.lambda_grid.push_back(e.lambda);
        rep.statuses.push_back(e.check.status);
        rep.stabilization_defect.push_back(e.check.defect);
        rep.profiles.push_back(std::move(e.check.profiles));
    }
    return rep;
}

}  // namespace hjlab

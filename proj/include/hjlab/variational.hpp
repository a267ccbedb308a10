#pragma once

// Exact solutions of u_t + H(Du) = 0 for convex, x-independent H through the
// Hopf-Lax (Oleinik-Lax) formula
//
//     u(x, t) = inf_y  u0(y) + t L((x - y) / t),
//
// straight-line minimizer extraction, and the staircase initial data whose
// growth rate u(0, t) / t has two different limits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "hjlab/core.hpp"
#include "hjlab/hamiltonians.hpp"
#include "hjlab/numerics.hpp"

namespace hjlab {

struct HopfLaxPoint {
    double value = 0.0;
    double argmin = 0.0;  // smallest minimizer
    bool unique = true;
};

namespace detail {

inline void require_variational(const Hamiltonian& h, double x, double t) {
    if (!(t > 0.0)) throw Error("time must be positive");
    if (!std::isfinite(x)) throw Error("query point must be finite");
    if (!h.x_independent()) throw Error("variational solver requires an x-independent Hamiltonian");
    if (!h.convex_in_p() || !h.coercive())
        throw Error("variational solver requires a convex coercive Hamiltonian");
}

/// Interval of y containing every minimizer: optimal velocities are H_p of
/// slopes of u0, and |slope| <= Lip(u0); the convex difference quotients
/// below bound H_p on that range. The range is doubled around its centre
/// (plus one) and intersected with the domain of L.
inline std::pair<double, double> search_window(const Hamiltonian& h, const Lagrangian& lag,
                                               const SampledFn& u0, double x, double t) {
    const double lip = u0.lipschitz();
    const double vl = h(0.0, -lip) - h(0.0, -lip - 1.0);
    const double vr = h(0.0, lip + 1.0) - h(0.0, lip);
    const double centre = 0.5 * (vl + vr);
    const double half = (vr - vl) + 1.0;
    auto [dlo, dhi] = lag.velocity_domain();
    const double vlo = std::max(dlo, centre - half);
    const double vhi = std::min(dhi, centre + half);
    if (!(vlo <= vhi)) throw Error("variational problem unbounded window");
    return {x - t * vhi, x - t * vlo};
}

}  // namespace detail

/// Hopf-Lax value at (x, t) with the minimizing start point.
///
/// The objective is convex on every segment where u0 is linear, so each
/// segment inside the search window is minimized exactly (closed-form
/// optimal velocity when available, golden section otherwise) and the best
/// segment wins.
inline HopfLaxPoint hopf_lax(const Hamiltonian& h, const SampledFn& u0, double x, double t) {
    detail::require_variational(h, x, t);
    const Lagrangian lag(h);
    auto [ylo, yhi] = detail::search_window(h, lag, u0, x, t);
    auto [dlo, dhi] = lag.velocity_domain();

    auto action = [&](double y) { return t * lag(0.0, std::clamp((x - y) / t, dlo, dhi)); };

    std::vector<double> breaks{ylo};
    auto nodes = u0.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i] > ylo && nodes[i] < yhi) breaks.push_back(nodes[i]);
    breaks.push_back(yhi);

    struct Candidate {
        double y;
        double value;
    };
    std::vector<Candidate> cands;
    cands.reserve(breaks.size());
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double ya = breaks[k], yb = breaks[k + 1];
        if (!(yb > ya)) {
            cands.push_back({ya, u0(ya) + action(ya)});
            continue;
        }
        const double ua = u0(ya);
        const double s = (u0(yb) - ua) / (yb - ya);
        auto objective = [&](double y) { return ua + s * (y - ya) + action(y); };
        if (auto v = lag.optimal_velocity(0.0, s)) {
            double y = std::clamp(x - t * *v, ya, yb);
            cands.push_back({y, objective(y)});
        } else {
            auto m = numerics::golden_min(objective, ya, yb);
            cands.push_back({m.x, m.value});
        }
    }

    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) best = std::min(best, c.value);
    const double vtol = 1e-9 * std::max(1.0, std::abs(best));
    HopfLaxPoint out{best, 0.0, true};
    bool found = false;
    for (const auto& c : cands) {
        if (c.value > best + vtol) continue;
        if (!found) {
            out.argmin = c.y;
            found = true;
        } else if (std::abs(c.y - out.argmin) > 1e-7 * std::max(1.0, std::abs(out.argmin))) {
            out.unique = false;
        }
    }
    return out;
}

inline double hopf_lax_evaluate(const Hamiltonian& h, const SampledFn& u0, double x, double t) {
    return hopf_lax(h, u0, x, t).value;
}

/// Hopf-Lax solution sampled on the nodes of `grid`.
inline SampledFn hopf_lax_on_grid(const Hamiltonian& h, const SampledFn& u0, const Grid1D& grid,
                                  double t) {
    return SampledFn::sample(grid, [&](double x) { return hopf_lax_evaluate(h, u0, x, t); });
}

// ---------------------------------------------------------------------------
// Minimizing trajectories

struct TrajectoryResult {
    std::vector<double> times;
    std::vector<double> positions;
    double start_point = 0.0;
    double action = 0.0;
    bool unique = true;
};

/// Straight-line minimizer gamma(s) = y + s (x - y) / t ending at x, where y
/// is the (smallest) Hopf-Lax argmin. Valid for strictly convex H, where the
/// optimal velocity along a minimizer is constant.
inline TrajectoryResult backtrack_minimizer(const Hamiltonian& h, const SampledFn& u0, double x,
                                            double t, std::size_t samples = 101) {
    if (!h.strictly_convex()) throw Error("trajectory extraction requires a strictly convex Hamiltonian");
    if (samples < 2) throw Error("trajectory needs at least 2 samples");
    const HopfLaxPoint hl = hopf_lax(h, u0, x, t);
    const Lagrangian lag(h);
    const double y = hl.argmin;
    const double v = (x - y) / t;

    TrajectoryResult r;
    r.start_point = y;
    r.unique = hl.unique;
    r.action = u0(y) + t * lag(0.0, v);
    r.times.resize(samples);
    r.positions.resize(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        double s = t * static_cast<double>(k) / static_cast<double>(samples - 1);
        r.times[k] = s;
        r.positions[k] = y + s * v;
    }
    r.times.back() = t;
    r.positions.back() = x;
    return r;
}

// ---------------------------------------------------------------------------
// Staircase initial data

/// Increasing sequence a_0 < a_1 < ... defining u0 with u0 = 0 on
/// (-inf, a_2], slope -1 on (a_{2k+2}, a_{2k+3}) and slope 0 on
/// (a_{2k+1}, a_{2k+2}) (and on (a_0, a_1)).
struct StaircaseSpec {
    std::vector<double> a;

    /// a_n = 10^{n(n+1)/2}, n = 0..5.
    static StaircaseSpec default_sequence() {
        StaircaseSpec s;
        for (int n = 0; n <= 5; ++n) s.a.push_back(std::pow(10.0, n * (n + 1) / 2));
        return s;
    }

    void validate() const {
        if (a.size() < 6) throw Error("staircase sequence needs at least 6 terms");
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!std::isfinite(a[i]) || !(a[i] > 0.0))
                throw Error("staircase sequence must be positive and finite");
            if (i > 0 && !(a[i] > a[i - 1])) throw Error("staircase sequence must be strictly increasing");
        }
        for (std::size_t i = 2; i < a.size(); ++i)
            if (!(a[i] / a[i - 1] > a[i - 1] / a[i - 2]))
                throw Error("sequence violates growth-ratio condition");
    }

    /// True when u0 has slope -1 on (a_i, a_{i+1}).
    static bool descending(std::size_t i) { return i >= 2 && i % 2 == 0; }

    /// u0 at the sequence points, u0(a_0) = 0.
    std::vector<double> corner_values() const {
        std::vector<double> v(a.size(), 0.0);
        for (std::size_t i = 1; i < a.size(); ++i)
            v[i] = v[i - 1] - (descending(i - 1) ? a[i] - a[i - 1] : 0.0);
        return v;
    }
};

/// Exact staircase u0 on the nodes of `grid` with every a_n inserted as a
/// node. Constant extension outside: u0 = 0 to the left, and the next piece
/// to the right of the last term (index 2k+1 when the prefix has even
/// length) is flat.
inline SampledFn build_staircase_u0(std::span<const double> a, const Grid1D& grid) {
    StaircaseSpec spec{std::vector<double>(a.begin(), a.end())};
    spec.validate();
    const double last = spec.a.back();
    if (grid.x_min() > 0.0 || grid.x_max() < last * (1.0 - 1e-12))
        throw Error("staircase grid must cover [0, a_last]");

    std::vector<double> nodes = grid.nodes();
    nodes.insert(nodes.end(), spec.a.begin(), spec.a.end());
    std::sort(nodes.begin(), nodes.end());
    std::vector<double> merged;
    for (double x : nodes) {
        if (!merged.empty() && x - merged.back() <= 1e-12 * std::max(1.0, std::abs(x))) {
            // keep the sequence point when a grid node duplicates it
            if (std::binary_search(spec.a.begin(), spec.a.end(), x)) merged.back() = x;
            continue;
        }
        merged.push_back(x);
    }

    const std::vector<double> corners = spec.corner_values();
    std::vector<double> values(merged.size());
    for (std::size_t k = 0; k < merged.size(); ++k) {
        const double y = merged[k];
        if (y <= spec.a.front()) {
            values[k] = 0.0;
            continue;
        }
        auto it = std::upper_bound(spec.a.begin(), spec.a.end(), y);
        std::size_t i = static_cast<std::size_t>(it - spec.a.begin()) - 1;
        if (i + 1 >= spec.a.size()) {
            values[k] = corners.back();
            continue;
        }
        values[k] = corners[i] - (StaircaseSpec::descending(i) ? y - spec.a[i] : 0.0);
    }
    return SampledFn(std::move(merged), std::move(values), Extension::constant);
}

}  // namespace hjlab

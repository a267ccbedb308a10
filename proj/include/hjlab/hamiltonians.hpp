#pragma once

// Hamiltonian descriptors H(x, p) in one space dimension, together with the
// convex-analytic tools the solvers need: Legendre transform, gauge of the
// zero sublevel set, Kruzhkov transform and the (H4) margin estimator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hjlab/core.hpp"
#include "hjlab/numerics.hpp"

namespace hjlab {

class Hamiltonian;

/// H = -drift * p + p^2 / 2.
struct Quadratic {
    double drift = 0.0;
};
/// H = |p - c|.
struct EikonalShift {
    double c = 0.0;
};
/// H = |p|^2 - eps * f(x).
struct QuadPotential {
    double eps = 0.0;
    SampledFn f;
};
/// F = |p + alpha| - |alpha|.
struct AbsShift {
    double alpha = 0.0;
};
/// base(x, p) - lambda.
struct ShiftedBy {
    std::shared_ptr<const Hamiltonian> base;
    double lambda = 0.0;
};
/// Bilinear table over (x, p); linear extrapolation in p, constant in x.
/// Without an x grid the table is a function of p only.
struct Tabulated {
    std::optional<Grid1D> x_grid;
    Grid1D p_grid;
    std::vector<double> values;  // row-major: values[ix * np + ip]
};

class Hamiltonian {
public:
    using Family = std::variant<Quadratic, EikonalShift, QuadPotential, AbsShift, ShiftedBy, Tabulated>;

    static Hamiltonian quadratic(double drift = 0.0) {
        return Hamiltonian(Quadratic{drift}, true, true, true);
    }
    static Hamiltonian eikonal_shift(double c) {
        return Hamiltonian(EikonalShift{c}, true, true, false);
    }
    static Hamiltonian quad_potential(double eps, SampledFn f) {
        return Hamiltonian(QuadPotential{eps, std::move(f)}, true, true, true);
    }
    static Hamiltonian abs_shift(double alpha) {
        return Hamiltonian(AbsShift{alpha}, true, true, false);
    }
    static Hamiltonian shifted(Hamiltonian base, double lambda) {
        bool cv = base.convex_in_p(), co = base.coercive(), sc = base.strictly_convex();
        return Hamiltonian(ShiftedBy{std::make_shared<const Hamiltonian>(std::move(base)), lambda},
                           cv, co, sc);
    }
    static Hamiltonian tabulated(Tabulated table);

    const Family& family() const { return family_; }
    bool convex_in_p() const { return convex_; }
    bool coercive() const { return coercive_; }
    bool strictly_convex() const { return strictly_convex_; }
    bool x_independent() const;
    std::string describe() const;

    double operator()(double x, double p) const;

private:
    Hamiltonian(Family f, bool convex, bool coercive, bool strictly)
        : family_(std::move(f)), convex_(convex), coercive_(coercive), strictly_convex_(strictly) {}

    Family family_;
    bool convex_;
    bool coercive_;
    bool strictly_convex_;
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline double table_row(const Tabulated& t, std::size_t row, double p) {
    const std::size_t np = t.p_grid.size();
    const double* v = t.values.data() + row * np;
    double s = (p - t.p_grid.x_min()) / t.p_grid.dx();
    std::size_t i;
    if (s <= 0.0)
        i = 0;
    else if (s >= static_cast<double>(np - 1))
        i = np - 2;
    else
        i = std::min(static_cast<std::size_t>(s), np - 2);
    double w = s - static_cast<double>(i);
    return v[i] + w * (v[i + 1] - v[i]);
}

inline double eval_table(const Tabulated& t, double x, double p) {
    if (!t.x_grid) return table_row(t, 0, p);
    const Grid1D& gx = *t.x_grid;
    double s = std::clamp((x - gx.x_min()) / gx.dx(), 0.0, static_cast<double>(gx.size() - 1));
    std::size_t i = std::min(static_cast<std::size_t>(s), gx.size() - 2);
    double w = s - static_cast<double>(i);
    return (1.0 - w) * table_row(t, i, p) + w * table_row(t, i + 1, p);
}

}  // namespace detail

inline double Hamiltonian::operator()(double x, double p) const {
    return std::visit(
        detail::overloaded{
            [&](const Quadratic& q) { return -q.drift * p + 0.5 * p * p; },
            [&](const EikonalShift& e) { return std::abs(p - e.c); },
            [&](const QuadPotential& q) { return p * p - q.eps * q.f(x); },
            [&](const AbsShift& a) { return std::abs(p + a.alpha) - std::abs(a.alpha); },
            [&](const ShiftedBy& s) { return (*s.base)(x, p) - s.lambda; },
            [&](const Tabulated& t) { return detail::eval_table(t, x, p); },
        },
        family_);
}

inline bool Hamiltonian::x_independent() const {
    return std::visit(detail::overloaded{
                          [](const QuadPotential& q) { return q.eps == 0.0; },
                          [](const ShiftedBy& s) { return s.base->x_independent(); },
                          [](const Tabulated& t) { return !t.x_grid.has_value(); },
                          [](const auto&) { return true; },
                      },
                      family_);
}

inline std::string Hamiltonian::describe() const {
    auto num = [](double v) {
        std::string s = std::to_string(v);
        return s;
    };
    return std::visit(detail::overloaded{
                          [&](const Quadratic& q) { return "quadratic(drift=" + num(q.drift) + ")"; },
                          [&](const EikonalShift& e) { return "eikonal-shift(c=" + num(e.c) + ")"; },
                          [&](const QuadPotential& q) { return "quad-potential(eps=" + num(q.eps) + ")"; },
                          [&](const AbsShift& a) { return "abs-shift(alpha=" + num(a.alpha) + ")"; },
                          [&](const ShiftedBy& s) {
                              return "shifted(" + s.base->describe() + ", lambda=" + num(s.lambda) + ")";
                          },
                          [&](const Tabulated&) { return std::string("tabulated"); },
                      },
                      family_);
}

inline Hamiltonian Hamiltonian::tabulated(Tabulated table) {
    const std::size_t np = table.p_grid.size();
    const std::size_t rows = table.x_grid ? table.x_grid->size() : 1;
    if (np < 3) throw Error("tabulated Hamiltonian needs at least 3 momentum nodes");
    if (table.values.size() != rows * np) throw Error("tabulated Hamiltonian has wrong value count");
    bool convex = true, strictly = true, coercive = true;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* v = table.values.data() + r * np;
        for (std::size_t i = 1; i + 1 < np; ++i) {
            double second = v[i + 1] - 2.0 * v[i] + v[i - 1];
            if (second < -1e-12) convex = false;
            if (second <= 1e-12) strictly = false;
        }
        if (!(v[1] < v[0]) || !(v[np - 1] > v[np - 2])) coercive = false;
    }
    return Hamiltonian(std::move(table), convex, coercive, convex && strictly);
}

// ---------------------------------------------------------------------------
// Legendre transform

/// L(x, v) = sup_p (p v - H(x, p)); `finite` is false when the supremum is +inf.
struct LagrangianValue {
    bool finite = true;
    double value = 0.0;
    double maximizer_p = 0.0;
};

/// Numerical convex conjugate in p. The search interval is doubled until
/// the objective stops increasing at both ends; growth that persists up to
/// |p| = 2^50 is reported as +inf.
inline LagrangianValue legendre_transform(const Hamiltonian& h, double x, double v) {
    if (!h.convex_in_p()) throw Error("legendre requires convexity");
    auto g = [&](double p) { return p * v - h(x, p); };
    constexpr double cap = 1125899906842624.0;  // 2^50
    auto grows = [&](double from, double to) {
        return g(to) - g(from) > 1e-12 * std::max(1.0, std::abs(to - from));
    };
    double b = 1.0;
    while (grows(b, 2.0 * b)) {
        b *= 2.0;
        if (b >= cap) return {false, std::numeric_limits<double>::infinity(), 0.0};
    }
    double a = -1.0;
    while (grows(a, 2.0 * a)) {
        a *= 2.0;
        if (a <= -cap) return {false, std::numeric_limits<double>::infinity(), 0.0};
    }
    auto best = numerics::golden_min([&](double p) { return -g(p); }, 2.0 * a, 2.0 * b);
    return {true, -best.value, best.x};
}

/// Lagrangian with closed forms for the built-in families and a numerical
/// fallback. Used by the variational solver, where it is evaluated many
/// times per query.
class Lagrangian {
public:
    explicit Lagrangian(const Hamiltonian& h) : h_(&h) {}

    double operator()(double x, double v) const {
        auto closed = closed_form(*h_, x, v);
        if (closed) return *closed;
        auto lv = legendre_transform(*h_, x, v);
        return lv.finite ? lv.value : std::numeric_limits<double>::infinity();
    }

    /// Closed interval of velocities where L is finite.
    std::pair<double, double> velocity_domain() const { return domain(*h_); }

    /// Velocity minimizing s*y + t*L((x-y)/t) over y, i.e. v with L'(v) = s,
    /// when a closed form exists.
    std::optional<double> optimal_velocity(double x, double slope) const {
        return opt_velocity(*h_, x, slope);
    }

private:
    static std::optional<double> closed_form(const Hamiltonian& h, double x, double v) {
        constexpr double inf = std::numeric_limits<double>::infinity();
        return std::visit(
            detail::overloaded{
                [&](const Quadratic& q) -> std::optional<double> {
                    return 0.5 * (v + q.drift) * (v + q.drift);
                },
                [&](const EikonalShift& e) -> std::optional<double> {
                    return std::abs(v) <= 1.0 ? e.c * v : inf;
                },
                [&](const AbsShift& a) -> std::optional<double> {
                    return std::abs(v) <= 1.0 ? -a.alpha * v + std::abs(a.alpha) : inf;
                },
                [&](const QuadPotential& q) -> std::optional<double> {
                    return 0.25 * v * v + q.eps * q.f(x);
                },
                [&](const ShiftedBy& s) -> std::optional<double> {
                    auto b = closed_form(*s.base, x, v);
                    if (!b) return std::nullopt;
                    return *b + s.lambda;
                },
                [&](const Tabulated&) -> std::optional<double> { return std::nullopt; },
            },
            h.family());
    }

    static std::pair<double, double> domain(const Hamiltonian& h) {
        static constexpr double inf = std::numeric_limits<double>::infinity();
        return std::visit(detail::overloaded{
                              [](const EikonalShift&) { return std::pair{-1.0, 1.0}; },
                              [](const AbsShift&) { return std::pair{-1.0, 1.0}; },
                              [](const ShiftedBy& s) { return domain(*s.base); },
                              [](const Tabulated& t) {
                                  const std::size_t np = t.p_grid.size();
                                  double lo = inf, hi = -inf;
                                  const std::size_t rows = t.values.size() / np;
                                  for (std::size_t r = 0; r < rows; ++r) {
                                      const double* v = t.values.data() + r * np;
                                      lo = std::min(lo, (v[1] - v[0]) / t.p_grid.dx());
                                      hi = std::max(hi, (v[np - 1] - v[np - 2]) / t.p_grid.dx());
                                  }
                                  return std::pair{lo, hi};
                              },
                              [](const auto&) { return std::pair{-inf, inf}; },
                          },
                          h.family());
    }

    static std::optional<double> opt_velocity(const Hamiltonian& h, double x, double s) {
        return std::visit(detail::overloaded{
                              [&](const Quadratic& q) -> std::optional<double> { return s - q.drift; },
                              [&](const QuadPotential&) -> std::optional<double> { return 2.0 * s; },
                              [&](const ShiftedBy& b) { return opt_velocity(*b.base, x, s); },
                              [](const auto&) -> std::optional<double> { return std::nullopt; },
                          },
                          h.family());
    }

    const Hamiltonian* h_;
};

// ---------------------------------------------------------------------------
// Sublevel sets and slope bounds

/// argmin_p H(x, p) for convex coercive H.
inline numerics::Argmin minimize_in_p(const Hamiltonian& h, double x) {
    auto f = [&](double p) { return h(x, p); };
    double b = 1.0;
    while (f(2.0 * b) < f(b) && b < 1e12) b *= 2.0;
    double a = -1.0;
    while (f(2.0 * a) < f(a) && a > -1e12) a *= 2.0;
    return numerics::golden_min(f, 2.0 * a, 2.0 * b, 1e-15);
}

/// Upper bound for max |H_p(x, p)| over |p| <= g and the given x samples,
/// from difference quotients on a fine momentum sample slightly wider than
/// [-g, g].
inline double slope_bound(const Hamiltonian& h, std::span<const double> xs, double g) {
    constexpr int k = 400;
    const double lo = -g - 1e-3, hi = g + 1e-3;
    const double dp = (hi - lo) / k;
    double m = 0.0;
    for (double x : xs) {
        double prev = h(x, lo);
        for (int i = 1; i <= k; ++i) {
            double cur = h(x, lo + i * dp);
            m = std::max(m, std::abs(cur - prev) / dp);
            prev = cur;
        }
    }
    return m;
}

/// Gauge of C(x) = {p : H(x,p) <= 0} with respect to the origin, found by
/// bisection on s where H(x, p/s) changes sign.
inline double gauge_of_sublevel(const Hamiltonian& h, double x, double p) {
    if (!(h(x, 0.0) < 0.0)) throw Error("origin not interior to sublevel set");
    if (p == 0.0) return 0.0;
    auto outside = [&](double s) { return h(x, p / s) > 0.0; };
    double hi = std::abs(p);
    while (outside(hi)) hi *= 2.0;
    double lo = hi;
    while (!outside(lo)) {
        lo *= 0.5;
        if (lo < 1e-300) return 0.0;  // the ray never leaves C
    }
    for (int it = 0; it < 400 && (hi - lo) > 1e-13 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (outside(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Kruzhkov transform

enum class KruzhkovDirection { forward, inverse };

/// forward: v -> -exp(-v); inverse: w -> -log(-w), defined for w < 0.
inline SampledFn kruzhkov(const SampledFn& u, KruzhkovDirection dir) {
    std::vector<double> out(u.size());
    auto vals = u.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (dir == KruzhkovDirection::forward) {
            out[i] = -std::exp(-vals[i]);
        } else {
            if (!(vals[i] < 0.0)) throw Error("not in Kruzhkov range");
            out[i] = -std::log(-vals[i]);
        }
    }
    return u.with_values(std::move(out));
}

namespace detail {

/// Godunov numerical Hamiltonian at one node: min of H over [a, b] when
/// a <= b, max over [b, a] otherwise. Convex H uses the precomputed argmin;
/// other H are scanned.
class GodunovNode {
public:
    GodunovNode(const Hamiltonian& h, double x) : h_(&h), x_(x), convex_(h.convex_in_p()) {
        if (convex_) {
            auto m = minimize_in_p(h, x);
            pmin_ = m.x;
            hmin_ = m.value;
        } else {
            // coarse scan for the global minimum of a non-convex H
            hmin_ = std::numeric_limits<double>::infinity();
            for (int k = -4000; k <= 4000; ++k) {
                double p = 0.01 * k;
                double v = h(x, p);
                if (v < hmin_) {
                    hmin_ = v;
                    pmin_ = p;
                }
            }
        }
    }

    double pmin() const { return pmin_; }
    double hmin() const { return hmin_; }

    double operator()(double a, double b) const {
        const Hamiltonian& h = *h_;
        if (a <= b) {
            if (convex_) return h(x_, std::clamp(pmin_, a, b));
            return scan(a, b, true);
        }
        if (convex_) return std::max(h(x_, a), h(x_, b));
        return scan(b, a, false);
    }

private:
    double scan(double lo, double hi, bool want_min) const {
        double best = (*h_)(x_, lo);
        constexpr int k = 64;
        for (int i = 1; i <= k; ++i) {
            double v = (*h_)(x_, lo + (hi - lo) * i / k);
            best = want_min ? std::min(best, v) : std::max(best, v);
        }
        return best;
    }

    const Hamiltonian* h_;
    double x_;
    bool convex_;
    double pmin_ = 0.0;
    double hmin_ = 0.0;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// (H4) margin estimator

enum class H4Status { holds_with_margin, violated };

struct H4Sample {
    std::size_t index = 0;
    double x = 0.0;
    double p = 0.0;
    double q = 0.0;
    double mu = 1.0;
    double margin = 0.0;
};

struct H4Report {
    H4Status status = H4Status::violated;
    double psi_estimate = 0.0;
    double worst_margin = 0.0;
    std::size_t admissible = 0;
    std::optional<H4Sample> witness;
};

/// Worst margins at or below this are treated as no uniform margin.
inline constexpr double h4_zero_margin = 1e-9;

/// [mu F(x, p/mu + q) - F(x, p + q)] / (1 - mu), for mu in (0, 1).
inline double h4_margin(const Hamiltonian& F, double x, double p, double q, double mu) {
    return (mu * F(x, p / mu + q) - F(x, p + q)) / (1.0 - mu);
}

/// Sampling estimate of the best uniform margin psi(eta) in
///   mu F(x, p/mu + q) >= F(x, p + q) + psi (1 - mu)
/// over |F(x, p+q)| >= eta, F(x, q) <= 0, |p|, |q| <= k_box, mu in (0, 1).
///
/// Samples come from a Halton sequence in (x, p, q, mu). Each Halton point
/// is paired with a copy whose q is moved onto the boundary of
/// {F(x, .) <= 0}, where the convexity lower bound -F(x,q) vanishes and the
/// margin is smallest. Sample i has index 2i (Halton) or 2i+1 (boundary
/// copy); the witness is the smallest index attaining the worst margin.
inline H4Report check_h4(const Hamiltonian& F, double eta, double k_box, std::size_t samples,
                         Window x_range) {
    if (!(eta > 0.0)) throw Error("eta must be positive");
    if (!(k_box > 0.0)) throw Error("box bound must be positive");
    if (samples == 0) throw Error("sample count must be positive");

    H4Report rep;
    double worst = std::numeric_limits<double>::infinity();

    auto consider = [&](std::size_t index, double x, double p, double q, double mu) {
        if (!(mu < 1.0) || !(mu > 0.0)) return;
        if (std::abs(p) > k_box || std::abs(q) > k_box) return;
        if (F(x, q) > 0.0) return;
        if (std::abs(F(x, p + q)) < eta) return;
        ++rep.admissible;
        double m = h4_margin(F, x, p, q, mu);
        if (m < worst) {
            worst = m;
            rep.witness = H4Sample{index, x, p, q, mu, m};
        }
    };

    // Zero set of F(x, .) inside [-k_box, k_box], cached per x for
    // x-independent F.
    auto boundary_points = [&](double x) {
        std::vector<double> pts;
        auto mn = minimize_in_p(F, x);
        double pmin = std::clamp(mn.x, -k_box, k_box);
        double fmin = F(x, pmin);
        if (fmin > 0.0) return pts;
        auto f = [&](double q) { return F(x, q); };
        if (f(k_box) > 0.0) pts.push_back(numerics::bisect(f, pmin, k_box));
        if (f(-k_box) > 0.0) pts.push_back(numerics::bisect(f, pmin, -k_box));
        return pts;
    };
    const bool xind = F.x_independent();
    std::vector<double> cached;
    if (xind) cached = boundary_points(0.0);

    for (std::size_t i = 1; i <= samples; ++i) {
        double x = x_range.lo + numerics::radical_inverse(i, 2) * x_range.width();
        double p = k_box * (2.0 * numerics::radical_inverse(i, 3) - 1.0);
        double q = k_box * (2.0 * numerics::radical_inverse(i, 5) - 1.0);
        double mu = 1.0 - numerics::radical_inverse(i, 7);
        consider(2 * i, x, p, q, mu);
        auto pts = xind ? cached : boundary_points(x);
        if (!pts.empty()) {
            double qb = pts[i % pts.size()];
            consider(2 * i + 1, x, p, qb, mu);
        }
    }
    if (rep.admissible == 0) throw Error("constraint set empty at this eta/box");

    rep.worst_margin = worst;
    if (worst > h4_zero_margin) {
        rep.status = H4Status::holds_with_margin;
        rep.psi_estimate = std::min(worst, eta);
    } else {
        rep.status = H4Status::violated;
        rep.psi_estimate = std::max(0.0, worst);
    }
    return rep;
}

inline H4Report check_h4(const Hamiltonian& F, double eta, double k_box, std::size_t samples) {
    return check_h4(F, eta, k_box, samples, Window(-k_box, k_box));
}

}  // namespace hjlab

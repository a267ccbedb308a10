#pragma once

// Small scalar optimization and root-finding helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>

namespace hjlab::numerics {

struct Argmin {
    double x;
    double value;
};

/// Golden-section search for the minimum of a unimodal function on [a, b].
/// Endpoints are included as candidates, so monotone functions report the
/// correct end.
template <class F>
Argmin golden_min(F&& f, double a, double b, double rel_tol = 1e-13) {
    constexpr double inv_phi = 0.6180339887498949;
    Argmin best{a, f(a)};
    if (double fb = f(b); fb < best.value) best = {b, fb};
    if (!(b > a)) return best;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    for (int it = 0; it < 200 && (b - a) > rel_tol * scale; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    double xm = 0.5 * (a + b);
    for (auto [x, v] : {std::pair{c, fc}, std::pair{d, fd}, std::pair{xm, f(xm)}})
        if (v < best.value) best = {x, v};
    return best;
}

/// Bisection for a sign change of `f` on [lo, hi] with f(lo) <= 0 < f(hi)
/// (or the reverse); returns the end of the final bracket on the f(lo) side.
template <class F>
double bisect(F&& f, double lo, double hi, double rel_tol = 1e-14, int max_iter = 200) {
    const bool lo_nonpositive = f(lo) <= 0.0;
    for (int it = 0; it < max_iter; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (std::abs(hi - lo) <= rel_tol * std::max(std::abs(lo), std::abs(hi))) break;
        if ((f(mid) <= 0.0) == lo_nonpositive)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

/// Radical inverse of `index` in `base` (van der Corput / Halton coordinate).
inline double radical_inverse(std::uint64_t index, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

}  // namespace hjlab::numerics

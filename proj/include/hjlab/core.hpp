#pragma once

// Grids, piecewise-linear sampled functions, windows and sup norms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hjlab {

/// Library error. Messages are stable and checked by tests.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Uniform 1-D grid with `n` nodes spanning [x_min, x_max].
class Grid1D {
public:
    Grid1D(double x_min, double x_max, std::size_t n)
        : x_min_(x_min), x_max_(x_max), n_(n) {
        if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max))
            throw Error("grid requires finite x_min < x_max");
        if (n < 2) throw Error("grid requires at least 2 nodes");
        dx_ = (x_max - x_min) / static_cast<double>(n - 1);
    }

    /// Grid on [lo, hi] whose spacing does not exceed `max_dx`.
    static Grid1D with_max_spacing(double lo, double hi, double max_dx) {
        if (!(max_dx > 0.0)) throw Error("grid spacing must be positive");
        auto cells = static_cast<std::size_t>(std::ceil((hi - lo) / max_dx - 1e-9));
        return Grid1D(lo, hi, std::max<std::size_t>(cells, 1) + 1);
    }

    /// Symmetric grid on [-r, r] with 0 as a node and spacing exactly `dx`
    /// (r is rounded up to a multiple of dx).
    static Grid1D symmetric(double r, double dx) {
        if (!(r > 0.0) || !(dx > 0.0)) throw Error("symmetric grid requires r > 0 and dx > 0");
        auto half = static_cast<std::size_t>(std::ceil(r / dx - 1e-9));
        double rr = static_cast<double>(half) * dx;
        return Grid1D(-rr, rr, 2 * half + 1);
    }

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    std::size_t size() const { return n_; }
    double dx() const { return dx_; }
    double node(std::size_t i) const { return x_min_ + static_cast<double>(i) * dx_; }

    std::vector<double> nodes() const {
        std::vector<double> xs(n_);
        for (std::size_t i = 0; i < n_; ++i) xs[i] = node(i);
        return xs;
    }

private:
    double x_min_;
    double x_max_;
    std::size_t n_;
    double dx_;
};

enum class Extension { constant, linear };

/// Piecewise-linear function through (nodes[i], values[i]).
///
/// Nodes are strictly increasing but need not be uniform, so that breakpoints
/// of exact data (e.g. staircase corners) can be inserted as nodes. Outside
/// the node range the function is extended by its end value (`constant`) or
/// by the end slope (`linear`).
class SampledFn {
public:
    SampledFn(const Grid1D& grid, std::vector<double> values, Extension ext = Extension::linear)
        : SampledFn(grid.nodes(), std::move(values), ext) {}

    SampledFn(std::vector<double> nodes, std::vector<double> values,
              Extension ext = Extension::linear)
        : nodes_(std::move(nodes)), values_(std::move(values)), ext_(ext) {
        if (nodes_.size() < 2) throw Error("sampled function requires at least 2 nodes");
        if (nodes_.size() != values_.size()) throw Error("node/value length mismatch");
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (!std::isfinite(nodes_[i]) || !std::isfinite(values_[i]))
                throw Error("sampled function requires finite nodes and values");
            if (i > 0 && !(nodes_[i] > nodes_[i - 1]))
                throw Error("nodes must be strictly increasing");
        }
    }

    template <class F>
    static SampledFn sample(const Grid1D& grid, F&& f, Extension ext = Extension::linear) {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.node(i));
        return SampledFn(grid, std::move(v), ext);
    }

    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return nodes_.size(); }
    double x_min() const { return nodes_.front(); }
    double x_max() const { return nodes_.back(); }
    Extension extension() const { return ext_; }

    /// Slope of segment i, i.e. on [nodes[i], nodes[i+1]].
    double slope(std::size_t i) const {
        return (values_[i + 1] - values_[i]) / (nodes_[i + 1] - nodes_[i]);
    }

    double left_tail_slope() const { return ext_ == Extension::linear ? slope(0) : 0.0; }
    double right_tail_slope() const {
        return ext_ == Extension::linear ? slope(nodes_.size() - 2) : 0.0;
    }

    double operator()(double x) const {
        if (!std::isfinite(x)) throw Error("interpolation point must be finite");
        const std::size_t n = nodes_.size();
        if (x <= nodes_.front()) {
            if (x == nodes_.front()) return values_.front();
            return values_.front() + left_tail_slope() * (x - nodes_.front());
        }
        if (x >= nodes_.back()) {
            if (x == nodes_.back()) return values_.back();
            return values_.back() + right_tail_slope() * (x - nodes_.back());
        }
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
        std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
        if (i + 1 >= n) return values_.back();
        if (x == nodes_[i]) return values_[i];
        double w = (x - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
        return values_[i] + w * (values_[i + 1] - values_[i]);
    }

    /// max |Δvalue| / Δx over adjacent nodes; also the Lipschitz constant of
    /// the interpolant, since the tails reuse an end slope or are flat.
    double lipschitz() const {
        double l = 0.0;
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) l = std::max(l, std::abs(slope(i)));
        return l;
    }

    SampledFn with_values(std::vector<double> values) const {
        return SampledFn(nodes_, std::move(values), ext_);
    }

private:
    std::vector<double> nodes_;
    std::vector<double> values_;
    Extension ext_;
};

inline double interpolate(const SampledFn& f, double x) { return f(x); }

/// Closed interval [lo, hi].
struct Window {
    double lo;
    double hi;

    Window(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(lo_ <= hi_)) throw Error("window requires lo <= hi");
    }
    bool contains(double x) const { return x >= lo && x <= hi; }
    double width() const { return hi - lo; }
    Window shrunk(double by) const {
        if (2.0 * by > width()) throw Error("window empty after shrinking");
        return Window(lo + by, hi - by);
    }
};

/// Sample points of `w` used by the window norms: endpoints of w clipped to
/// the union of the domains, plus every node of either function inside w.
inline std::vector<double> window_samples(const SampledFn& f, const SampledFn& g, const Window& w) {
    double dom_lo = std::min(f.x_min(), g.x_min());
    double dom_hi = std::max(f.x_max(), g.x_max());
    double lo = std::max(w.lo, dom_lo);
    double hi = std::min(w.hi, dom_hi);
    if (lo > hi) throw Error("window outside domain");
    std::vector<double> xs{lo, hi};
    for (const SampledFn* h : {&f, &g})
        for (double x : h->nodes())
            if (x >= lo && x <= hi) xs.push_back(x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

/// max over window samples of |f - g|.
inline double sup_norm_window(const SampledFn& f, const SampledFn& g, const Window& w) {
    double m = 0.0;
    for (double x : window_samples(f, g, w)) m = std::max(m, std::abs(f(x) - g(x)));
    return m;
}

/// Nodes of `f` that lie in `w`, as indices [first, last).
inline std::pair<std::size_t, std::size_t> node_range(std::span<const double> nodes,
                                                      const Window& w) {
    auto lo = std::lower_bound(nodes.begin(), nodes.end(), w.lo);
    auto hi = std::upper_bound(nodes.begin(), nodes.end(), w.hi);
    return {static_cast<std::size_t>(lo - nodes.begin()),
            static_cast<std::size_t>(hi - nodes.begin())};
}

}  // namespace hjlab

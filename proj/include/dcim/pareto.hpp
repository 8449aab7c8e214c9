#pragma once

// Pareto dominance, non-dominated sorting, crowding distance and exact
// hypervolume. Every objective is minimized; throughput enters negated.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "dcim/costmodel.hpp"

namespace dcim::dse {

inline constexpr std::size_t objective_count = 4;
using Objectives = std::array<double, objective_count>;

inline Objectives objectives(const CostVector& v) { return {v.area, v.delay, v.energy, -v.throughput}; }

inline CostVector from_objectives(const Objectives& o) { return {o[0], o[1], o[2], -o[3]}; }

// u dominates v: no worse everywhere, strictly better somewhere.
template <std::size_t M>
bool dominates(const std::array<double, M>& u, const std::array<double, M>& v) {
    bool strictly = false;
    for (std::size_t i = 0; i < M; ++i) {
        if (u[i] > v[i]) return false;
        if (u[i] < v[i]) strictly = true;
    }
    return strictly;
}

inline bool dominates(const CostVector& u, const CostVector& v) { return dominates(objectives(u), objectives(v)); }

// Deb's fast non-dominated sort. Fronts hold indices into `points`, each
// front in ascending index order.
template <std::size_t M>
std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const std::array<double, M>> points) {
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    if (n == 0) return fronts;

    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(points[p], points[q])) dominated_by[p].push_back(q);
            else if (dominates(points[q], points[p])) ++count[p];
        }
        if (count[p] == 0) current.push_back(p);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto p : current)
            for (auto q : dominated_by[p])
                if (--count[q] == 0) next.push_back(q);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

inline std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const CostVector> points) {
    std::vector<Objectives> objs;
    objs.reserve(points.size());
    for (const auto& p : points) objs.push_back(objectives(p));
    return fast_nondominated_sort<objective_count>(std::span<const Objectives>(objs));
}

// Boundary points of each objective get +inf; interior points sum the
// neighbour gap normalized by the objective's range. Zero-range objectives
// contribute nothing.
template <std::size_t M>
std::vector<double> crowding_distance(std::span<const std::array<double, M>> front) {
    const std::size_t n = front.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    std::vector<std::size_t> order(n);
    for (std::size_t m = 0; m < M; ++m) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return front[a][m] < front[b][m]; });
        const double lo = front[order.front()][m];
        const double hi = front[order.back()][m];
        const double range = hi - lo;
        if (!(range > 0)) continue;
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (std::isinf(dist[order[i]])) continue;
            dist[order[i]] += (front[order[i + 1]][m] - front[order[i - 1]][m]) / range;
        }
    }
    return dist;
}

inline std::vector<double> crowding_distance(std::span<const CostVector> front) {
    std::vector<Objectives> objs;
    objs.reserve(front.size());
    for (const auto& p : front) objs.push_back(objectives(p));
    return crowding_distance<objective_count>(std::span<const Objectives>(objs));
}

// ---------------------------------------------------------------------------
// hypervolume

namespace detail {

using Point = std::vector<double>;

inline std::vector<Point> nondominated_only(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<Point> keep;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
            if (i == j) continue;
            bool le = true, lt = false;
            for (std::size_t d = 0; d < pts[i].size(); ++d) {
                if (pts[j][d] > pts[i][d]) le = false;
                if (pts[j][d] < pts[i][d]) lt = true;
            }
            dominated = le && lt;
        }
        if (!dominated) keep.push_back(pts[i]);
    }
    return keep;
}

// Exact hypervolume by slicing along the last coordinate; 2-D base case is a sweep.
inline double hv_slice(std::vector<Point> pts, const Point& ref) {
    const std::size_t d = ref.size();
    if (pts.empty()) return 0.0;
    if (d == 1) {
        double best = pts.front()[0];
        for (const auto& p : pts) best = std::min(best, p[0]);
        return ref[0] - best;
    }
    if (d == 2) {
        std::sort(pts.begin(), pts.end());
        double volume = 0.0;
        double y_bound = ref[1];
        for (const auto& p : pts) {
            if (p[1] < y_bound) {
                volume += (ref[0] - p[0]) * (y_bound - p[1]);
                y_bound = p[1];
            }
        }
        return volume;
    }
    pts = nondominated_only(std::move(pts));
    std::sort(pts.begin(), pts.end(), [&](const Point& a, const Point& b) { return a[d - 1] < b[d - 1]; });
    const Point sub_ref(ref.begin(), ref.end() - 1);
    double volume = 0.0;
    std::vector<Point> prefix;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        prefix.emplace_back(pts[i].begin(), pts[i].end() - 1);
        const double upper = i + 1 < pts.size() ? pts[i + 1][d - 1] : ref[d - 1];
        const double depth = upper - pts[i][d - 1];
        if (depth > 0) volume += depth * hv_slice(prefix, sub_ref);
    }
    return volume;
}

}  // namespace detail

// Points that do not strictly dominate the reference are dropped.
template <std::size_t M>
double hypervolume(std::span<const std::array<double, M>> front, const std::array<double, M>& reference) {
    std::vector<detail::Point> pts;
    for (const auto& p : front) {
        bool inside = true;
        for (std::size_t i = 0; i < M; ++i) inside = inside && p[i] < reference[i];
        if (inside) pts.emplace_back(p.begin(), p.end());
    }
    return detail::hv_slice(std::move(pts), detail::Point(reference.begin(), reference.end()));
}

inline double hypervolume(std::span<const CostVector> front, const CostVector& reference) {
    std::vector<Objectives> objs;
    for (const auto& p : front) objs.push_back(objectives(p));
    return hypervolume<objective_count>(std::span<const Objectives>(objs), objectives(reference));
}

// Worst value per objective over all fronts pushed out by 10% of the range
// (or 10% of magnitude, or 1, for degenerate ranges).
inline CostVector reference_point(std::span<const CostVector> points) {
    Objectives lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (const auto& p : points) {
        const auto o = objectives(p);
        for (std::size_t i = 0; i < objective_count; ++i) {
            lo[i] = std::min(lo[i], o[i]);
            hi[i] = std::max(hi[i], o[i]);
        }
    }
    Objectives ref;
    for (std::size_t i = 0; i < objective_count; ++i) {
        double margin = 0.1 * (hi[i] - lo[i]);
        if (!(margin > 0)) margin = std::abs(hi[i]) > 0 ? 0.1 * std::abs(hi[i]) : 1.0;
        ref[i] = hi[i] + margin;
    }
    return from_objectives(ref);
}

}  // namespace dcim::dse

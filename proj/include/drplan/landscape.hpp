#pragma once

// Loss-landscape sweeps over one block's shift, optimizer-trajectory
// capture, and gradient-norm traces.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "drplan/grid.hpp"
#include "drplan/planner.hpp"

namespace drplan {

/// Tabulated loss over a 2D sweep of one block's shift.
struct LandscapeGrid {
    int block = 1;  // 1-based transfer step index
    double sx_min = 0.0, sy_min = 0.0;
    double step = 1.0;
    int nx = 0, ny = 0;
    std::vector<double> loss;  // row-major over (sy, sx)

    Vec2 v_final{0.0, 0.0};
    Vec2i a_final{0, 0};
    std::vector<Vec2> trajectory;  // continuous v of this block, first <= 100 epochs
    bool has_trajectory = false;
    bool clamped = false;  // requested range exceeded the array extent

    double sx(int ix) const { return sx_min + step * ix; }
    double sy(int iy) const { return sy_min + step * iy; }
    double& at(int iy, int ix) { return loss[static_cast<std::size_t>(iy) * nx + ix]; }
    double at(int iy, int ix) const { return loss[static_cast<std::size_t>(iy) * nx + ix]; }
};

namespace detail {

inline std::vector<Vec2i> rounded_shifts(const std::vector<Vec2>& trained_v) {
    std::vector<Vec2i> s;
    s.reserve(trained_v.size());
    for (const Vec2& v : trained_v) s.push_back(ste_round(v));
    return s;
}

inline void check_block(const std::vector<Vec2>& trained_v, int block) {
    if (block < 1 || block > static_cast<int>(trained_v.size()))
        throw std::invalid_argument("landscape: block index out of range");
}

// Runs fn(iy) over [0, ny); sweep rows are independent, so results do not
// depend on jobs.
template <typename Fn>
inline void sweep_rows(int ny, int jobs, Fn fn) {
    if (jobs <= 1) {
        for (int iy = 0; iy < ny; ++iy) fn(iy);
        return;
    }
    std::vector<std::thread> pool;
    const int n = std::min(jobs, ny);
    for (int t = 0; t < n; ++t)
        pool.emplace_back([&, t] {
            for (int iy = t; iy < ny; iy += n) fn(iy);
        });
    for (std::thread& th : pool) th.join();
}

}  // namespace detail

/// Integer-plan loss (residual defect count) with every block except
/// `block` held at its trained rounded shift.
inline long long integer_plan_loss(const ChipArray& donor, const ChipArray& target,
                                   const std::vector<Vec2>& trained_v, int block, Vec2i s) {
    detail::check_block(trained_v, block);
    std::vector<Vec2i> shifts = detail::rounded_shifts(trained_v);
    shifts[static_cast<std::size_t>(block - 1)] = s;
    return defect_count(execute_plan(donor, target, shifts).target_final);
}

/// Continuous-surrogate loss: block `block` is applied at the real-valued
/// shift w (no rounding), all other blocks at their trained rounded
/// shifts; returns the residual defect mass sum(1 - c2) on the target.
inline double surrogate_loss(const ChipArray& donor, const ChipArray& target,
                             const std::vector<Vec2>& trained_v, int block, Vec2 w,
                             CubicKernel kern = {}) {
    detail::check_block(trained_v, block);
    const int T = static_cast<int>(trained_v.size());
    Grid c1 = to_grid(donor);
    Grid c2 = to_grid(target);
    for (int t = 1; t <= T; ++t) {
        const bool swept = (t == block);
        const Vec2i a = ste_round(trained_v[static_cast<std::size_t>(t - 1)]);
        const Vec2 shift = swept ? w : Vec2{static_cast<double>(a.x), static_cast<double>(a.y)};
        auto [c1n, c2n] =
            transfer_module_forward(c1, c2, shift, /*rounded=*/!swept, nullptr, kern);
        c1 = std::move(c1n);
        c2 = std::move(c2n);
    }
    double mass = 0.0;
    for (double v : c2.cells) mass += 1.0 - v;
    return mass;
}

/// Full-range integer sweep of one block (all others at trained values).
inline LandscapeGrid sweep_global(const ChipArray& donor, const ChipArray& target,
                                  const std::vector<Vec2>& trained_v, int block, int range,
                                  int jobs = 1) {
    detail::check_block(trained_v, block);
    const int limit =
        std::max(std::max(donor.width, donor.height), std::max(target.width, target.height)) - 1;
    LandscapeGrid g;
    g.block = block;
    g.clamped = range > limit;
    const int r = std::min(range, limit);
    if (r < 0) throw std::invalid_argument("sweep_global: range must be >= 0");
    g.sx_min = -r;
    g.sy_min = -r;
    g.step = 1.0;
    g.nx = g.ny = 2 * r + 1;
    g.loss.resize(static_cast<std::size_t>(g.nx) * g.ny);
    g.v_final = trained_v[static_cast<std::size_t>(block - 1)];
    g.a_final = ste_round(g.v_final);

    const std::vector<Vec2i> base = detail::rounded_shifts(trained_v);
    detail::sweep_rows(g.ny, jobs, [&](int iy) {
        std::vector<Vec2i> shifts = base;
        for (int ix = 0; ix < g.nx; ++ix) {
            shifts[static_cast<std::size_t>(block - 1)] = {ix - r, iy - r};
            g.at(iy, ix) = static_cast<double>(
                defect_count(execute_plan(donor, target, shifts).target_final));
        }
    });
    return g;
}

/// Fine-grained continuous-surrogate sweep around the trained shift of
/// one block, with the optimizer trajectory attached when available.
inline LandscapeGrid sweep_local(const ChipArray& donor, const ChipArray& target,
                                 const std::vector<Vec2>& trained_v, int block,
                                 double window = 3.0, double resolution = 0.1,
                                 const TraceLog* trace = nullptr, CubicKernel kern = {},
                                 int jobs = 1) {
    detail::check_block(trained_v, block);
    if (!(window > 0.0) || !(resolution > 0.0))
        throw std::invalid_argument("sweep_local: window and resolution must be positive");
    const int T = static_cast<int>(trained_v.size());
    const Vec2 center = trained_v[static_cast<std::size_t>(block - 1)];
    const int half = static_cast<int>(std::lround(window / resolution));

    LandscapeGrid g;
    g.block = block;
    g.sx_min = center.x - half * resolution;
    g.sy_min = center.y - half * resolution;
    g.step = resolution;
    g.nx = g.ny = 2 * half + 1;
    g.loss.resize(static_cast<std::size_t>(g.nx) * g.ny);
    g.v_final = center;
    g.a_final = ste_round(center);

    // blocks before the swept one do not depend on it: run them once
    Grid c1 = to_grid(donor);
    Grid c2 = to_grid(target);
    for (int t = 1; t < block; ++t) {
        auto [c1n, c2n] = transfer_module_forward(
            c1, c2, trained_v[static_cast<std::size_t>(t - 1)], /*rounded=*/true, nullptr, kern);
        c1 = std::move(c1n);
        c2 = std::move(c2n);
    }
    detail::sweep_rows(g.ny, jobs, [&](int iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            const Vec2 w{g.sx(ix), g.sy(iy)};
            auto [c1b, c2b] = transfer_module_forward(c1, c2, w, /*rounded=*/false, nullptr, kern);
            for (int t = block + 1; t <= T; ++t) {
                auto [c1n, c2n] =
                    transfer_module_forward(std::move(c1b), c2b,
                                            trained_v[static_cast<std::size_t>(t - 1)],
                                            /*rounded=*/true, nullptr, kern);
                c1b = std::move(c1n);
                c2b = std::move(c2n);
            }
            double mass = 0.0;
            for (double v : c2b.cells) mass += 1.0 - v;
            g.at(iy, ix) = mass;
        }
    });

    if (trace != nullptr && !trace->records.empty() &&
        trace->records.front().v.size() >= static_cast<std::size_t>(block)) {
        g.has_trajectory = true;
        const std::size_t n = std::min<std::size_t>(trace->records.size(), 100);
        g.trajectory.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            g.trajectory.push_back(trace->records[i].v[static_cast<std::size_t>(block - 1)]);
    }
    return g;
}

// ------------------------------------------------------------------
// Gradient traces
// ------------------------------------------------------------------

struct GradTracePoint {
    int epoch = 0;
    double shift_norm = 0.0;
    double grad_norm = 0.0;
};

struct GradTraceSeries {
    int block = 1;
    std::vector<GradTracePoint> points;
};

/// Per-block Euclidean norms of the shift vector and its gradient, one
/// point per executed optimization iteration.
inline std::vector<GradTraceSeries> grad_trace(const TraceLog& trace) {
    std::vector<GradTraceSeries> out;
    if (trace.records.empty()) return out;
    const std::size_t T = trace.records.front().v.size();
    out.resize(T);
    for (std::size_t b = 0; b < T; ++b) {
        out[b].block = static_cast<int>(b) + 1;
        out[b].points.reserve(trace.records.size());
    }
    for (const TraceRecord& r : trace.records)
        for (std::size_t b = 0; b < T; ++b)
            out[b].points.push_back({r.epoch, std::hypot(r.v[b].x, r.v[b].y),
                                     std::hypot(r.grad[b].x, r.grad[b].y)});
    return out;
}

}  // namespace drplan

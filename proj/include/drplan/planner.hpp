#pragma once

// Stacked repair model, losses, Adam-driven optimization of the shift
// sequence, the adaptive step-count loop, and a pure-integer executor.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "drplan/adam.hpp"
#include "drplan/grid.hpp"
#include "drplan/transfer.hpp"

namespace drplan {

struct PlanConfig {
    int t_max = 100;       // maximum transfer steps tried by the adaptive loop
    int n_iter = 500;      // optimization iterations per step count
    double eps = 1e-6;     // convergence threshold on residual defect count
    int t_start = 3;       // initial module count
    int t1 = 0;            // early-completion horizon; 0 means "equal to T"
    double lambda1 = 0.5;  // discount on repairs after the horizon
    double lambda2 = 0.0;  // movement-penalty weight
    double lr = 0.1;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    bool stop_on_zero = true;  // stop a fixed-T run once the plan repairs everything

    void validate() const {
        if (t_start < 1) throw std::invalid_argument("PlanConfig: t_start must be >= 1");
        if (t_max < t_start) throw std::invalid_argument("PlanConfig: t_max must be >= t_start");
        if (n_iter < 1 || n_iter > 1000)
            throw std::invalid_argument("PlanConfig: n_iter must lie in [1, 1000]");
        if (!(eps > 0.0)) throw std::invalid_argument("PlanConfig: eps must be positive");
        if (t1 < 0) throw std::invalid_argument("PlanConfig: t1 must be >= 0");
        if (lambda1 < 0.0 || lambda1 >= 1.0)
            throw std::invalid_argument("PlanConfig: lambda1 must lie in [0, 1)");
        if (lambda2 < 0.0) throw std::invalid_argument("PlanConfig: lambda2 must be >= 0");
        if (!(lr > 0.0)) throw std::invalid_argument("PlanConfig: lr must be positive");
        if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0)
            throw std::invalid_argument("PlanConfig: Adam betas must lie in [0, 1)");
        if (!(adam_eps > 0.0)) throw std::invalid_argument("PlanConfig: adam_eps must be positive");
    }
    int horizon(int T) const { return t1 == 0 ? T : std::min(t1, T); }
};

/// Ordered integer shift sequence with per-step transfer counts.
struct RepairPlan {
    std::vector<Vec2i> shifts;
    std::vector<long long> per_step_transfers;
    long long residual_defects = 0;
    int effective_steps = 0;  // steps that moved at least one chip
    int raw_t = 0;
    bool complete = false;
    double wall_time_s = 0.0;
    std::string method = "drp";
    int donor_width = 0, donor_height = 0;
    int target_width = 0, target_height = 0;
    PlanConfig config;
};

struct TraceRecord {
    int epoch = 0;
    double loss = 0.0;
    long long residual = 0;
    std::vector<Vec2> v;
    std::vector<Vec2> grad;
};

struct TraceLog {
    std::vector<TraceRecord> records;
};

// ------------------------------------------------------------------
// Forward model and losses
// ------------------------------------------------------------------

struct RepairOutputs {
    Grid c1_final;
    Grid c2_final;
    Grid c2_horizon;  // target state after step t1; empty when t1 == T (use c2_final)
};

/// Applies T transfer modules in sequence (STE-rounded actuation).
inline RepairOutputs repair_forward(const Grid& c1, const Grid& c2,
                                    const std::vector<ShiftParam>& params, int t1,
                                    GradTape* tape, CubicKernel kern = {}) {
    const int T = static_cast<int>(params.size());
    if (T < 1) throw std::invalid_argument("repair_forward: need at least one module");
    if (t1 < 1 || t1 > T) throw std::invalid_argument("repair_forward: t1 out of range");
    RepairOutputs out{c1, c2, {}};
    for (int t = 1; t <= T; ++t) {
        auto [c1n, c2n] =
            transfer_module_forward(std::move(out.c1_final), out.c2_final, params[t - 1].v,
                                    /*rounded=*/true, tape, kern);
        out.c1_final = std::move(c1n);
        out.c2_final = std::move(c2n);
        if (t == t1 && t1 < T) out.c2_horizon = out.c2_final;
    }
    return out;
}

/// Negated count of populated target sites, discounted after the
/// early-completion horizon:
///   -(sum c2_horizon + lambda1 * (c2_final - c2_horizon)).
inline double coverage_loss(const RepairOutputs& out, int T, int t1, double lambda1) {
    double acc = 0.0;
    if (t1 >= T) {
        for (double v : out.c2_final.cells) acc += v;
    } else {
        for (std::size_t i = 0; i < out.c2_final.cells.size(); ++i) {
            const double h = out.c2_horizon.cells[i];
            acc += h + lambda1 * (out.c2_final.cells[i] - h);
        }
    }
    return -acc;
}

/// lambda2-weighted sum of L1 norms of consecutive shift differences.
inline double movement_penalty(const std::vector<ShiftParam>& params, double lambda2) {
    double acc = 0.0;
    for (std::size_t t = 1; t < params.size(); ++t)
        acc += std::abs(params[t].v.x - params[t - 1].v.x) +
               std::abs(params[t].v.y - params[t - 1].v.y);
    return lambda2 * acc;
}

namespace detail {

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline void add_movement_penalty_grad(const std::vector<ShiftParam>& params, double lambda2,
                                      std::vector<Vec2>& grads) {
    if (lambda2 == 0.0) return;
    for (std::size_t t = 0; t < params.size(); ++t) {
        Vec2 g{0.0, 0.0};
        if (t > 0) {
            g.x += sgn(params[t].v.x - params[t - 1].v.x);
            g.y += sgn(params[t].v.y - params[t - 1].v.y);
        }
        if (t + 1 < params.size()) {
            g.x -= sgn(params[t + 1].v.x - params[t].v.x);
            g.y -= sgn(params[t + 1].v.y - params[t].v.y);
        }
        grads[t].x += lambda2 * g.x;
        grads[t].y += lambda2 * g.y;
    }
}

}  // namespace detail

/// Reverse pass through the whole stack; returns d(loss)/d(v) per block
/// for the coverage loss (movement penalty handled separately).
inline std::vector<Vec2> repair_backward(GradTape& tape, Frame donor_frame, Frame target_frame,
                                         int T, int t1, double lambda1) {
    Grid up_c1(donor_frame, 0.0);
    const double final_coef = (t1 < T) ? -lambda1 : -1.0;
    Grid up_c2(target_frame, 0.0, final_coef);
    std::vector<Vec2> grads(static_cast<std::size_t>(T));
    for (int t = T; t >= 1; --t) {
        if (t1 < T && t == t1) up_c2.add_scalar(-(1.0 - lambda1));
        ModuleGrads mg = transfer_module_backward(tape, up_c1, up_c2);
        grads[static_cast<std::size_t>(t - 1)] = mg.grad_v;
        up_c1 = std::move(mg.grad_c1);
        up_c2 = std::move(mg.grad_c2);
    }
    return grads;
}

// ------------------------------------------------------------------
// Fixed-T optimization
// ------------------------------------------------------------------

struct FixedTResult {
    long long best_residual = 0;  // rounded-plan defect count of the best iterate
    std::vector<Vec2> best_v;
    int best_iter = 0;
    int iters_executed = 0;  // gradient steps actually taken
    TraceLog trace;
    double wall_time_s = 0.0;
};

/// Runs up to n_iter Adam steps on the coverage loss plus movement
/// penalty, starting from all-zero shifts. Every iterate's rounded plan
/// is evaluated and the lowest residual defect count seen is kept.
inline FixedTResult optimize_fixed_T(const ChipArray& donor, const ChipArray& target, int T,
                                     const PlanConfig& cfg, CubicKernel kern = {}) {
    cfg.validate();
    if (T < 1) throw std::invalid_argument("optimize_fixed_T: T must be >= 1");
    const auto t_begin = std::chrono::steady_clock::now();
    const Grid c1 = to_grid(donor);
    const Grid c2 = to_grid(target);
    const int t1 = cfg.horizon(T);

    std::vector<ShiftParam> params(static_cast<std::size_t>(T));
    Adam opt(static_cast<std::size_t>(T) * 2, {cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});

    FixedTResult res;
    res.best_residual = std::numeric_limits<long long>::max();
    GradTape tape;
    std::vector<double> flat_v(static_cast<std::size_t>(T) * 2, 0.0);
    std::vector<double> flat_g(static_cast<std::size_t>(T) * 2, 0.0);

    for (int iter = 0;; ++iter) {
        tape.reset();
        const RepairOutputs out = repair_forward(c1, c2, params, t1, &tape, kern);
        const long long residual = binary_defect_count(out.c2_final);
        if (residual < res.best_residual) {
            res.best_residual = residual;
            res.best_iter = iter;
            res.best_v.resize(params.size());
            for (std::size_t i = 0; i < params.size(); ++i) res.best_v[i] = params[i].v;
        }
        if (cfg.stop_on_zero && residual == 0) break;
        if (iter == cfg.n_iter) break;

        const double loss = coverage_loss(out, T, t1, cfg.lambda1) +
                            movement_penalty(params, cfg.lambda2);
        if (!std::isfinite(loss))
            throw std::runtime_error("optimize_fixed_T: non-finite loss at iteration " +
                                     std::to_string(iter) + " (T=" + std::to_string(T) + ")");
        std::vector<Vec2> grads =
            repair_backward(tape, c1.frame, c2.frame, T, t1, cfg.lambda1);
        detail::add_movement_penalty_grad(params, cfg.lambda2, grads);

        TraceRecord rec;
        rec.epoch = iter;
        rec.loss = loss;
        rec.residual = residual;
        rec.v.resize(params.size());
        rec.grad = grads;
        bool all_zero = true;
        for (std::size_t i = 0; i < params.size(); ++i) {
            rec.v[i] = params[i].v;
            params[i].grad = grads[i];
            if (grads[i].x != 0.0 || grads[i].y != 0.0) all_zero = false;
        }
        res.trace.records.push_back(std::move(rec));
        res.iters_executed = iter + 1;

        if (cfg.stop_on_zero && all_zero && opt.cold()) break;  // provably stationary

        for (std::size_t i = 0; i < params.size(); ++i) {
            flat_v[2 * i] = params[i].v.x;
            flat_v[2 * i + 1] = params[i].v.y;
            flat_g[2 * i] = grads[i].x;
            flat_g[2 * i + 1] = grads[i].y;
        }
        opt.step(flat_v, flat_g);
        for (std::size_t i = 0; i < params.size(); ++i)
            params[i].set({flat_v[2 * i], flat_v[2 * i + 1]});
    }

    res.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    return res;
}

// ------------------------------------------------------------------
// Pure-integer executor (ground truth)
// ------------------------------------------------------------------

struct ExecResult {
    ChipArray donor_final;
    ChipArray target_final;
    std::vector<long long> per_step_transfers;
};

namespace detail {

inline long long apply_shift(ChipArray& c1, ChipArray& c2, Vec2i s) {
    long long moved = 0;
    for (int i = 0; i < c2.height; ++i) {
        const int m = i - s.y;
        if (m < 0 || m >= c1.height) continue;
        for (int j = 0; j < c2.width; ++j) {
            if (c2.cell(i, j) != 0) continue;
            const int n = j - s.x;
            if (n < 0 || n >= c1.width) continue;
            if (c1.cell(m, n) == 1) {
                c1.cell(m, n) = 0;
                c2.cell(i, j) = 1;
                ++moved;
            }
        }
    }
    return moved;
}

}  // namespace detail

/// Replays integer shifts with the plain swap rule; no interpolation.
inline ExecResult execute_plan(const ChipArray& c1, const ChipArray& c2,
                               const std::vector<Vec2i>& shifts) {
    ExecResult r{c1, c2, {}};
    r.per_step_transfers.reserve(shifts.size());
    for (const Vec2i& s : shifts)
        r.per_step_transfers.push_back(detail::apply_shift(r.donor_final, r.target_final, s));
    return r;
}

// ------------------------------------------------------------------
// Adaptive step-count loop
// ------------------------------------------------------------------

struct AdaptiveResult {
    RepairPlan plan;
    std::vector<Vec2> v_star;  // continuous shifts behind the returned plan
    TraceLog trace;            // trace of the returned plan's training run
};

/// Grows T from t_start until a plan with residual defect count below
/// eps is found (or t_max is exhausted, returning the best partial plan
/// flagged incomplete). A defect-free target short-circuits to an empty
/// plan.
inline AdaptiveResult adaptive_plan(const ChipArray& donor, const ChipArray& target,
                                    const PlanConfig& cfg, CubicKernel kern = {}) {
    cfg.validate();
    const auto t_begin = std::chrono::steady_clock::now();
    AdaptiveResult res;
    RepairPlan& plan = res.plan;
    plan.method = "drp";
    plan.config = cfg;
    plan.donor_width = donor.width;
    plan.donor_height = donor.height;
    plan.target_width = target.width;
    plan.target_height = target.height;

    if (defect_count(target) == 0) {
        plan.complete = true;
        plan.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
        return res;
    }

    long long best_residual = std::numeric_limits<long long>::max();
    int best_t = 0;
    for (int T = cfg.t_start; T <= cfg.t_max; ++T) {
        FixedTResult r = optimize_fixed_T(donor, target, T, cfg, kern);
        if (r.best_residual < best_residual) {
            best_residual = r.best_residual;
            best_t = T;
            res.v_star = std::move(r.best_v);
            res.trace = std::move(r.trace);
        }
        if (static_cast<double>(best_residual) < cfg.eps) break;
    }

    plan.raw_t = best_t;
    plan.shifts.reserve(res.v_star.size());
    for (const Vec2& v : res.v_star) plan.shifts.push_back(ste_round(v));
    ExecResult exec = execute_plan(donor, target, plan.shifts);
    plan.per_step_transfers = std::move(exec.per_step_transfers);
    plan.residual_defects = defect_count(exec.target_final);
    if (plan.residual_defects != best_residual)
        throw std::logic_error("adaptive_plan: executor disagrees with the trained model");
    for (long long n : plan.per_step_transfers) plan.effective_steps += (n >= 1);
    plan.complete = static_cast<double>(plan.residual_defects) < cfg.eps;
    plan.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    return res;
}

}  // namespace drplan

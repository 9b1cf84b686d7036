#pragma once

// Seeded benchmark harness: paired repair-step statistics for the
// differentiable planner and the greedy baseline over matched instances.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "drplan/grid.hpp"
#include "drplan/lps.hpp"
#include "drplan/planner.hpp"

namespace drplan {

struct BenchCondition {
    int size = 50;
    double d1 = 0.1;
    double d2 = 0.05;
};

/// Reference step counts from the published comparison table; the RL
/// column is never recomputed here.
struct ReferenceRow {
    int size;
    double d1, d2;
    double drp, lps, rl;
};

inline constexpr ReferenceRow kReferenceSteps[] = {
    {50, 0.10, 0.05, 3.0, 3.0, 3.4},   {50, 0.35, 0.05, 5.0, 5.9, 7.4},
    {50, 0.60, 0.05, 7.1, 10.6, 16.2}, {100, 0.10, 0.05, 3.0, 3.6, 3.0},
    {100, 0.35, 0.05, 5.1, 7.1, 9.3},  {100, 0.60, 0.05, 11.1, 14.4, 18.4},
    {500, 0.10, 0.05, 4.0, 5.4, 5.3},  {500, 0.35, 0.05, 8.1, 10.9, 12.3},
    {500, 0.60, 0.05, 18.0, 22.8, 25.1},
};

inline const ReferenceRow* published_reference(int size, double d1, double d2) {
    for (const ReferenceRow& r : kReferenceSteps)
        if (r.size == size && std::abs(r.d1 - d1) < 1e-9 && std::abs(r.d2 - d2) < 1e-9)
            return &r;
    return nullptr;
}

struct TrialOutcome {
    int steps = 0;  // effective steps for DRP, executed shifts for LPS
    int raw_t = 0;
    long long residual = 0;
    bool complete = false;
    double wall_time_s = 0.0;
};

struct BenchTrial {
    int index = 0;
    std::uint64_t seed = 0;
    std::optional<TrialOutcome> drp;
    std::optional<TrialOutcome> lps;
};

struct MethodAggregate {
    int trials = 0;
    int completed = 0;
    double mean_steps = 0.0;
    double std_steps = 0.0;  // sample standard deviation
    double mean_wall_s = 0.0;
    double std_wall_s = 0.0;
};

struct BenchReport {
    BenchCondition condition;
    int trials = 0;
    bool run_drp = false;
    bool run_lps = false;
    PlanConfig config;
    std::vector<BenchTrial> per_trial;
    std::optional<MethodAggregate> drp_agg;
    std::optional<MethodAggregate> lps_agg;
    const ReferenceRow* reference = nullptr;
};

namespace detail {

template <typename Get>
inline MethodAggregate aggregate(const std::vector<BenchTrial>& trials, Get get) {
    MethodAggregate a;
    double sum = 0.0, sum_w = 0.0;
    for (const BenchTrial& t : trials) {
        const TrialOutcome& o = get(t);
        ++a.trials;
        a.completed += o.complete;
        sum += o.steps;
        sum_w += o.wall_time_s;
    }
    if (a.trials == 0) return a;
    a.mean_steps = sum / a.trials;
    a.mean_wall_s = sum_w / a.trials;
    if (a.trials > 1) {
        double acc = 0.0, acc_w = 0.0;
        for (const BenchTrial& t : trials) {
            const TrialOutcome& o = get(t);
            acc += (o.steps - a.mean_steps) * (o.steps - a.mean_steps);
            acc_w += (o.wall_time_s - a.mean_wall_s) * (o.wall_time_s - a.mean_wall_s);
        }
        a.std_steps = std::sqrt(acc / (a.trials - 1));
        a.std_wall_s = std::sqrt(acc_w / (a.trials - 1));
    }
    return a;
}

}  // namespace detail

/// Runs `trials` seeded instances of one condition; every requested
/// method sees the same instances. Incomplete repairs are recorded, not
/// dropped. `jobs` parallelizes across trials only.
inline BenchReport bench_condition(const BenchCondition& cond, int trials,
                                   const std::vector<std::string>& methods,
                                   const PlanConfig& cfg, int jobs = 1) {
    cfg.validate();
    if (trials < 1) throw std::invalid_argument("bench_condition: trials must be >= 1");
    if (cond.size < 1 || cond.d1 < 0.0 || cond.d1 > 1.0 || cond.d2 < 0.0 || cond.d2 > 1.0)
        throw std::invalid_argument("bench_condition: invalid condition");
    BenchReport rep;
    rep.condition = cond;
    rep.trials = trials;
    rep.config = cfg;
    for (const std::string& m : methods) {
        if (m == "drp")
            rep.run_drp = true;
        else if (m == "lps")
            rep.run_lps = true;
        else
            throw std::invalid_argument("bench_condition: unknown method '" + m + "'");
    }
    if (!rep.run_drp && !rep.run_lps)
        throw std::invalid_argument("bench_condition: no methods requested");
    rep.reference = published_reference(cond.size, cond.d1, cond.d2);
    rep.per_trial.resize(static_cast<std::size_t>(trials));

    auto run_trial = [&](int k) {
        BenchTrial& trial = rep.per_trial[static_cast<std::size_t>(k)];
        trial.index = k;
        trial.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(k));
        const auto [donor, target] =
            generate_instance(InstanceSpec::square(cond.size, cond.d1, cond.d2, trial.seed));
        if (rep.run_drp) {
            const AdaptiveResult r = adaptive_plan(donor, target, cfg);
            trial.drp = TrialOutcome{r.plan.effective_steps, r.plan.raw_t,
                                     r.plan.residual_defects, r.plan.complete,
                                     r.plan.wall_time_s};
        }
        if (rep.run_lps) {
            const LpsResult r = lps_plan(donor, target, cfg);
            trial.lps = TrialOutcome{static_cast<int>(r.plan.shifts.size()), r.plan.raw_t,
                                     r.plan.residual_defects, r.plan.complete,
                                     r.plan.wall_time_s};
        }
    };

    if (jobs <= 1) {
        for (int k = 0; k < trials; ++k) run_trial(k);
    } else {
        std::vector<std::thread> pool;
        const int n = std::min(jobs, trials);
        for (int t = 0; t < n; ++t)
            pool.emplace_back([&, t] {
                for (int k = t; k < trials; k += n) run_trial(k);
            });
        for (std::thread& th : pool) th.join();
    }

    if (rep.run_drp)
        rep.drp_agg = detail::aggregate(rep.per_trial, [](const BenchTrial& t) -> const TrialOutcome& {
            return *t.drp;
        });
    if (rep.run_lps)
        rep.lps_agg = detail::aggregate(rep.per_trial, [](const BenchTrial& t) -> const TrialOutcome& {
            return *t.lps;
        });
    return rep;
}

}  // namespace drplan

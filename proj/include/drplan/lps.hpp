#pragma once

// Local proximity searching: greedy nearest-chip baseline planner.

#include <chrono>
#include <limits>
#include <utility>

#include "drplan/grid.hpp"
#include "drplan/planner.hpp"

namespace drplan {

struct LpsSelection {
    enum class Kind { kShift, kDone, kUnsolvable };
    Kind kind = Kind::kDone;
    Vec2i shift{0, 0};
    Vec2i target_site{0, 0};  // (x=col, y=row) of the selected empty site
    Vec2i donor_site{0, 0};   // (x=col, y=row) of the selected chip
};

/// Picks the first empty target site in row-major order and the donor
/// chip nearest to it by squared Euclidean distance (row-major
/// tie-break), returning the shift that lands the chip on the site.
inline LpsSelection lps_select(const ChipArray& c1, const ChipArray& c2) {
    LpsSelection sel;
    int ti = -1, tj = -1;
    for (int i = 0; i < c2.height && ti < 0; ++i)
        for (int j = 0; j < c2.width; ++j)
            if (c2.cell(i, j) == 0) {
                ti = i;
                tj = j;
                break;
            }
    if (ti < 0) return sel;  // kDone

    long long best = std::numeric_limits<long long>::max();
    int bk = -1, bl = -1;
    for (int k = 0; k < c1.height; ++k)
        for (int l = 0; l < c1.width; ++l) {
            if (c1.cell(k, l) != 1) continue;
            const long long dk = k - ti, dl = l - tj;
            const long long d2 = dk * dk + dl * dl;
            if (d2 < best) {
                best = d2;
                bk = k;
                bl = l;
            }
        }
    if (bk < 0) {
        sel.kind = LpsSelection::Kind::kUnsolvable;
        return sel;
    }
    sel.kind = LpsSelection::Kind::kShift;
    sel.target_site = {tj, ti};
    sel.donor_site = {bl, bk};
    sel.shift = {tj - bl, ti - bk};  // s = x2 - x1
    return sel;
}

struct LpsResult {
    RepairPlan plan;
    ChipArray donor_final;
    ChipArray target_final;
};

/// Repeatedly selects a shift and executes the full-array transfer at it
/// (repairing every coinciding defect) until the target is clean or no
/// donor chips remain.
inline LpsResult lps_plan(const ChipArray& c1, const ChipArray& c2,
                          const PlanConfig& cfg = {}) {
    const auto t_begin = std::chrono::steady_clock::now();
    LpsResult res{{}, c1, c2};
    RepairPlan& plan = res.plan;
    plan.method = "lps";
    plan.config = cfg;
    plan.donor_width = c1.width;
    plan.donor_height = c1.height;
    plan.target_width = c2.width;
    plan.target_height = c2.height;

    for (;;) {
        const LpsSelection sel = lps_select(res.donor_final, res.target_final);
        if (sel.kind == LpsSelection::Kind::kDone) {
            plan.complete = true;
            break;
        }
        if (sel.kind == LpsSelection::Kind::kUnsolvable) {
            plan.complete = false;
            break;
        }
        const long long moved =
            detail::apply_shift(res.donor_final, res.target_final, sel.shift);
        plan.shifts.push_back(sel.shift);
        plan.per_step_transfers.push_back(moved);
    }
    plan.raw_t = static_cast<int>(plan.shifts.size());
    for (long long n : plan.per_step_transfers) plan.effective_steps += (n >= 1);
    plan.residual_defects = defect_count(res.target_final);
    plan.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    return res;
}

}  // namespace drplan

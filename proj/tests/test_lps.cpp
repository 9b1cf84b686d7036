#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "drplan/grid.hpp"
#include "drplan/lps.hpp"

using namespace drplan;

namespace {

ChipArray random_chip(Rng& rng, int h, int w, std::uint8_t oob, double p_empty) {
    ChipArray a(h, w, oob, 0);
    for (auto& c : a.cells) c = rng.uniform() < p_empty ? 0 : 1;
    return a;
}

}  // namespace

TEST_CASE("lps_select: clean target is done") {
    ChipArray donor(3, 3, 0, 1);
    ChipArray target(3, 3, 1, 1);
    CHECK(lps_select(donor, target).kind == LpsSelection::Kind::kDone);
}

TEST_CASE("lps_select: unique candidate gives s = x2 - x1") {
    ChipArray donor(3, 3, 0, 0);
    donor.cell(0, 0) = 1;
    ChipArray target(3, 3, 1, 1);
    target.cell(1, 1) = 0;
    const LpsSelection sel = lps_select(donor, target);
    REQUIRE(sel.kind == LpsSelection::Kind::kShift);
    CHECK(sel.shift == Vec2i{1, 1});
    CHECK(sel.target_site == Vec2i{1, 1});
    CHECK(sel.donor_site == Vec2i{0, 0});
}

TEST_CASE("lps_select: equidistant chips break ties in row-major order") {
    // defect at (0,0); chips at (0,1) and (1,0) are both at squared distance 1.
    // enumerating candidates: (0,1) precedes (1,0) row-major, so the shift is (-1, 0).
    ChipArray donor(3, 3, 0, 0);
    donor.cell(0, 1) = 1;
    donor.cell(1, 0) = 1;
    ChipArray target(3, 3, 1, 1);
    target.cell(0, 0) = 0;
    const LpsSelection sel = lps_select(donor, target);
    REQUIRE(sel.kind == LpsSelection::Kind::kShift);
    CHECK(sel.donor_site == Vec2i{1, 0});  // (row 0, col 1)
    CHECK(sel.shift == Vec2i{-1, 0});
}

TEST_CASE("lps_select: first empty site is chosen row-major") {
    ChipArray donor(4, 4, 0, 1);
    ChipArray target(4, 4, 1, 1);
    target.cell(2, 3) = 0;
    target.cell(1, 1) = 0;
    const LpsSelection sel = lps_select(donor, target);
    REQUIRE(sel.kind == LpsSelection::Kind::kShift);
    CHECK(sel.target_site == Vec2i{1, 1});
}

TEST_CASE("lps_select: defects without chips are unsolvable") {
    ChipArray donor(2, 2, 0, 0);
    ChipArray target(2, 2, 1, 0);
    CHECK(lps_select(donor, target).kind == LpsSelection::Kind::kUnsolvable);
}

TEST_CASE("lps_plan: zero-defect target yields an empty complete plan") {
    ChipArray donor(4, 4, 0, 1);
    ChipArray target(4, 4, 1, 1);
    const LpsResult r = lps_plan(donor, target);
    CHECK(r.plan.complete);
    CHECK(r.plan.shifts.empty());
    CHECK(r.plan.residual_defects == 0);
}

TEST_CASE("lps_plan: each step repairs at least one defect and the loop terminates") {
    Rng rng(2025);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = rng.uniform_int(5, 24);
        ChipArray donor = random_chip(rng, n, n, 0, rng.uniform(0.1, 0.7));
        ChipArray target = random_chip(rng, n, n, 1, rng.uniform(0.05, 0.4));
        const long long defects0 = defect_count(target);
        const LpsResult r = lps_plan(donor, target);
        CHECK(static_cast<long long>(r.plan.shifts.size()) <= defects0);
        for (long long moved : r.plan.per_step_transfers) CHECK(moved >= 1);
        CHECK(r.plan.effective_steps == static_cast<int>(r.plan.shifts.size()));

        // replay reproduces the recorded final arrays bit-exactly
        const ExecResult replay = execute_plan(donor, target, r.plan.shifts);
        CHECK(replay.donor_final == r.donor_final);
        CHECK(replay.target_final == r.target_final);

        // chip count is conserved
        const long long chips_before =
            static_cast<long long>(donor.cells.size()) - defect_count(donor) +
            static_cast<long long>(target.cells.size()) - defect_count(target);
        const long long chips_after =
            static_cast<long long>(r.donor_final.cells.size()) - defect_count(r.donor_final) +
            static_cast<long long>(r.target_final.cells.size()) - defect_count(r.target_final);
        CHECK(chips_before == chips_after);

        if (defect_count(donor) == 0 || r.plan.complete) {
            CHECK(r.plan.residual_defects == (r.plan.complete ? 0 : defect_count(target)));
        }
    }
}

TEST_CASE("lps_plan: surplus donor repairs everything") {
    Rng rng(606);
    ChipArray donor(10, 10, 0, 1);  // full donor
    ChipArray target = random_chip(rng, 10, 10, 1, 0.3);
    const LpsResult r = lps_plan(donor, target);
    CHECK(r.plan.complete);
    CHECK(r.plan.residual_defects == 0);
    CHECK(defect_count(r.target_final) == 0);
}

TEST_CASE("lps_plan: unsolvable instances return a flagged partial plan") {
    ChipArray donor(3, 3, 0, 0);
    donor.cell(0, 0) = 1;
    ChipArray target(3, 3, 1, 1);
    target.cell(1, 1) = 0;
    target.cell(2, 2) = 0;
    const LpsResult r = lps_plan(donor, target);
    CHECK_FALSE(r.plan.complete);
    CHECK(r.plan.residual_defects == 1);
    CHECK(r.plan.shifts.size() == 1);
}

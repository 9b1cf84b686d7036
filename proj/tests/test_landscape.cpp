#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "drplan/grid.hpp"
#include "drplan/landscape.hpp"
#include "drplan/planner.hpp"

using namespace drplan;

namespace {

ChipArray random_chip(Rng& rng, int h, int w, std::uint8_t oob, double p_empty) {
    ChipArray a(h, w, oob, 0);
    for (auto& c : a.cells) c = rng.uniform() < p_empty ? 0 : 1;
    return a;
}

}  // namespace

TEST_CASE("global sweep: empty donor gives a constant grid at the initial defect count") {
    ChipArray donor(8, 8, 0, 0);
    Rng rng(4);
    ChipArray target = random_chip(rng, 8, 8, 1, 0.3);
    const std::vector<Vec2> trained{{0.0, 0.0}, {1.0, -1.0}};
    const LandscapeGrid g = sweep_global(donor, target, trained, 1, 7);
    const double expect = static_cast<double>(defect_count(target));
    for (double v : g.loss) CHECK(v == expect);
    CHECK(g.nx == 15);
    CHECK_FALSE(g.clamped);
}

TEST_CASE("global sweep: value at the trained shift equals the plan loss") {
    Rng rng(10);
    ChipArray donor = random_chip(rng, 12, 12, 0, 0.35);
    ChipArray target = random_chip(rng, 12, 12, 1, 0.2);
    PlanConfig cfg;
    cfg.t_start = 3;
    cfg.t_max = 6;
    cfg.n_iter = 60;
    const AdaptiveResult r = adaptive_plan(donor, target, cfg);
    REQUIRE_FALSE(r.v_star.empty());
    const std::vector<Vec2i> shifts = [&] {
        std::vector<Vec2i> s;
        for (const Vec2& v : r.v_star) s.push_back(ste_round(v));
        return s;
    }();
    for (int block = 1; block <= static_cast<int>(r.v_star.size()); ++block) {
        const LandscapeGrid g = sweep_global(donor, target, r.v_star, block, 11);
        const Vec2i a = shifts[static_cast<std::size_t>(block - 1)];
        const int ix = static_cast<int>(a.x - g.sx_min);
        const int iy = static_cast<int>(a.y - g.sy_min);
        REQUIRE(ix >= 0);
        REQUIRE(iy >= 0);
        CHECK(g.at(iy, ix) == static_cast<double>(r.plan.residual_defects));
        // the sweep contains a point at least as good as the zero shift
        const int zx = static_cast<int>(0 - g.sx_min), zy = static_cast<int>(0 - g.sy_min);
        double best = g.loss[0];
        for (double v : g.loss) best = std::min(best, v);
        CHECK(best <= g.at(zy, zx));
    }
}

TEST_CASE("global sweep clamps out-of-range requests") {
    ChipArray donor(6, 6, 0, 1);
    ChipArray target(6, 6, 1, 1);
    const LandscapeGrid g = sweep_global(donor, target, {{0.0, 0.0}}, 1, 40);
    CHECK(g.clamped);
    CHECK(g.nx == 11);  // clamped to +/-5
}

TEST_CASE("local sweep: surrogate equals the integer loss at lattice points") {
    Rng rng(77);
    ChipArray donor = random_chip(rng, 10, 10, 0, 0.4);
    ChipArray target = random_chip(rng, 10, 10, 1, 0.25);
    const std::vector<Vec2> trained{{0.6, -0.2}, {1.4, 0.9}, {-0.8, 2.2}};
    for (int block = 1; block <= 3; ++block) {
        const Vec2 center = trained[static_cast<std::size_t>(block - 1)];
        for (int dy = -3; dy <= 3; ++dy)
            for (int dx = -3; dx <= 3; ++dx) {
                const Vec2i lattice{static_cast<int>(std::lround(center.x)) + dx,
                                    static_cast<int>(std::lround(center.y)) + dy};
                const double surr = surrogate_loss(
                    donor, target, trained, block,
                    {static_cast<double>(lattice.x), static_cast<double>(lattice.y)});
                const long long exact = integer_plan_loss(donor, target, trained, block, lattice);
                CHECK(surr == static_cast<double>(exact));
            }
    }
}

TEST_CASE("local sweep: samples, markers, and trajectory") {
    Rng rng(55);
    ChipArray donor = random_chip(rng, 10, 10, 0, 0.3);
    ChipArray target = random_chip(rng, 10, 10, 1, 0.2);
    PlanConfig cfg;
    cfg.t_start = 2;
    cfg.t_max = 4;
    cfg.n_iter = 40;
    cfg.stop_on_zero = false;
    const FixedTResult r = optimize_fixed_T(donor, target, 2, cfg);
    const LandscapeGrid g =
        sweep_local(donor, target, r.best_v, 1, 3.0, 0.1, &r.trace);
    CHECK(g.nx == 61);
    CHECK(g.ny == 61);
    CHECK(g.loss.size() == 61u * 61u);
    CHECK(g.v_final == r.best_v[0]);
    CHECK(g.a_final == ste_round(r.best_v[0]));
    REQUIRE(g.has_trajectory);
    // trajectory starts at the zero initialization
    CHECK(g.trajectory.front() == Vec2{0.0, 0.0});
    CHECK(g.trajectory.size() <= 100);
    // rounded marker is the rounded final marker
    CHECK(g.a_final == ste_round(g.v_final));
    // center sample equals the surrogate loss at the trained shift
    const double center = g.at(g.ny / 2, g.nx / 2);
    CHECK(center == doctest::Approx(surrogate_loss(donor, target, r.best_v, 1, r.best_v[0]))
                        .epsilon(1e-12));
}

TEST_CASE("local sweep without a trace is flagged") {
    ChipArray donor(5, 5, 0, 1);
    ChipArray target(5, 5, 1, 1);
    const LandscapeGrid g = sweep_local(donor, target, {{0.3, 0.3}}, 1, 1.0, 0.5, nullptr);
    CHECK_FALSE(g.has_trajectory);
    CHECK(g.trajectory.empty());
}

TEST_CASE("grad_trace emits per-block norms for every executed epoch") {
    Rng rng(8);
    ChipArray donor = random_chip(rng, 10, 10, 0, 0.4);
    ChipArray target = random_chip(rng, 10, 10, 1, 0.2);
    PlanConfig cfg;
    cfg.n_iter = 15;
    cfg.stop_on_zero = false;
    const FixedTResult r = optimize_fixed_T(donor, target, 3, cfg);
    const auto series = grad_trace(r.trace);
    REQUIRE(series.size() == 3);
    for (const auto& s : series) {
        CHECK(s.points.size() == static_cast<std::size_t>(r.iters_executed));
        CHECK(s.points.front().epoch == 0);
        CHECK(s.points.front().shift_norm == 0.0);  // zero initialization
    }
    CHECK(grad_trace(TraceLog{}).empty());
}

TEST_CASE("sweep parallelism does not change the grids") {
    Rng rng(91);
    ChipArray donor = random_chip(rng, 9, 9, 0, 0.4);
    ChipArray target = random_chip(rng, 9, 9, 1, 0.25);
    const std::vector<Vec2> trained{{0.4, -1.2}, {2.1, 0.3}};
    const LandscapeGrid g1 = sweep_global(donor, target, trained, 2, 8, 1);
    const LandscapeGrid g3 = sweep_global(donor, target, trained, 2, 8, 3);
    CHECK(g1.loss == g3.loss);
    const LandscapeGrid l1 = sweep_local(donor, target, trained, 1, 1.5, 0.25, nullptr, {}, 1);
    const LandscapeGrid l4 = sweep_local(donor, target, trained, 1, 1.5, 0.25, nullptr, {}, 4);
    CHECK(l1.loss == l4.loss);
}

TEST_CASE("landscape rejects bad block indices") {
    ChipArray donor(4, 4, 0, 1);
    ChipArray target(4, 4, 1, 1);
    CHECK_THROWS_AS(sweep_global(donor, target, {{0.0, 0.0}}, 2, 3), std::invalid_argument);
    CHECK_THROWS_AS(sweep_local(donor, target, {{0.0, 0.0}}, 0, 1.0, 0.1, nullptr),
                    std::invalid_argument);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "drplan/grid_io.hpp"
#include "drplan/plan_io.hpp"

namespace {

// keep every relative artifact out of the source tree
const struct WorkDir {
    WorkDir() {
        const auto dir = std::filesystem::temp_directory_path() / "drplan_cli_tests";
        std::filesystem::create_directories(dir);
        std::filesystem::current_path(dir);
    }
} work_dir;

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DRPLAN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("gen produces valid, deterministic instance files") {
    REQUIRE(run_cli("gen --size 20 --d1 0.1 --d2 0.05 --seed 7 "
                    "--out-donor cli_donor.json --out-target cli_target.json") == 0);
    const drplan::ChipArray donor = drplan::read_array("cli_donor.json");
    const drplan::ChipArray target = drplan::read_array("cli_target.json");
    CHECK(donor.width == 20);
    CHECK(donor.oob_fill == 0);
    CHECK(target.oob_fill == 1);

    // byte-identical on a re-run with the same flags
    const std::string donor_bytes = slurp("cli_donor.json");
    REQUIRE(run_cli("gen --size 20 --d1 0.1 --d2 0.05 --seed 7 "
                    "--out-donor cli_donor.json --out-target cli_target.json") == 0);
    CHECK(slurp("cli_donor.json") == donor_bytes);
}

TEST_CASE("gen supports non-square dims") {
    REQUIRE(run_cli("gen --donor-size 8x6 --target-size 5x9 --d1 0.2 --d2 0.1 --seed 2 "
                    "--out-donor cli_rect_d.json --out-target cli_rect_t.json") == 0);
    const drplan::ChipArray donor = drplan::read_array("cli_rect_d.json");
    const drplan::ChipArray target = drplan::read_array("cli_rect_t.json");
    CHECK(donor.width == 8);
    CHECK(donor.height == 6);
    CHECK(target.width == 5);
    CHECK(target.height == 9);
}

TEST_CASE("gen rejects invalid rates with a validation exit") {
    CHECK(run_cli("gen --size 10 --d1 1.5 --d2 0.05 --seed 1") == 2);
    CHECK(run_cli("gen --size 0 --d1 0.1 --d2 0.05") == 2);
}

TEST_CASE("flag parse failures are validation errors, help is success") {
    CHECK(run_cli("plan") == 2);         // missing required flags
    CHECK(run_cli("bogus") == 2);        // unknown subcommand
    CHECK(run_cli("--help") == 0);
}

TEST_CASE("plan then simulate reproduces the plan's residual") {
    REQUIRE(run_cli("gen --size 16 --d1 0.2 --d2 0.1 --seed 11 "
                    "--out-donor cli_d.json --out-target cli_t.json") == 0);
    REQUIRE(run_cli("plan --donor cli_d.json --target cli_t.json --out cli_plan.json "
                    "--t-start 1 --t-max 8 --n-iter 80") == 0);
    const drplan::RepairPlan plan = drplan::read_plan("cli_plan.json");
    CHECK(plan.complete);
    CHECK(plan.residual_defects == 0);

    REQUIRE(run_cli("simulate --donor cli_d.json --target cli_t.json --plan cli_plan.json "
                    "--out-target cli_final.json") == 0);
    const drplan::ChipArray final_target = drplan::read_array("cli_final.json");
    CHECK(drplan::defect_count(final_target) == plan.residual_defects);
}

TEST_CASE("simulate rejects plans whose dims mismatch the arrays") {
    REQUIRE(run_cli("gen --size 12 --d1 0.2 --d2 0.1 --seed 3 "
                    "--out-donor cli_d12.json --out-target cli_t12.json") == 0);
    REQUIRE(run_cli("gen --size 14 --d1 0.2 --d2 0.1 --seed 3 "
                    "--out-donor cli_d14.json --out-target cli_t14.json") == 0);
    REQUIRE(run_cli("lps --donor cli_d12.json --target cli_t12.json --out cli_p12.json") == 0);
    CHECK(run_cli("simulate --donor cli_d14.json --target cli_t14.json --plan cli_p12.json") ==
          2);
}

TEST_CASE("lps writes the shared plan schema") {
    REQUIRE(run_cli("gen --size 16 --d1 0.2 --d2 0.1 --seed 5 "
                    "--out-donor cli_ld.json --out-target cli_lt.json") == 0);
    REQUIRE(run_cli("lps --donor cli_ld.json --target cli_lt.json --out cli_lps.json") == 0);
    std::ifstream in("cli_lps.json");
    nlohmann::json j;
    in >> j;
    for (const char* key : {"shifts", "per_step_transfers", "residual_defects",
                            "effective_steps", "raw_T", "complete", "config", "wall_time_s"})
        CHECK(j.contains(key));
    CHECK(j["config"]["method"] == "lps");
}

TEST_CASE("bench subcommand writes a report") {
    REQUIRE(run_cli("bench --size 12 --d1 0.3 --d2 0.1 --trials 4 --methods drp,lps "
                    "--t-start 1 --t-max 8 --n-iter 60 --seed 9 --out cli_bench.json") == 0);
    std::ifstream in("cli_bench.json");
    nlohmann::json j;
    in >> j;
    CHECK(j["per_trial"].size() == 4);
    CHECK(j["aggregate"].contains("drp"));
    CHECK(j["aggregate"].contains("lps"));
}

TEST_CASE("landscape and trace subcommands emit their artifacts") {
    REQUIRE(run_cli("gen --size 12 --d1 0.3 --d2 0.1 --seed 13 "
                    "--out-donor cli_land_d.json --out-target cli_land_t.json") == 0);
    REQUIRE(run_cli("landscape --donor cli_land_d.json --target cli_land_t.json "
                    "--mode global --block 1 --T 3 --range 5 --n-iter 40 "
                    "--out-prefix cli_ls") == 0);
    const std::string csv = slurp("cli_ls_block1_global.csv");
    CHECK(csv.rfind("sx,sy,loss\n", 0) == 0);
    std::ifstream in("cli_ls_block1_global.json");
    nlohmann::json markers;
    in >> markers;
    CHECK(markers.contains("block"));
    CHECK(markers.contains("v_final"));
    CHECK(markers.contains("a_final"));
    CHECK(markers.contains("trajectory"));

    REQUIRE(run_cli("trace --donor cli_land_d.json --target cli_land_t.json --T 2 "
                    "--n-iter 30 --full --out cli_trace.csv") == 0);
    const std::string trace = slurp("cli_trace.csv");
    CHECK(trace.rfind("epoch,block,shift_norm,grad_norm\n", 0) == 0);
}

TEST_CASE("missing input files exit with the io code") {
    CHECK(run_cli("plan --donor nope.json --target nada.json") == 4);
}

TEST_CASE("config file values apply and flags override them") {
    {
        std::ofstream cfg("cli_cfg.json");
        cfg << "{\"lambda1\": 0.25, \"n_iter\": 33, \"t_start\": 1, \"t_max\": 6}";
    }
    REQUIRE(run_cli("gen --size 12 --d1 0.2 --d2 0.1 --seed 21 "
                    "--out-donor cli_cfg_d.json --out-target cli_cfg_t.json") == 0);
    REQUIRE(run_cli("plan --donor cli_cfg_d.json --target cli_cfg_t.json "
                    "--config cli_cfg.json --n-iter 44 --out cli_cfg_plan.json") == 0);
    std::ifstream in("cli_cfg_plan.json");
    nlohmann::json j;
    in >> j;
    CHECK(j["config"]["lambda1"] == 0.25);  // from the file
    CHECK(j["config"]["n_iter"] == 44);     // flag wins
    CHECK(j["config"]["t_start"] == 1);
}

TEST_CASE("unsolvable instances exit with the incomplete code but still write a plan") {
    // an empty donor cannot repair anything
    REQUIRE(run_cli("gen --size 8 --d1 1.0 --d2 0.3 --seed 4 "
                    "--out-donor cli_empty_d.json --out-target cli_part_t.json") == 0);
    CHECK(run_cli("plan --donor cli_empty_d.json --target cli_part_t.json "
                  "--t-start 1 --t-max 2 --n-iter 5 --out cli_incomplete.json") == 3);
    const drplan::RepairPlan p = drplan::read_plan("cli_incomplete.json");
    CHECK_FALSE(p.complete);
    CHECK(p.residual_defects > 0);
    CHECK(run_cli("lps --donor cli_empty_d.json --target cli_part_t.json "
                  "--out cli_incomplete_lps.json") == 3);
}

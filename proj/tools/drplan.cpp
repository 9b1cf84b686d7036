// drplan: plan minimal XY-platform shift sequences that repair defective
// target arrays from donor arrays.
//
// Subcommands: gen, plan, lps, simulate, landscape, bench, trace.
// Exit codes: 0 success, 2 validation error, 3 incomplete repair, 4 I/O error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "drplan/drplan.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIncomplete = 3;
constexpr int kExitIo = 4;

struct ConfigFlags {
    std::optional<int> t_max, n_iter, t_start, t1;
    std::optional<double> eps, lambda1, lambda2, lr, beta1, beta2, adam_eps;
    std::optional<std::uint64_t> seed;
    std::string config_path;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file (flags override it)");
        cmd->add_option("--t-max", t_max, "maximum transfer steps (default 100)");
        cmd->add_option("--n-iter", n_iter, "optimization iterations per T (default 500)");
        cmd->add_option("--eps", eps, "convergence threshold on residual defects");
        cmd->add_option("--t-start", t_start, "initial module count (default 3)");
        cmd->add_option("--t1", t1, "early-completion horizon (0 = equal to T)");
        cmd->add_option("--lambda1", lambda1, "discount for repairs past the horizon");
        cmd->add_option("--lambda2", lambda2, "movement-penalty weight");
        cmd->add_option("--lr", lr, "Adam step size (default 0.1)");
        cmd->add_option("--adam-beta1", beta1, "Adam beta1");
        cmd->add_option("--adam-beta2", beta2, "Adam beta2");
        cmd->add_option("--adam-eps", adam_eps, "Adam epsilon");
        cmd->add_option("--seed", seed, "base seed for all randomness");
    }

    drplan::PlanConfig resolve() const {
        drplan::PlanConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw drplan::IoError("cannot open config file " + config_path);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw std::invalid_argument(config_path + ": malformed JSON (" +
                                            std::string(e.what()) + ")");
            }
            drplan::config_from_json(j, cfg);
        }
        if (t_max) cfg.t_max = *t_max;
        if (n_iter) cfg.n_iter = *n_iter;
        if (eps) cfg.eps = *eps;
        if (t_start) cfg.t_start = *t_start;
        if (t1) cfg.t1 = *t1;
        if (lambda1) cfg.lambda1 = *lambda1;
        if (lambda2) cfg.lambda2 = *lambda2;
        if (lr) cfg.lr = *lr;
        if (beta1) cfg.adam_beta1 = *beta1;
        if (beta2) cfg.adam_beta2 = *beta2;
        if (adam_eps) cfg.adam_eps = *adam_eps;
        if (seed) cfg.seed = *seed;
        cfg.validate();
        return cfg;
    }
};

std::pair<int, int> parse_dims(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos)
        throw std::invalid_argument("expected WxH, got '" + text + "'");
    return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
}

void echo_json(const nlohmann::json& j) { std::cout << j.dump(2) << std::endl; }

int run(int argc, char** argv) {
    CLI::App app{"differentiable repair planning for chip arrays"};
    app.require_subcommand(1);

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "generate a random donor/target instance");
    int gen_size = 0;
    std::string gen_donor_dims, gen_target_dims;
    double gen_d1 = 0.1, gen_d2 = 0.05;
    std::uint64_t gen_seed = 0;
    std::string gen_out_donor = "donor.json", gen_out_target = "target.json";
    gen->add_option("--size", gen_size, "square size for both arrays");
    gen->add_option("--donor-size", gen_donor_dims, "donor dims as WxH");
    gen->add_option("--target-size", gen_target_dims, "target dims as WxH");
    gen->add_option("--d1", gen_d1, "donor defect rate in [0,1]");
    gen->add_option("--d2", gen_d2, "target defect rate in [0,1]");
    gen->add_option("--seed", gen_seed, "instance seed");
    gen->add_option("--out-donor", gen_out_donor, "donor output path");
    gen->add_option("--out-target", gen_out_target, "target output path");

    // ---- plan ----
    auto* plan = app.add_subcommand("plan", "optimize a repair plan (adaptive step count)");
    std::string plan_donor, plan_target, plan_out = "plan.json", plan_trace_out;
    ConfigFlags plan_cfg;
    plan->add_option("--donor", plan_donor, "donor array JSON")->required();
    plan->add_option("--target", plan_target, "target array JSON")->required();
    plan->add_option("--out", plan_out, "plan output path");
    plan->add_option("--trace-out", plan_trace_out, "write the gradient trace CSV here");
    plan_cfg.attach(plan);

    // ---- lps ----
    auto* lps = app.add_subcommand("lps", "greedy nearest-chip baseline plan");
    std::string lps_donor, lps_target, lps_out = "plan.json";
    lps->add_option("--donor", lps_donor, "donor array JSON")->required();
    lps->add_option("--target", lps_target, "target array JSON")->required();
    lps->add_option("--out", lps_out, "plan output path");

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "replay a plan with the integer executor");
    std::string sim_donor, sim_target, sim_plan, sim_out_donor, sim_out_target;
    sim->add_option("--donor", sim_donor, "donor array JSON")->required();
    sim->add_option("--target", sim_target, "target array JSON")->required();
    sim->add_option("--plan", sim_plan, "plan JSON to replay")->required();
    sim->add_option("--out-donor", sim_out_donor, "write the final donor array here");
    sim->add_option("--out-target", sim_out_target, "write the final target array here");

    // ---- landscape ----
    auto* land = app.add_subcommand("landscape", "loss-landscape sweeps for a trained model");
    std::string land_donor, land_target, land_mode = "global", land_prefix = "landscape";
    int land_block = 0, land_T = 5, land_range = -1, land_jobs = 1;
    double land_window = 3.0, land_res = 0.1;
    ConfigFlags land_cfg;
    land->add_option("--donor", land_donor, "donor array JSON")->required();
    land->add_option("--target", land_target, "target array JSON")->required();
    land->add_option("--mode", land_mode, "global or local")
        ->check(CLI::IsMember({"global", "local"}));
    land->add_option("--block", land_block, "block to sweep (1-based; 0 = all)");
    land->add_option("--T", land_T, "number of modules to train at");
    land->add_option("--range", land_range, "global sweep half-range (default full)");
    land->add_option("--window", land_window, "local sweep half-window in cells");
    land->add_option("--resolution", land_res, "local sweep step in cells");
    land->add_option("--jobs", land_jobs, "sweep-point parallelism (default 1)");
    land->add_option("--out-prefix", land_prefix, "output prefix for CSV/JSON files");
    land_cfg.attach(land);

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "paired repair-step statistics over seeded trials");
    int bench_size = 50, bench_trials = 100, bench_jobs = 1;
    double bench_d1 = 0.1, bench_d2 = 0.05;
    std::string bench_methods = "drp,lps", bench_out = "bench.json";
    ConfigFlags bench_cfg;
    bench->add_option("--size", bench_size, "square array size");
    bench->add_option("--d1", bench_d1, "donor defect rate");
    bench->add_option("--d2", bench_d2, "target defect rate");
    bench->add_option("--trials", bench_trials, "number of seeded instances");
    bench->add_option("--methods", bench_methods, "comma list from {drp, lps}");
    bench->add_option("--jobs", bench_jobs, "trial-level parallelism (default 1)");
    bench->add_option("--out", bench_out, "report output path");
    bench_cfg.attach(bench);

    // ---- trace ----
    auto* trace = app.add_subcommand("trace", "per-epoch shift and gradient norms");
    std::string trace_donor, trace_target, trace_out = "trace.csv";
    int trace_T = 3;
    bool trace_full = false;
    ConfigFlags trace_cfg;
    trace->add_option("--donor", trace_donor, "donor array JSON")->required();
    trace->add_option("--target", trace_target, "target array JSON")->required();
    trace->add_option("--T", trace_T, "number of modules");
    trace->add_flag("--full", trace_full, "run all iterations (no early stop)");
    trace->add_option("--out", trace_out, "trace CSV path");
    trace_cfg.attach(trace);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help and friends
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    if (gen->parsed()) {
        drplan::InstanceSpec spec;
        if (!gen_donor_dims.empty()) {
            auto [w, h] = parse_dims(gen_donor_dims);
            spec.donor_width = w;
            spec.donor_height = h;
        } else {
            spec.donor_width = spec.donor_height = gen_size;
        }
        if (!gen_target_dims.empty()) {
            auto [w, h] = parse_dims(gen_target_dims);
            spec.target_width = w;
            spec.target_height = h;
        } else {
            spec.target_width = spec.target_height = gen_size;
        }
        spec.d1 = gen_d1;
        spec.d2 = gen_d2;
        spec.seed = gen_seed;
        const auto [donor, target] = drplan::generate_instance(spec);
        drplan::write_array(donor, gen_out_donor);
        drplan::write_array(target, gen_out_target);
        echo_json({{"donor", gen_out_donor},
                   {"target", gen_out_target},
                   {"donor_width", spec.donor_width},
                   {"donor_height", spec.donor_height},
                   {"target_width", spec.target_width},
                   {"target_height", spec.target_height},
                   {"d1", spec.d1},
                   {"d2", spec.d2},
                   {"seed", spec.seed},
                   {"donor_defect_rate", drplan::defect_rate(donor)},
                   {"target_defect_rate", drplan::defect_rate(target)}});
        return kExitOk;
    }

    if (plan->parsed()) {
        const drplan::PlanConfig cfg = plan_cfg.resolve();
        const drplan::ChipArray donor = drplan::read_array(plan_donor);
        const drplan::ChipArray target = drplan::read_array(plan_target);
        const drplan::AdaptiveResult r = drplan::adaptive_plan(donor, target, cfg);
        drplan::write_plan(r.plan, plan_out);
        if (!plan_trace_out.empty())
            drplan::write_trace_csv(drplan::grad_trace(r.trace), plan_trace_out);
        echo_json({{"out", plan_out},
                   {"complete", r.plan.complete},
                   {"raw_T", r.plan.raw_t},
                   {"effective_steps", r.plan.effective_steps},
                   {"residual_defects", r.plan.residual_defects},
                   {"wall_time_s", r.plan.wall_time_s}});
        return r.plan.complete ? kExitOk : kExitIncomplete;
    }

    if (lps->parsed()) {
        const drplan::ChipArray donor = drplan::read_array(lps_donor);
        const drplan::ChipArray target = drplan::read_array(lps_target);
        const drplan::LpsResult r = drplan::lps_plan(donor, target);
        drplan::write_plan(r.plan, lps_out);
        echo_json({{"out", lps_out},
                   {"complete", r.plan.complete},
                   {"steps", r.plan.raw_t},
                   {"residual_defects", r.plan.residual_defects}});
        return r.plan.complete ? kExitOk : kExitIncomplete;
    }

    if (sim->parsed()) {
        const drplan::ChipArray donor = drplan::read_array(sim_donor);
        const drplan::ChipArray target = drplan::read_array(sim_target);
        const drplan::RepairPlan p = drplan::read_plan(sim_plan);
        if (p.donor_width != 0 &&
            (p.donor_width != donor.width || p.donor_height != donor.height ||
             p.target_width != target.width || p.target_height != target.height))
            throw std::invalid_argument("simulate: plan dimensions do not match the arrays");
        const drplan::ExecResult r = drplan::execute_plan(donor, target, p.shifts);
        if (!sim_out_donor.empty()) drplan::write_array(r.donor_final, sim_out_donor);
        if (!sim_out_target.empty()) drplan::write_array(r.target_final, sim_out_target);
        echo_json({{"residual_defects", drplan::defect_count(r.target_final)},
                   {"per_step_transfers", r.per_step_transfers}});
        return kExitOk;
    }

    if (land->parsed()) {
        const drplan::PlanConfig cfg = land_cfg.resolve();
        const drplan::ChipArray donor = drplan::read_array(land_donor);
        const drplan::ChipArray target = drplan::read_array(land_target);
        const drplan::FixedTResult trained =
            drplan::optimize_fixed_T(donor, target, land_T, cfg);
        const int limit = std::max(std::max(donor.width, donor.height),
                                   std::max(target.width, target.height)) -
                          1;
        const int range = land_range < 0 ? limit : land_range;
        nlohmann::json outputs = nlohmann::json::array();
        for (int block = 1; block <= land_T; ++block) {
            if (land_block != 0 && block != land_block) continue;
            drplan::LandscapeGrid g;
            if (land_mode == "global")
                g = drplan::sweep_global(donor, target, trained.best_v, block, range, land_jobs);
            else
                g = drplan::sweep_local(donor, target, trained.best_v, block, land_window,
                                        land_res, &trained.trace, {}, land_jobs);
            const std::string base =
                land_prefix + "_block" + std::to_string(block) + "_" + land_mode;
            drplan::write_landscape_csv(g, base + ".csv");
            drplan::write_landscape_markers(g, cfg, base + ".json");
            outputs.push_back(base + ".csv");
            if (g.clamped)
                std::cerr << "warning: sweep range clamped to +/-" << limit << std::endl;
        }
        echo_json({{"outputs", outputs},
                   {"best_residual", trained.best_residual},
                   {"iterations", trained.iters_executed}});
        return kExitOk;
    }

    if (bench->parsed()) {
        const drplan::PlanConfig cfg = bench_cfg.resolve();
        std::vector<std::string> methods;
        for (std::size_t pos = 0; pos < bench_methods.size();) {
            const auto comma = bench_methods.find(',', pos);
            const auto end = comma == std::string::npos ? bench_methods.size() : comma;
            if (end > pos) methods.push_back(bench_methods.substr(pos, end - pos));
            pos = end + 1;
        }
        const drplan::BenchReport rep = drplan::bench_condition(
            {bench_size, bench_d1, bench_d2}, bench_trials, methods, cfg, bench_jobs);
        drplan::write_report(rep, bench_out);
        nlohmann::json summary{{"out", bench_out}, {"trials", rep.trials}};
        if (rep.drp_agg)
            summary["drp_mean_steps"] = rep.drp_agg->mean_steps;
        if (rep.lps_agg)
            summary["lps_mean_steps"] = rep.lps_agg->mean_steps;
        echo_json(summary);
        return kExitOk;
    }

    if (trace->parsed()) {
        drplan::PlanConfig cfg = trace_cfg.resolve();
        if (trace_full) cfg.stop_on_zero = false;
        const drplan::ChipArray donor = drplan::read_array(trace_donor);
        const drplan::ChipArray target = drplan::read_array(trace_target);
        const drplan::FixedTResult r = drplan::optimize_fixed_T(donor, target, trace_T, cfg);
        drplan::write_trace_csv(drplan::grad_trace(r.trace), trace_out);
        echo_json({{"out", trace_out},
                   {"iterations", r.iters_executed},
                   {"best_residual", r.best_residual},
                   {"best_iter", r.best_iter},
                   {"T", trace_T},
                   {"config", drplan::config_to_json(cfg)}});
        return kExitOk;
    }

    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const drplan::IoError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}

#pragma once

// Serialization of repair plans, benchmark reports, landscape sweeps and
// gradient traces.

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "drplan/bench.hpp"
#include "drplan/grid_io.hpp"
#include "drplan/landscape.hpp"
#include "drplan/lps.hpp"
#include "drplan/planner.hpp"

namespace drplan {

inline nlohmann::json config_to_json(const PlanConfig& c) {
    return nlohmann::json{{"t_max", c.t_max},
                          {"n_iter", c.n_iter},
                          {"eps", c.eps},
                          {"t_start", c.t_start},
                          {"t1", c.t1},
                          {"lambda1", c.lambda1},
                          {"lambda2", c.lambda2},
                          {"lr", c.lr},
                          {"adam_beta1", c.adam_beta1},
                          {"adam_beta2", c.adam_beta2},
                          {"adam_eps", c.adam_eps},
                          {"seed", c.seed},
                          {"stop_on_zero", c.stop_on_zero}};
}

inline void config_from_json(const nlohmann::json& j, PlanConfig& c) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    if (j.contains("t_max")) c.t_max = j["t_max"].get<int>();
    if (j.contains("n_iter")) c.n_iter = j["n_iter"].get<int>();
    if (j.contains("eps")) c.eps = j["eps"].get<double>();
    if (j.contains("t_start")) c.t_start = j["t_start"].get<int>();
    if (j.contains("t1")) c.t1 = j["t1"].get<int>();
    if (j.contains("lambda1")) c.lambda1 = j["lambda1"].get<double>();
    if (j.contains("lambda2")) c.lambda2 = j["lambda2"].get<double>();
    if (j.contains("lr")) c.lr = j["lr"].get<double>();
    if (j.contains("adam_beta1")) c.adam_beta1 = j["adam_beta1"].get<double>();
    if (j.contains("adam_beta2")) c.adam_beta2 = j["adam_beta2"].get<double>();
    if (j.contains("adam_eps")) c.adam_eps = j["adam_eps"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("stop_on_zero")) c.stop_on_zero = j["stop_on_zero"].get<bool>();
}

inline nlohmann::json plan_to_json(const RepairPlan& p) {
    nlohmann::json shifts = nlohmann::json::array();
    for (const Vec2i& s : p.shifts) shifts.push_back({{"sx", s.x}, {"sy", s.y}});
    nlohmann::json cfg = config_to_json(p.config);
    cfg["method"] = p.method;
    cfg["donor_width"] = p.donor_width;
    cfg["donor_height"] = p.donor_height;
    cfg["target_width"] = p.target_width;
    cfg["target_height"] = p.target_height;
    return nlohmann::json{{"shifts", shifts},
                          {"per_step_transfers", p.per_step_transfers},
                          {"residual_defects", p.residual_defects},
                          {"effective_steps", p.effective_steps},
                          {"raw_T", p.raw_t},
                          {"complete", p.complete},
                          {"config", cfg},
                          {"wall_time_s", p.wall_time_s}};
}

inline RepairPlan plan_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("shifts") || !j["shifts"].is_array())
        throw std::invalid_argument(where + ": not a repair plan (missing shifts)");
    RepairPlan p;
    for (const auto& s : j["shifts"]) {
        if (!s.contains("sx") || !s.contains("sy"))
            throw std::invalid_argument(where + ": shift entries need sx and sy");
        p.shifts.push_back({s["sx"].get<int>(), s["sy"].get<int>()});
    }
    if (j.contains("per_step_transfers"))
        p.per_step_transfers = j["per_step_transfers"].get<std::vector<long long>>();
    if (j.contains("residual_defects")) p.residual_defects = j["residual_defects"].get<long long>();
    if (j.contains("effective_steps")) p.effective_steps = j["effective_steps"].get<int>();
    if (j.contains("raw_T")) p.raw_t = j["raw_T"].get<int>();
    if (j.contains("complete")) p.complete = j["complete"].get<bool>();
    if (j.contains("wall_time_s")) p.wall_time_s = j["wall_time_s"].get<double>();
    if (j.contains("config")) {
        const auto& c = j["config"];
        config_from_json(c, p.config);
        if (c.contains("method")) p.method = c["method"].get<std::string>();
        if (c.contains("donor_width")) p.donor_width = c["donor_width"].get<int>();
        if (c.contains("donor_height")) p.donor_height = c["donor_height"].get<int>();
        if (c.contains("target_width")) p.target_width = c["target_width"].get<int>();
        if (c.contains("target_height")) p.target_height = c["target_height"].get<int>();
    }
    return p;
}

inline void write_plan(const RepairPlan& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_plan: cannot open " + path);
    out << plan_to_json(p).dump(2) << '\n';
    if (!out) throw IoError("write_plan: write failed for " + path);
}

inline RepairPlan read_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_plan: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path + ": malformed JSON (" + e.what() + ")");
    }
    return plan_from_json(j, path);
}

// ------------------------------------------------------------------
// Benchmark reports
// ------------------------------------------------------------------

inline nlohmann::json report_to_json(const BenchReport& r) {
    nlohmann::json trials = nlohmann::json::array();
    auto outcome = [](const TrialOutcome& o) {
        return nlohmann::json{{"steps", o.steps},
                              {"raw_T", o.raw_t},
                              {"residual_defects", o.residual},
                              {"complete", o.complete},
                              {"wall_time_s", o.wall_time_s}};
    };
    for (const BenchTrial& t : r.per_trial) {
        nlohmann::json jt{{"trial", t.index}, {"seed", t.seed}};
        if (t.drp) jt["drp"] = outcome(*t.drp);
        if (t.lps) jt["lps"] = outcome(*t.lps);
        trials.push_back(std::move(jt));
    }
    auto agg = [](const MethodAggregate& a) {
        return nlohmann::json{{"trials", a.trials},
                              {"completed", a.completed},
                              {"mean_steps", a.mean_steps},
                              {"std_steps", a.std_steps},
                              {"mean_wall_time_s", a.mean_wall_s},
                              {"std_wall_time_s", a.std_wall_s}};
    };
    nlohmann::json aggregates;
    if (r.drp_agg) aggregates["drp"] = agg(*r.drp_agg);
    if (r.lps_agg) aggregates["lps"] = agg(*r.lps_agg);

    nlohmann::json out{{"condition",
                        {{"size", r.condition.size}, {"d1", r.condition.d1}, {"d2", r.condition.d2}}},
                       {"trials", r.trials},
                       {"methods", nlohmann::json::array()},
                       {"config", config_to_json(r.config)},
                       {"per_trial", trials},
                       {"aggregate", aggregates}};
    if (r.run_drp) out["methods"].push_back("drp");
    if (r.run_lps) out["methods"].push_back("lps");
    if (r.reference != nullptr) {
        out["paper_reference"] = {
            {"size", r.reference->size}, {"d1", r.reference->d1},   {"d2", r.reference->d2},
            {"drp", r.reference->drp},   {"lps", r.reference->lps}, {"rl", r.reference->rl},
            {"note", "mean step counts quoted from the published comparison table; "
                     "the rl column is reference-only and never recomputed"}};
    }
    return out;
}

inline void write_report(const BenchReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_report: cannot open " + path);
    out << report_to_json(r).dump(2) << '\n';
    if (!out) throw IoError("write_report: write failed for " + path);
}

// ------------------------------------------------------------------
// Landscape sweeps and gradient traces
// ------------------------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace detail

/// CSV with header sx,sy,loss, one row per grid point.
inline void write_landscape_csv(const LandscapeGrid& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_landscape_csv: cannot open " + path);
    out << "sx,sy,loss\n";
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            out << detail::fmt_double(g.sx(ix)) << ',' << detail::fmt_double(g.sy(iy)) << ','
                << detail::fmt_double(g.at(iy, ix)) << '\n';
    if (!out) throw IoError("write_landscape_csv: write failed for " + path);
}

/// Marker sidecar for one sweep: optimized continuous shift, its rounded
/// actuation, and the captured optimizer trajectory.
inline void write_landscape_markers(const LandscapeGrid& g, const PlanConfig& cfg,
                                    const std::string& path) {
    nlohmann::json traj = nlohmann::json::array();
    for (const Vec2& v : g.trajectory) traj.push_back({v.x, v.y});
    nlohmann::json j{{"block", g.block},
                     {"v_final", {g.v_final.x, g.v_final.y}},
                     {"a_final", {g.a_final.x, g.a_final.y}},
                     {"trajectory", traj},
                     {"has_trajectory", g.has_trajectory},
                     {"config", config_to_json(cfg)}};
    std::ofstream out(path);
    if (!out) throw IoError("write_landscape_markers: cannot open " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write_landscape_markers: write failed for " + path);
}

/// CSV with header epoch,block,shift_norm,grad_norm.
inline void write_trace_csv(const std::vector<GradTraceSeries>& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_trace_csv: cannot open " + path);
    out << "epoch,block,shift_norm,grad_norm\n";
    if (!series.empty()) {
        const std::size_t n = series.front().points.size();
        for (std::size_t i = 0; i < n; ++i)
            for (const GradTraceSeries& s : series)
                out << s.points[i].epoch << ',' << s.block << ','
                    << detail::fmt_double(s.points[i].shift_norm) << ','
                    << detail::fmt_double(s.points[i].grad_norm) << '\n';
    }
    if (!out) throw IoError("write_trace_csv: write failed for " + path);
}

}  // namespace drplan

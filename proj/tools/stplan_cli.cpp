#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stplan/core_types.hpp"
#include "stplan/dataset_replay.hpp"
#include "stplan/planner.hpp"
#include "stplan/render.hpp"
#include "stplan/sim_harness.hpp"
#include "stplan/timed_esdf.hpp"

namespace fs = std::filesystem;
using namespace stplan;

namespace {

struct CommonOptions {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    bool deterministic = false;
};

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("invalid JSON in '" + path + "': " + e.what());
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

// A plan config is either a bare scenario or
// {"scenario": {...}, "n_obstacles": N, "obstacles": [{"id", "p", "v"}...]}.
struct PlanSetup {
    ScenarioConfig cfg;
    WorldSnapshot world;
};

PlanSetup load_plan_setup(const CommonOptions& opt) {
    ScenarioConfig cfg;
    int n_obstacles = 40;
    std::optional<std::vector<Obstacle>> explicit_obstacles;
    if (!opt.config.empty()) {
        const nlohmann::json j = read_json(opt.config);
        if (j.contains("scenario")) {
            for (const auto& [key, value] : j.items()) {
                if (key == "scenario") {
                    cfg = value.get<ScenarioConfig>();
                } else if (key == "n_obstacles") {
                    n_obstacles = value.get<int>();
                } else if (key == "obstacles") {
                    std::vector<Obstacle> obs;
                    for (const auto& o : value) {
                        const auto p = o.at("p").get<std::vector<double>>();
                        const auto v = o.value("v", std::vector<double>{0.0, 0.0});
                        if (p.size() != 2 || v.size() != 2) throw std::invalid_argument("obstacle p/v must be [x,y]");
                        obs.push_back({o.at("id").get<int>(), Vec2(p[0], p[1]), Vec2(v[0], v[1])});
                    }
                    explicit_obstacles = std::move(obs);
                } else {
                    throw std::invalid_argument("unknown plan config key '" + key + "'");
                }
            }
        } else {
            cfg = j.get<ScenarioConfig>();
        }
    }
    for (const auto& o : opt.overrides) apply_override(cfg, o);
    if (opt.seed) cfg.rng_seed = *opt.seed;
    cfg.validate();

    PlanSetup setup{cfg, {}};
    if (explicit_obstacles) {
        setup.world = WorldSnapshot{ObstacleSet(std::move(*explicit_obstacles), cfg.c_eff()), 0.0,
                                    cfg.workspace_extent};
    } else {
        setup.world = init_scenario(cfg, n_obstacles, cfg.rng_seed).world;
    }
    return setup;
}

nlohmann::json trajectory_json(const Trajectory& traj, bool complete) {
    nlohmann::json wps = nlohmann::json::array();
    for (const auto& w : traj.waypoints()) {
        wps.push_back({{"t", w.t}, {"p", {w.p.x(), w.p.y()}}, {"v", {w.v.x(), w.v.y()}}});
    }
    return {{"dt", traj.dt()}, {"t0", traj.t0()}, {"complete", complete}, {"waypoints", wps}};
}

int cmd_plan(const CommonOptions& opt) {
    const PlanSetup setup = load_plan_setup(opt);
    const StateTime start{setup.cfg.start, Vec2::Zero(), setup.world.t_now};
    const PlanResult plan = plan_st(setup.world, start, setup.cfg.goal, setup.cfg);

    fs::create_directories(opt.out);
    open_out(fs::path(opt.out) / "trajectory.json") << trajectory_json(plan.trajectory, plan.complete).dump(2)
                                                     << '\n';
    nlohmann::json report = plan.report;
    report["complete"] = plan.complete;
    report["used_fallback"] = plan.used_fallback;
    report["expansions"] = plan.path.expansions;
    if (!opt.deterministic) {
        report["front_end_ms"] = plan.front_end_ms;
        report["back_end_ms"] = plan.back_end_ms;
    }
    open_out(fs::path(opt.out) / "report.json") << report.dump(2) << '\n';
    auto svg = open_out(fs::path(opt.out) / "plan.svg");
    write_plan_svg(setup.world, plan.trajectory, setup.cfg, svg, opt.deterministic);

    std::cout << (plan.complete ? "complete" : "partial") << " plan, " << plan.trajectory.size()
              << " waypoints, objective " << plan.report.final_objective << '\n';
    return plan.complete ? 0 : 2;
}

void write_trace_file(const fs::path& dir, const std::string& name, const ExecutionTrace& trace, bool deterministic) {
    auto out = open_out(dir / name);
    write_trace_jsonl(trace, out, deterministic);
}

std::string value_label(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

int cmd_sim(const CommonOptions& opt, std::optional<int> trials, const std::string& planner, std::size_t threads) {
    if (opt.config.empty()) throw std::invalid_argument("sim needs --config");
    ExperimentConfig cfg = read_json(opt.config).get<ExperimentConfig>();
    for (const auto& o : opt.overrides) apply_override(cfg.base, o);
    if (opt.seed) cfg.base.rng_seed = *opt.seed;
    if (trials) cfg.trials = *trials;
    if (!planner.empty()) cfg.planners = {parse_planner(planner)};
    if (threads) cfg.threads = threads;
    cfg.validate();

    const fs::path traces = fs::path(opt.out) / "traces";
    fs::create_directories(traces);
    const auto rows = run_experiment(cfg, {}, [&](double value, PlannerKind p, int trial, const TrialResult& r) {
        write_trace_file(traces, to_string(p) + "_" + value_label(value) + "_" + std::to_string(trial) + ".jsonl",
                         r.trace, opt.deterministic);
    });
    auto csv = open_out(fs::path(opt.out) / "metrics.csv");
    write_metrics_csv(rows, csv);
    write_metrics_csv(rows, std::cout);
    return 0;
}

int cmd_bench(const CommonOptions& opt, const std::string& sequence, int trials, const std::string& planner,
              std::size_t threads) {
    if (sequence.empty()) throw std::invalid_argument("bench needs --sequence");
    const TrackFile file = load_tracks(sequence);
    const ReplaySequence seq = interpolate_10hz(file.tracks);
    if (seq.dropped) std::cerr << "warning: dropped " << seq.dropped << " single-sample track(s)\n";

    ScenarioConfig base;
    if (!opt.config.empty()) base = read_json(opt.config).get<ScenarioConfig>();
    ScenarioConfig cfg = bench_scenario(seq, base);
    for (const auto& o : opt.overrides) apply_override(cfg, o);
    if (opt.seed) cfg.rng_seed = *opt.seed;
    cfg.validate();

    const PlannerKind kind = parse_planner(planner.empty() ? "st" : planner);
    const fs::path traces = fs::path(opt.out) / "traces";
    fs::create_directories(traces);
    const MetricsRow row = run_bench(seq, cfg, kind, trials, threads, {},
                                     [&](double, PlannerKind p, int trial, const TrialResult& r) {
                                         write_trace_file(traces, to_string(p) + "_" + std::to_string(trial) + ".jsonl",
                                                          r.trace, opt.deterministic);
                                     });
    const std::string name = fs::path(sequence).stem().string();
    auto csv = open_out(fs::path(opt.out) / "metrics.csv");
    write_metrics_csv({row}, csv, name);
    write_metrics_csv({row}, std::cout, name);
    return 0;
}

int cmd_render_esdf(const CommonOptions& opt, int slice, const std::vector<double>& velocity, double resolution) {
    const PlanSetup setup = load_plan_setup(opt);
    if (velocity.size() != 2) throw std::invalid_argument("--velocity takes two values");
    if (slice < 0) throw std::invalid_argument("--slice must be >= 0");
    const auto& cfg = setup.cfg;
    const TimedEsdf field = TimedEsdf::build(setup.world, setup.world.t_now, (slice + 1) * cfg.dt, cfg.dt,
                                             cfg.c_eff(), cfg.epsilon);
    const Vec2 v(velocity[0], velocity[1]);
    fs::create_directories(opt.out);
    auto svg = open_out(fs::path(opt.out) / "esdf.svg");
    write_esdf_svg(field, static_cast<std::size_t>(slice), v, cfg.workspace_extent, resolution, svg);
    auto csv = open_out(fs::path(opt.out) / "esdf.csv");
    write_slice_csv(field, static_cast<std::size_t>(slice), v, cfg.workspace_extent, resolution, csv);
    return 0;
}

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--config", opt.config, "JSON config file");
    cmd->add_option("--out", opt.out, "output directory");
    cmd->add_option("--seed", opt.seed, "RNG seed (overrides the config)");
    cmd->add_option("--set", opt.overrides, "scenario override key=value")->take_all();
    cmd->add_flag("--deterministic", opt.deterministic, "omit timings and timestamps from outputs");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"State-time space planner for dynamic crowds"};
    app.require_subcommand(1);

    CommonOptions plan_opt;
    CommonOptions sim_opt;
    CommonOptions bench_opt;
    CommonOptions esdf_opt;

    auto* plan = app.add_subcommand("plan", "plan once on a seeded or listed scenario");
    add_common(plan, plan_opt);

    auto* sim = app.add_subcommand("sim", "run a parameter sweep");
    add_common(sim, sim_opt);
    std::optional<int> sim_trials;
    std::string sim_planner;
    std::size_t sim_threads = 0;
    sim->add_option("--trials", sim_trials, "trials per sweep point");
    sim->add_option("--planner", sim_planner, "st, vo or wg (default: all in the config)");
    sim->add_option("--threads", sim_threads, "worker threads (0 = all cores)");

    auto* bench = app.add_subcommand("bench", "replay a pedestrian sequence");
    add_common(bench, bench_opt);
    std::string sequence;
    int bench_trials = 30;
    std::string bench_planner;
    std::size_t bench_threads = 0;
    bench->add_option("--sequence", sequence, "TSV track file")->required();
    bench->add_option("--trials", bench_trials, "number of trials");
    bench->add_option("--planner", bench_planner, "st, vo or wg");
    bench->add_option("--threads", bench_threads, "worker threads (0 = all cores)");

    auto* esdf = app.add_subcommand("render-esdf", "render one Timed-ESDF slice");
    add_common(esdf, esdf_opt);
    int slice = 0;
    std::vector<double> velocity{0.0, 0.0};
    double resolution = 0.1;
    esdf->add_option("--slice", slice, "slice index");
    esdf->add_option("--velocity", velocity, "robot velocity vx vy")->expected(2);
    esdf->add_option("--resolution", resolution, "sample spacing in meters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*plan) return cmd_plan(plan_opt);
        if (*sim) return cmd_sim(sim_opt, sim_trials, sim_planner, sim_threads);
        if (*bench) return cmd_bench(bench_opt, sequence, bench_trials, bench_planner, bench_threads);
        if (*esdf) return cmd_render_esdf(esdf_opt, slice, velocity, resolution);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

#include "stplan/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace stplan {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMinSpeed = 1.2;
constexpr double kMaxSpeed = 1.8;
constexpr double kMaxBurnIn = 10.0;
constexpr double kSpawnMargin = 0.2;

double median(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    double m = xs[mid];
    if (xs.size() % 2 == 0) {
        m = 0.5 * (m + *std::max_element(xs.begin(), xs.begin() + mid));
    }
    return m;
}

}  // namespace

std::string to_string(SweepKind kind) {
    switch (kind) {
        case SweepKind::obstacle_count:
            return "obstacle_count";
        case SweepKind::safe_distance:
            return "safe_distance";
        case SweepKind::v_max:
            return "v_max";
    }
    return "?";
}

SweepKind parse_sweep_kind(const std::string& name) {
    if (name == "obstacle_count") return SweepKind::obstacle_count;
    if (name == "safe_distance") return SweepKind::safe_distance;
    if (name == "v_max") return SweepKind::v_max;
    throw std::invalid_argument("unknown sweep parameter '" + name + "'");
}

void ExperimentConfig::validate() const {
    base.validate();
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (planners.empty()) throw std::invalid_argument("at least one planner is required");
    if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
    if (n_obstacles < 0) throw std::invalid_argument("n_obstacles must be >= 0");
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("sweep values must be positive");
        if (sweep == SweepKind::obstacle_count && v != std::floor(v)) {
            throw std::invalid_argument("obstacle counts must be integers");
        }
    }
}

void from_json(const nlohmann::json& j, ExperimentConfig& cfg) {
    if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "scenario") {
            cfg.base = value.get<ScenarioConfig>();
        } else if (key == "planners") {
            cfg.planners.clear();
            for (const auto& p : value) cfg.planners.push_back(parse_planner(p.get<std::string>()));
        } else if (key == "planner") {
            cfg.planners = {parse_planner(value.get<std::string>())};
        } else if (key == "sweep") {
            for (const auto& [skey, svalue] : value.items()) {
                if (skey == "parameter") {
                    cfg.sweep = parse_sweep_kind(svalue.get<std::string>());
                } else if (skey == "values") {
                    cfg.values = svalue.get<std::vector<double>>();
                } else {
                    throw std::invalid_argument("unknown sweep key '" + skey + "'");
                }
            }
        } else if (key == "trials") {
            cfg.trials = value.get<int>();
        } else if (key == "n_obstacles") {
            cfg.n_obstacles = value.get<int>();
        } else if (key == "threads") {
            cfg.threads = value.get<std::size_t>();
        } else {
            throw std::invalid_argument("unknown experiment key '" + key + "'");
        }
    }
    cfg.validate();
}

void to_json(nlohmann::json& j, const ExperimentConfig& cfg) {
    std::vector<std::string> planners;
    for (auto p : cfg.planners) planners.push_back(to_string(p));
    j = {{"scenario", cfg.base},
         {"planners", planners},
         {"sweep", {{"parameter", to_string(cfg.sweep)}, {"values", cfg.values}}},
         {"trials", cfg.trials},
         {"n_obstacles", cfg.n_obstacles}};
}

ScenarioConfig apply_sweep(const ExperimentConfig& cfg, double value, int& n_obstacles) {
    ScenarioConfig sc = cfg.base;
    n_obstacles = cfg.n_obstacles;
    switch (cfg.sweep) {
        case SweepKind::obstacle_count:
            n_obstacles = static_cast<int>(std::lround(value));
            break;
        case SweepKind::safe_distance:
            sc.safe_distance = value;
            break;
        case SweepKind::v_max:
            sc.v_max = Vec2(value, value);
            break;
    }
    sc.validate();
    return sc;
}

MetricsRow aggregate(double sweep_value, PlannerKind planner, std::vector<TrialOutcome> outcomes) {
    MetricsRow row;
    row.sweep_value = sweep_value;
    row.planner = planner;
    double successes = 0.0;
    double total = 0.0;
    for (const auto& o : outcomes) {
        if (o.status == TrialStatus::success) successes += 1.0;
        total += o.time_cost;
    }
    if (!outcomes.empty()) {
        row.success_rate = successes / static_cast<double>(outcomes.size());
        row.mean_time_cost = total / static_cast<double>(outcomes.size());
    }
    row.outcomes = std::move(outcomes);
    return row;
}

Scenario init_scenario(const ScenarioConfig& cfg, int n_obstacles, std::uint64_t seed) {
    if (n_obstacles < 0) throw std::invalid_argument("n_obstacles must be >= 0");
    cfg.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, cfg.workspace_extent.x());
    std::uniform_real_distribution<double> uy(0.0, cfg.workspace_extent.y());
    std::uniform_real_distribution<double> heading(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> speed(kMinSpeed, kMaxSpeed);
    std::uniform_real_distribution<double> burn(0.0, kMaxBurnIn);

    const double keep_out = cfg.c_eff() + kSpawnMargin;
    auto free_position = [&]() {
        for (;;) {
            Vec2 p(ux(rng), uy(rng));
            if ((p - cfg.start).norm() > keep_out) return p;
        }
    };

    std::vector<Obstacle> obstacles;
    obstacles.reserve(static_cast<std::size_t>(n_obstacles));
    for (int i = 0; i < n_obstacles; ++i) {
        const Vec2 p = free_position();
        const double th = heading(rng);
        const double s = speed(rng);
        obstacles.push_back({i, p, Vec2(std::cos(th), std::sin(th)) * s});
    }
    WorldSnapshot world{ObstacleSet(std::move(obstacles), cfg.c_eff()), 0.0, cfg.workspace_extent};

    const auto burn_steps = static_cast<long>(std::floor(burn(rng) / cfg.dt));
    for (long k = 0; k < burn_steps; ++k) world = step_world(world, cfg.dt);

    std::vector<Obstacle> settled = world.obstacles.obstacles();
    for (auto& o : settled) {
        if ((o.p - cfg.start).norm() <= keep_out) o.p = free_position();
    }
    world.obstacles = ObstacleSet(std::move(settled), cfg.c_eff());
    world.t_now = 0.0;
    return {std::move(world), StateTime{cfg.start, Vec2::Zero(), 0.0}};
}

WorldSnapshot step_world(const WorldSnapshot& world, double dt) {
    if (!(dt >= 0.0)) throw std::invalid_argument("dt must be >= 0");
    if (dt == 0.0) return world;
    std::vector<Obstacle> moved = world.obstacles.obstacles();
    for (auto& o : moved) o.p += o.v * dt;
    WorldSnapshot next{ObstacleSet(std::move(moved), world.obstacles.radius()), world.t_now + dt,
                       world.workspace_extent};
    return wrap_obstacles(next);
}

std::vector<Vec2> SimEnvironment::true_positions(double t) const {
    return extrapolate(world_, t);
}

TrialResult run_trial(const ScenarioConfig& cfg, int n_obstacles, PlannerKind planner, std::uint64_t seed,
                      const PlannerParams& params) {
    Scenario sc = init_scenario(cfg, n_obstacles, seed);
    SimEnvironment env(std::move(sc.world));
    TrialResult result;
    result.trace = replan_loop(env, cfg, planner, params);

    TrialOutcome& out = result.outcome;
    out.seed = seed;
    out.status = result.trace.status;
    out.time_cost = result.trace.time_cost;
    std::vector<double> fe;
    std::vector<double> be;
    for (const auto& tick : result.trace.ticks) {
        if (tick.min_clearance < 0.0) ++out.audit_penetrations;
        if (planner == PlannerKind::st) {
            fe.push_back(tick.front_end_ms);
            be.push_back(tick.back_end_ms);
        }
    }
    out.median_front_end_ms = median(std::move(fe));
    out.median_back_end_ms = median(std::move(be));
    return result;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job) {
    if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                job(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
}

std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg, const PlannerParams& params,
                                       const TrialSink& sink) {
    cfg.validate();
    const std::size_t n_values = cfg.values.size();
    const std::size_t n_planners = cfg.planners.size();
    const auto n_trials = static_cast<std::size_t>(cfg.trials);
    std::vector<TrialOutcome> outcomes(n_values * n_planners * n_trials);
    std::mutex sink_mutex;

    parallel_for(outcomes.size(), cfg.threads, [&](std::size_t job) {
        const std::size_t trial = job % n_trials;
        const std::size_t planner = (job / n_trials) % n_planners;
        const std::size_t value = job / (n_trials * n_planners);
        int n_obstacles = 0;
        const ScenarioConfig sc = apply_sweep(cfg, cfg.values[value], n_obstacles);
        const std::uint64_t seed = cfg.base.rng_seed + trial;
        TrialResult r = run_trial(sc, n_obstacles, cfg.planners[planner], seed, params);
        outcomes[job] = r.outcome;
        if (sink) {
            std::lock_guard<std::mutex> lock(sink_mutex);
            sink(cfg.values[value], cfg.planners[planner], static_cast<int>(trial), r);
        }
    });

    std::vector<MetricsRow> rows;
    for (std::size_t v = 0; v < n_values; ++v) {
        for (std::size_t p = 0; p < n_planners; ++p) {
            const auto first = outcomes.begin() + static_cast<std::ptrdiff_t>((v * n_planners + p) * n_trials);
            rows.push_back(aggregate(cfg.values[v], cfg.planners[p],
                                     std::vector<TrialOutcome>(first, first + static_cast<std::ptrdiff_t>(n_trials))));
        }
    }
    return rows;
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& out, const std::string& sequence) {
    if (!sequence.empty()) out << "sequence,";
    out << "sweep_value,planner,success_rate,mean_time_cost,n_trials\n";
    char buf[160];
    for (const auto& row : rows) {
        if (!sequence.empty()) out << sequence << ',';
        std::snprintf(buf, sizeof buf, "%g,%s,%.6f,%.6f,%zu\n", row.sweep_value, to_string(row.planner).c_str(),
                      row.success_rate, row.mean_time_cost, row.outcomes.size());
        out << buf;
    }
}

}  // namespace stplan

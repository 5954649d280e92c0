#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "stplan/core_types.hpp"
#include "stplan/planner.hpp"
#include "stplan/world.hpp"

namespace stplan {

enum class SweepKind { obstacle_count, safe_distance, v_max };

std::string to_string(SweepKind kind);
SweepKind parse_sweep_kind(const std::string& name);

struct ExperimentConfig {
    ScenarioConfig base;
    std::vector<PlannerKind> planners{PlannerKind::st, PlannerKind::vo, PlannerKind::wg};
    SweepKind sweep = SweepKind::obstacle_count;
    std::vector<double> values{20, 40, 60, 80};
    int trials = 30;
    int n_obstacles = 40;  // used unless the sweep is over obstacle_count
    std::size_t threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

/// {"scenario": {...}, "planners": ["st"], "sweep": {"parameter": "...", "values": [...]},
///  "trials": 30, "n_obstacles": 40}. Unknown keys are rejected.
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);
void to_json(nlohmann::json& j, const ExperimentConfig& cfg);

/// Scenario for one sweep point: the base config with the swept field replaced.
/// Returns the obstacle count through `n_obstacles`.
ScenarioConfig apply_sweep(const ExperimentConfig& cfg, double value, int& n_obstacles);

struct TrialOutcome {
    std::uint64_t seed = 0;
    TrialStatus status = TrialStatus::timeout;
    double time_cost = 0.0;
    std::size_t audit_penetrations = 0;  // executed steps with negative clearance
    double median_front_end_ms = 0.0;
    double median_back_end_ms = 0.0;
};

struct MetricsRow {
    double sweep_value = 0.0;
    PlannerKind planner = PlannerKind::st;
    double success_rate = 0.0;
    double mean_time_cost = 0.0;
    std::vector<TrialOutcome> outcomes;
};

/// Mean of the per-trial time costs (failures already carry the timeout).
MetricsRow aggregate(double sweep_value, PlannerKind planner, std::vector<TrialOutcome> outcomes);

struct Scenario {
    WorldSnapshot world;
    StateTime robot;
};

/// Seeded obstacle field: uniform positions in the workspace, uniform
/// headings, speeds uniform in [1.2, 1.8] m/s, followed by a uniform [0, 10] s
/// burn-in. Obstacles within c_eff + 0.2 m of the start are resampled, both at
/// placement and after the burn-in. Time is reset to zero afterwards.
Scenario init_scenario(const ScenarioConfig& cfg, int n_obstacles, std::uint64_t seed);

/// Advance every obstacle by v * dt, then wrap.
WorldSnapshot step_world(const WorldSnapshot& world, double dt);

/// Synthetic world driven by step_world. Ground truth within a step is the
/// unwrapped constant-velocity motion.
class SimEnvironment : public Environment {
public:
    explicit SimEnvironment(WorldSnapshot world) : world_(std::move(world)) {}

    double time() const override { return world_.t_now; }
    WorldSnapshot observe() const override { return world_; }
    std::vector<Vec2> true_positions(double t) const override;
    void step(double dt) override { world_ = step_world(world_, dt); }

private:
    WorldSnapshot world_;
};

struct TrialResult {
    TrialOutcome outcome;
    ExecutionTrace trace;
};

TrialResult run_trial(const ScenarioConfig& cfg, int n_obstacles, PlannerKind planner, std::uint64_t seed,
                      const PlannerParams& params = {});

/// Called once per finished trial (from worker threads, serialized by the harness).
using TrialSink = std::function<void(double sweep_value, PlannerKind planner, int trial, const TrialResult&)>;

/// Runs every (sweep value, planner, trial) combination. Trial k uses seed
/// base.rng_seed + k for every sweep value and planner, so comparisons are paired.
std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg, const PlannerParams& params = {},
                                       const TrialSink& sink = {});

/// Runs `count` jobs over a pool of worker threads; job(i) must be thread safe.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job);

/// Header `sweep_value,planner,success_rate,mean_time_cost,n_trials`, plus a
/// leading `sequence` column when `sequence` is non-empty.
void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& out, const std::string& sequence = {});

}  // namespace stplan

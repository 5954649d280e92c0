#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stplan/core_types.hpp"
#include "stplan/map_optimizer.hpp"
#include "stplan/st_graph.hpp"
#include "stplan/world.hpp"

namespace stplan {

struct PlannerParams {
    FrontEndParams front_end;
    OptimizerParams optimizer;
    int max_iters = 30;
    double lambda0 = 3e-8;
    double vo_window = 2.0;  // time-to-collision truncation for the VO baseline [s]
};

struct PlanResult {
    Trajectory trajectory;
    bool complete = false;
    double front_end_ms = 0.0;
    double back_end_ms = 0.0;
    SolveReport report;
    bool used_fallback = false;  // optimized trajectory failed the clearance audit
    StPath path;
};

/// Samples the piecewise-constant-velocity front-end path every dt. The
/// terminal waypoint carries zero velocity when the path is complete and its
/// arrival velocity otherwise. A single-node path becomes a one-step hold.
Trajectory densify(const StPath& path, double dt);

/// One-step escape used when the front end finds no admissible successor:
/// the grid velocity (or zero) whose first contact within params.vo_window
/// comes latest, ties broken by progress toward the goal.
Trajectory evasive_step(const WorldSnapshot& snapshot, const StateTime& start, const Vec2& goal,
                        const ScenarioConfig& cfg, const PlannerParams& params = {});

/// Smallest clearance (center distance minus c_eff) of the piecewise-linear
/// motion between consecutive waypoints against the extrapolated obstacles.
double trajectory_clearance(const Trajectory& traj, const WorldSnapshot& world, double c_eff);

/// Front end, densification, Timed-ESDF over the path span, MAP refinement.
/// A start-only path is replaced by evasive_step.
/// Throws std::invalid_argument for an inadmissible start.
PlanResult plan_st(const WorldSnapshot& snapshot, const StateTime& start, const Vec2& goal,
                   const ScenarioConfig& cfg, const PlannerParams& params = {});

/// Wait-and-go: full speed toward the goal if the next dt (checked at ten
/// substeps) stays clear of the extrapolated obstacles, otherwise stop.
Vec2 plan_wg(const WorldSnapshot& snapshot, const StateTime& start, const Vec2& goal, const ScenarioConfig& cfg);

/// Velocity obstacles over the front-end velocity grid plus zero, truncated
/// at params.vo_window; picks the surviving velocity with the most progress.
Vec2 plan_vo(const WorldSnapshot& snapshot, const StateTime& start, const Vec2& goal, const ScenarioConfig& cfg,
             const PlannerParams& params = {});

enum class PlannerKind { st, vo, wg };

std::string to_string(PlannerKind kind);
/// Accepts "st", "vo", "wg" in any case. Throws std::invalid_argument otherwise.
PlannerKind parse_planner(const std::string& name);

/// What the replanning loop drives: a world that can be observed, stepped,
/// and queried for ground-truth obstacle positions within the next step.
class Environment {
public:
    virtual ~Environment() = default;
    virtual double time() const = 0;
    virtual WorldSnapshot observe() const = 0;
    /// Ground-truth obstacle centers at time t in [time(), time() + dt].
    virtual std::vector<Vec2> true_positions(double t) const = 0;
    virtual void step(double dt) = 0;
};

struct TickRecord {
    double t = 0.0;
    StateTime robot;
    Vec2 command = Vec2::Zero();
    bool plan_complete = false;
    std::size_t plan_waypoints = 0;
    double plan_objective = 0.0;
    bool used_fallback = false;
    double front_end_ms = 0.0;
    double back_end_ms = 0.0;
    double min_clearance = 0.0;        // audited over the executed step
    std::vector<Obstacle> obstacles;   // observed at the start of the tick
};

enum class TrialStatus { success, collision, timeout, planner_error, spawned_in_collision };

std::string to_string(TrialStatus status);

struct ExecutionTrace {
    std::vector<TickRecord> ticks;
    TrialStatus status = TrialStatus::timeout;
    double time_cost = 0.0;     // arrival time on success, the timeout otherwise
    double finish_time = 0.0;   // elapsed time when the loop stopped
    std::string message;
    StateTime final_state;

    bool success() const { return status == TrialStatus::success; }
};

/// One JSON object per tick, then a summary line. Timings are left out when
/// `deterministic` is set so reruns compare byte for byte.
void write_trace_jsonl(const ExecutionTrace& trace, std::ostream& out, bool deterministic);

constexpr double kGoalTolerance = 0.2;
constexpr int kAuditSubsteps = 10;

/// Receding-horizon loop: observe, plan, execute one dt, audit the executed
/// step at dt/10 against ground truth, advance. Stops on goal (within 0.2 m),
/// audited collision, planner exception, or cfg.timeout.
ExecutionTrace replan_loop(Environment& env, const ScenarioConfig& cfg, PlannerKind planner,
                           const PlannerParams& params = {});

}  // namespace stplan

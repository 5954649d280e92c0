#include "stplan/planner.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "stplan/kinematics.hpp"
#include "stplan/timed_esdf.hpp"

namespace stplan {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

Trajectory evasive_step(const WorldSnapshot& snapshot, const StateTime& start, const Vec2& goal,
                        const ScenarioConfig& cfg, const PlannerParams& params) {
    const StateTimeGraph grid(snapshot, cfg, params.front_end);
    std::vector<Vec2> candidates = grid.velocity_candidates();
    candidates.push_back(Vec2::Zero());
    const Vec2 delta = goal - start.p;
    const Vec2 goal_dir = delta.norm() > 1e-12 ? Vec2(delta.normalized()) : Vec2::Zero();
    const double elapsed = start.t - snapshot.t_now;

    Vec2 best = Vec2::Zero();
    double best_contact = -1.0;
    double best_progress = -std::numeric_limits<double>::infinity();
    for (const Vec2& v : candidates) {
        if (!within_workspace(start.p + v * cfg.dt, cfg.workspace_extent)) continue;
        double contact = params.vo_window;
        for (const auto& o : snapshot.obstacles.obstacles()) {
            const double tau = first_contact(start.p - extrapolate(o, elapsed), v - o.v, cfg.c_eff(), params.vo_window);
            contact = std::min(contact, tau);
        }
        const double progress = goal_dir.dot(v);
        if (contact > best_contact + 1e-12 ||
            (std::abs(contact - best_contact) <= 1e-12 && progress > best_progress + 1e-12)) {
            best = v;
            best_contact = contact;
            best_progress = progress;
        }
    }
    return Trajectory({{start.p, best, start.t}, {start.p + best * cfg.dt, best, start.t}}, cfg.dt);
}

Trajectory densify(const StPath& path, double dt) {
    if (path.nodes.empty()) {
        throw std::invalid_argument("cannot densify an empty path");
    }
    const StateTime& first = path.nodes.front().state;
    if (path.nodes.size() == 1) {
        return Trajectory({{first.p, Vec2::Zero(), first.t}, {first.p, Vec2::Zero(), first.t}}, dt);
    }
    std::vector<StateTime> wps;
    Vec2 last_velocity = Vec2::Zero();
    for (std::size_t n = 0; n + 1 < path.nodes.size(); ++n) {
        const DualNode& a = path.nodes[n];
        const DualNode& b = path.nodes[n + 1];
        const int steps = b.slice - a.slice;
        if (steps < 1) {
            throw std::invalid_argument("path node times must increase");
        }
        const Vec2 v = (b.state.p - a.state.p) / (steps * dt);
        for (int k = 0; k < steps; ++k) {
            wps.push_back({a.state.p + v * (k * dt), v, first.t});
        }
        last_velocity = v;
    }
    wps.push_back({path.nodes.back().state.p, path.complete ? Vec2::Zero() : last_velocity, first.t});
    return Trajectory(std::move(wps), dt);
}

double trajectory_clearance(const Trajectory& traj, const WorldSnapshot& world, double c_eff) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const Vec2 v = (traj[i + 1].p - traj[i].p) / traj.dt();
        const double elapsed = traj[i].t - world.t_now;
        for (const auto& o : world.obstacles.obstacles()) {
            const auto ca = closest_approach(traj[i].p - extrapolate(o, elapsed), v - o.v, traj.dt());
            best = std::min(best, ca.distance - c_eff);
        }
    }
    return best;
}

PlanResult plan_st(const WorldSnapshot& snapshot, const StateTime& start, const Vec2& goal,
                   const ScenarioConfig& cfg, const PlannerParams& params) {
    auto t_front = std::chrono::steady_clock::now();
    StateTimeGraph graph(snapshot, cfg, params.front_end);
    StPath path = state_time_astar(graph, start, goal);
    const double front_ms = elapsed_ms(t_front);

    auto t_back = std::chrono::steady_clock::now();
    Trajectory init = densify(path, cfg.dt);
    const double horizon = static_cast<double>(init.size()) * cfg.dt;
    auto field = std::make_shared<TimedEsdf>(
        TimedEsdf::build(snapshot, init.t0(), horizon, cfg.dt, cfg.c_eff(), cfg.epsilon));
    FactorGraph factors(init.size(), cfg.dt, field, params.optimizer);
    OptimizeResult solved = optimize(init, factors, params.max_iters, params.lambda0);

    bool fallback = false;
    if (trajectory_clearance(solved.trajectory, snapshot, cfg.c_eff()) <= 0.0 &&
        trajectory_clearance(init, snapshot, cfg.c_eff()) > 0.0) {
        fallback = true;
    }
    Trajectory chosen = fallback ? init : solved.trajectory;
    if (path.nodes.size() == 1) {
        chosen = evasive_step(snapshot, start, goal, cfg, params);
    }
    const double back_ms = elapsed_ms(t_back);

    PlanResult result{std::move(chosen),
                      path.complete,
                      front_ms,
                      back_ms,
                      solved.report,
                      fallback,
                      std::move(path)};
    return result;
}

Vec2 plan_wg(const WorldSnapshot& snapshot, const StateTime& start, const Vec2& goal, const ScenarioConfig& cfg) {
    const Vec2 delta = goal - start.p;
    const double d = delta.norm();
    if (d < 1e-12) return Vec2::Zero();
    const Vec2 dir = delta / d;
    const double speed = std::min(max_speed_along(dir, cfg.v_max), d / cfg.dt);
    const Vec2 v = clamp_velocity(dir * speed, cfg.v_max);
    for (int j = 1; j <= kAuditSubsteps; ++j) {
        const double tau = cfg.dt * j / kAuditSubsteps;
        if (min_clearance(snapshot, start.p + v * tau, snapshot.t_now + tau, cfg.c_eff()) < 0.0) {
            return Vec2::Zero();
        }
    }
    return v;
}

Vec2 plan_vo(const WorldSnapshot& snapshot, const StateTime& start, const Vec2& goal, const ScenarioConfig& cfg,
             const PlannerParams& params) {
    const StateTimeGraph grid(snapshot, cfg, params.front_end);
    const Vec2 delta = goal - start.p;
    const double d = delta.norm();
    const Vec2 goal_dir = d > 1e-12 ? Vec2(delta / d) : Vec2::Zero();

    std::vector<Vec2> candidates;
    for (const Vec2& v : grid.velocity_candidates()) {
        const double step = v.norm() * cfg.dt;
        candidates.push_back(step > d && step > 0.0 ? Vec2(v * (d / step)) : v);
    }
    candidates.push_back(Vec2::Zero());

    const double elapsed = start.t - snapshot.t_now;
    std::optional<Vec2> best;
    double best_progress = -std::numeric_limits<double>::infinity();
    double best_alignment = -std::numeric_limits<double>::infinity();
    for (const Vec2& v : candidates) {
        if (!within_workspace(start.p + v * cfg.dt, cfg.workspace_extent)) continue;
        bool blocked = false;
        for (const auto& o : snapshot.obstacles.obstacles()) {
            const Obstacle now{o.id, extrapolate(o, elapsed), o.v};
            if (in_velocity_obstacle(v, start.p, now, cfg.c_eff(), params.vo_window)) {
                blocked = true;
                break;
            }
        }
        if (blocked) continue;
        const double progress = goal_dir.dot(v);
        const double alignment = v.norm() > 0.0 ? goal_dir.dot(v.normalized()) : -2.0;
        if (progress > best_progress + 1e-12 ||
            (std::abs(progress - best_progress) <= 1e-12 && alignment > best_alignment)) {
            best = v;
            best_progress = progress;
            best_alignment = alignment;
        }
    }
    return best.value_or(Vec2::Zero());
}

std::string to_string(PlannerKind kind) {
    switch (kind) {
        case PlannerKind::st:
            return "ST";
        case PlannerKind::vo:
            return "VO";
        case PlannerKind::wg:
            return "WG";
    }
    return "?";
}

PlannerKind parse_planner(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "st") return PlannerKind::st;
    if (lower == "vo") return PlannerKind::vo;
    if (lower == "wg") return PlannerKind::wg;
    throw std::invalid_argument("unknown planner '" + name + "' (expected st, vo or wg)");
}

std::string to_string(TrialStatus status) {
    switch (status) {
        case TrialStatus::success:
            return "success";
        case TrialStatus::collision:
            return "collision";
        case TrialStatus::timeout:
            return "timeout";
        case TrialStatus::planner_error:
            return "planner_error";
        case TrialStatus::spawned_in_collision:
            return "spawned_in_collision";
    }
    return "?";
}

void write_trace_jsonl(const ExecutionTrace& trace, std::ostream& out, bool deterministic) {
    for (const auto& tick : trace.ticks) {
        nlohmann::json j{
            {"t", tick.t},
            {"p", {tick.robot.p.x(), tick.robot.p.y()}},
            {"v", {tick.robot.v.x(), tick.robot.v.y()}},
            {"command", {tick.command.x(), tick.command.y()}},
            {"plan", {{"complete", tick.plan_complete},
                      {"waypoints", tick.plan_waypoints},
                      {"objective", tick.plan_objective},
                      {"fallback", tick.used_fallback}}},
            {"min_clearance", tick.min_clearance},
        };
        if (!deterministic) {
            j["timings"] = {{"front_end_ms", tick.front_end_ms}, {"back_end_ms", tick.back_end_ms}};
        }
        out << j.dump() << '\n';
    }
    nlohmann::json summary{{"status", to_string(trace.status)},
                           {"time_cost", trace.time_cost},
                           {"finish_time", trace.finish_time},
                           {"ticks", trace.ticks.size()}};
    if (!trace.message.empty()) summary["message"] = trace.message;
    out << summary.dump() << '\n';
}

namespace {

double step_clearance(const Environment& env, const Vec2& p0, const Vec2& v, double t0, double dt, double c_eff) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= kAuditSubsteps; ++j) {
        const double tau = dt * j / kAuditSubsteps;
        const Vec2 robot = p0 + v * tau;
        for (const Vec2& o : env.true_positions(t0 + tau)) {
            best = std::min(best, (robot - o).norm() - c_eff);
        }
    }
    return best;
}

}  // namespace

ExecutionTrace replan_loop(Environment& env, const ScenarioConfig& cfg, PlannerKind planner,
                           const PlannerParams& params) {
    cfg.validate();
    ExecutionTrace trace;
    const double t_start = env.time();
    StateTime robot{cfg.start, Vec2::Zero(), t_start};

    auto finish = [&](TrialStatus status, std::string message = {}) {
        trace.status = status;
        trace.finish_time = robot.t - t_start;
        trace.time_cost = status == TrialStatus::success ? trace.finish_time : cfg.timeout;
        trace.message = std::move(message);
        trace.final_state = robot;
        return trace;
    };

    double spawn_clearance = std::numeric_limits<double>::infinity();
    for (const Vec2& o : env.true_positions(t_start)) {
        spawn_clearance = std::min(spawn_clearance, (cfg.start - o).norm() - cfg.c_eff());
    }
    if (spawn_clearance < 0.0) {
        return finish(TrialStatus::spawned_in_collision);
    }

    // Ticks are counted, not accumulated, so the clock stays on the dt grid.
    for (long tick = 0;; ++tick) {
        robot.t = t_start + static_cast<double>(tick) * cfg.dt;
        if ((robot.p - cfg.goal).norm() <= kGoalTolerance) {
            return finish(TrialStatus::success);
        }
        if (robot.t - t_start >= cfg.timeout - 1e-9) {
            return finish(TrialStatus::timeout);
        }

        // Wrapped obstacles can reappear on top of the robot between ticks.
        if (tick > 0) {
            for (const Vec2& o : env.true_positions(env.time())) {
                if ((robot.p - o).norm() < cfg.c_eff()) return finish(TrialStatus::collision, "obstacle entered the robot");
            }
        }

        TickRecord rec;
        rec.t = robot.t - t_start;
        rec.robot = robot;
        WorldSnapshot snapshot = env.observe();
        rec.obstacles = snapshot.obstacles.obstacles();
        Vec2 command = Vec2::Zero();
        try {
            const StateTime here{robot.p, robot.v, snapshot.t_now};
            switch (planner) {
                case PlannerKind::st: {
                    const PlanResult plan = plan_st(snapshot, here, cfg.goal, cfg, params);
                    command = clamp_velocity((plan.trajectory[1].p - robot.p) / cfg.dt, cfg.v_max);
                    rec.plan_complete = plan.complete;
                    rec.plan_waypoints = plan.trajectory.size();
                    rec.plan_objective = plan.report.final_objective;
                    rec.used_fallback = plan.used_fallback;
                    rec.front_end_ms = plan.front_end_ms;
                    rec.back_end_ms = plan.back_end_ms;
                    break;
                }
                case PlannerKind::vo:
                    command = plan_vo(snapshot, here, cfg.goal, cfg, params);
                    break;
                case PlannerKind::wg:
                    command = plan_wg(snapshot, here, cfg.goal, cfg);
                    break;
            }
        } catch (const std::exception& e) {
            trace.ticks.push_back(std::move(rec));
            return finish(TrialStatus::planner_error, e.what());
        }

        rec.command = command;
        rec.min_clearance = step_clearance(env, robot.p, command, env.time(), cfg.dt, cfg.c_eff());
        const bool collided = rec.min_clearance < 0.0;
        trace.ticks.push_back(std::move(rec));

        env.step(cfg.dt);
        robot.p += command * cfg.dt;
        robot.v = command;
        robot.t = t_start + static_cast<double>(tick + 1) * cfg.dt;
        if (collided) {
            return finish(TrialStatus::collision);
        }
    }
}

}  // namespace stplan

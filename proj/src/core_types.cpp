#include "stplan/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace stplan {

bool is_finite(const Vec2& v) { return std::isfinite(v.x()) && std::isfinite(v.y()); }

Vec4 StateTime::state() const { return Vec4(p.x(), p.y(), v.x(), v.y()); }

bool is_finite(const StateTime& s) { return is_finite(s.p) && is_finite(s.v) && std::isfinite(s.t); }

Trajectory::Trajectory(std::vector<StateTime> waypoints, double dt) : waypoints_(std::move(waypoints)), dt_(dt) {
    if (waypoints_.size() < 2) {
        throw std::invalid_argument("trajectory needs at least two waypoints");
    }
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
        throw std::invalid_argument("trajectory dt must be positive");
    }
    const double t0 = waypoints_.front().t;
    for (std::size_t i = 0; i < waypoints_.size(); ++i) {
        waypoints_[i].t = t0 + static_cast<double>(i) * dt_;
        if (!is_finite(waypoints_[i])) {
            throw std::invalid_argument("trajectory waypoint is not finite");
        }
    }
}

Trajectory Trajectory::from_states(double t0, double dt, const std::vector<Vec4>& states) {
    std::vector<StateTime> wps;
    wps.reserve(states.size());
    for (const auto& x : states) {
        wps.push_back({x.head<2>(), x.tail<2>(), t0});
    }
    return Trajectory(std::move(wps), dt);
}

std::vector<Vec4> Trajectory::states() const {
    std::vector<Vec4> out;
    out.reserve(waypoints_.size());
    for (const auto& w : waypoints_) {
        out.push_back(w.state());
    }
    return out;
}

ObstacleSet::ObstacleSet(std::vector<Obstacle> obstacles, double radius)
    : obstacles_(std::move(obstacles)), radius_(radius) {
    if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
        throw std::invalid_argument("obstacle radius must be positive");
    }
    std::set<int> ids;
    for (const auto& o : obstacles_) {
        if (!is_finite(o.p) || !is_finite(o.v)) {
            throw std::invalid_argument("obstacle state is not finite");
        }
        if (!ids.insert(o.id).second) {
            throw std::invalid_argument("duplicate obstacle id " + std::to_string(o.id));
        }
    }
}

void ScenarioConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(what);
    };
    require(is_finite(workspace_extent) && workspace_extent.x() > 0 && workspace_extent.y() > 0,
            "workspace_extent must be positive");
    require(is_finite(v_max) && v_max.x() > 0 && v_max.y() > 0, "v_max must be positive");
    require(std::isfinite(safe_distance) && safe_distance > 0, "safe_distance must be positive");
    require(std::isfinite(robot_radius) && robot_radius >= 0, "robot_radius must be non-negative");
    require(std::isfinite(epsilon) && epsilon >= 0, "epsilon must be non-negative");
    require(std::isfinite(dt) && dt > 0, "dt must be positive");
    require(std::isfinite(horizon) && horizon >= dt, "horizon must be at least dt");
    require(std::isfinite(timeout) && timeout > 0, "timeout must be positive");
    require(is_finite(start) && is_finite(goal), "start and goal must be finite");
}

namespace {

nlohmann::json vec_json(const Vec2& v) { return nlohmann::json::array({v.x(), v.y()}); }

Vec2 json_vec(const nlohmann::json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw std::invalid_argument("config field '" + key + "' must be a two-element number array");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

double json_num(const nlohmann::json& j, const std::string& key) {
    if (!j.is_number()) {
        throw std::invalid_argument("config field '" + key + "' must be a number");
    }
    return j.get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const ScenarioConfig& cfg) {
    j = nlohmann::json{
        {"workspace_extent", vec_json(cfg.workspace_extent)},
        {"v_max", vec_json(cfg.v_max)},
        {"safe_distance", cfg.safe_distance},
        {"robot_radius", cfg.robot_radius},
        {"epsilon", cfg.epsilon},
        {"dt", cfg.dt},
        {"horizon", cfg.horizon},
        {"timeout", cfg.timeout},
        {"start", vec_json(cfg.start)},
        {"goal", vec_json(cfg.goal)},
        {"rng_seed", cfg.rng_seed},
    };
}

void from_json(const nlohmann::json& j, ScenarioConfig& cfg) {
    if (!j.is_object()) {
        throw std::invalid_argument("scenario config must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "workspace_extent") {
            cfg.workspace_extent = json_vec(value, key);
        } else if (key == "v_max") {
            cfg.v_max = json_vec(value, key);
        } else if (key == "safe_distance") {
            cfg.safe_distance = json_num(value, key);
        } else if (key == "robot_radius") {
            cfg.robot_radius = json_num(value, key);
        } else if (key == "epsilon") {
            cfg.epsilon = json_num(value, key);
        } else if (key == "dt") {
            cfg.dt = json_num(value, key);
        } else if (key == "horizon") {
            cfg.horizon = json_num(value, key);
        } else if (key == "timeout") {
            cfg.timeout = json_num(value, key);
        } else if (key == "start") {
            cfg.start = json_vec(value, key);
        } else if (key == "goal") {
            cfg.goal = json_vec(value, key);
        } else if (key == "rng_seed") {
            if (!value.is_number_integer() || value.get<long long>() < 0) {
                throw std::invalid_argument("config field 'rng_seed' must be a non-negative integer");
            }
            cfg.rng_seed = value.get<std::uint64_t>();
        } else {
            throw std::invalid_argument("unknown config field '" + key + "'");
        }
    }
    cfg.validate();
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("override must look like key=value: " + assignment);
    }
    const std::string key = assignment.substr(0, eq);
    nlohmann::json value;
    try {
        value = nlohmann::json::parse(assignment.substr(eq + 1));
    } catch (const nlohmann::json::parse_error&) {
        throw std::invalid_argument("override value for '" + key + "' is not valid JSON");
    }
    nlohmann::json j = cfg;
    j[key] = value;
    ScenarioConfig updated;
    from_json(j, updated);
    cfg = updated;
}

StateTime sample_trajectory(const Trajectory& traj, double t) {
    constexpr double kTol = 1e-12;
    if (!(t >= traj.t0() - kTol) || !(t <= traj.t_end() + kTol)) {
        throw std::out_of_range("sample time outside trajectory span");
    }
    const double u = (t - traj.t0()) / traj.dt();
    auto i = static_cast<std::size_t>(std::max(0.0, std::floor(u)));
    i = std::min(i, traj.size() - 1);
    if (std::abs(t - traj.time_at(i)) <= kTol) {
        return traj[i];
    }
    if (i + 1 < traj.size() && std::abs(t - traj.time_at(i + 1)) <= kTol) {
        return traj[i + 1];
    }
    if (i + 1 >= traj.size()) {
        return traj.back();
    }
    const double a = (t - traj.time_at(i)) / traj.dt();
    const auto& w0 = traj[i];
    const auto& w1 = traj[i + 1];
    return {w0.p + a * (w1.p - w0.p), w0.v + a * (w1.v - w0.v), t};
}

Vec2 clamp_velocity(const Vec2& v, const Vec2& v_max) {
    return {std::clamp(v.x(), -v_max.x(), v_max.x()), std::clamp(v.y(), -v_max.y(), v_max.y())};
}

double max_speed_along(const Vec2& dir, const Vec2& v_max) {
    double s = std::numeric_limits<double>::infinity();
    if (std::abs(dir.x()) > 1e-15) s = std::min(s, v_max.x() / std::abs(dir.x()));
    if (std::abs(dir.y()) > 1e-15) s = std::min(s, v_max.y() / std::abs(dir.y()));
    return std::isfinite(s) ? s : 0.0;
}

bool within_workspace(const Vec2& p, const Vec2& extent) {
    return p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= extent.x() && p.y() <= extent.y();
}

}  // namespace stplan

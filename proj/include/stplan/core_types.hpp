#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace stplan {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

bool is_finite(const Vec2& v);

/// Robot position and velocity stamped with time. A point of the state-time space.
struct StateTime {
    Vec2 p = Vec2::Zero();
    Vec2 v = Vec2::Zero();
    double t = 0.0;

    /// Stacked [p; v].
    Vec4 state() const;
};

bool is_finite(const StateTime& s);

/// Waypoints on a uniform time grid.
///
/// Times are always regenerated as t0 + i * dt on construction, so spacing is
/// exact and never the result of accumulated sums. Any time stamps carried by
/// the input waypoints are ignored except for the first one.
class Trajectory {
public:
    Trajectory(std::vector<StateTime> waypoints, double dt);

    /// Builds a trajectory from stacked [p; v] states.
    static Trajectory from_states(double t0, double dt, const std::vector<Vec4>& states);

    std::size_t size() const { return waypoints_.size(); }
    const StateTime& operator[](std::size_t i) const { return waypoints_[i]; }
    const std::vector<StateTime>& waypoints() const { return waypoints_; }
    const StateTime& front() const { return waypoints_.front(); }
    const StateTime& back() const { return waypoints_.back(); }
    double dt() const { return dt_; }
    double t0() const { return waypoints_.front().t; }
    double t_end() const { return waypoints_.back().t; }
    double time_at(std::size_t i) const { return t0() + static_cast<double>(i) * dt_; }

    std::vector<Vec4> states() const;

private:
    std::vector<StateTime> waypoints_;
    double dt_;
};

struct Obstacle {
    int id = 0;
    Vec2 p = Vec2::Zero();
    Vec2 v = Vec2::Zero();
};

/// Disc obstacles sharing one radius.
class ObstacleSet {
public:
    ObstacleSet() = default;
    ObstacleSet(std::vector<Obstacle> obstacles, double radius);

    const std::vector<Obstacle>& obstacles() const { return obstacles_; }
    double radius() const { return radius_; }
    std::size_t size() const { return obstacles_.size(); }
    bool empty() const { return obstacles_.empty(); }
    const Obstacle& operator[](std::size_t i) const { return obstacles_[i]; }

private:
    std::vector<Obstacle> obstacles_;
    double radius_ = 0.3;
};

struct ScenarioConfig {
    Vec2 workspace_extent{10.0, 10.0};
    Vec2 v_max{1.8, 1.8};
    double safe_distance = 0.3;
    double robot_radius = 0.0;
    double epsilon = 0.2;
    double dt = 0.1;
    double horizon = 10.0;
    double timeout = 30.0;
    Vec2 start{0.0, 5.0};
    Vec2 goal{10.0, 5.0};
    std::uint64_t rng_seed = 0;

    /// Inflated clearance radius used by every collision test.
    double c_eff() const { return safe_distance + robot_radius; }

    /// Throws std::invalid_argument on a violated invariant.
    void validate() const;
};

void to_json(nlohmann::json& j, const ScenarioConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, ScenarioConfig& cfg);

/// Applies a "key=value" override to a config. The value is parsed as JSON,
/// so vectors are written as `start=[0,5]`.
void apply_override(ScenarioConfig& cfg, const std::string& assignment);

/// Linear interpolation of position and velocity; exact at knots.
/// Throws std::out_of_range outside [t0, t_end].
StateTime sample_trajectory(const Trajectory& traj, double t);

Vec2 clamp_velocity(const Vec2& v, const Vec2& v_max);

/// Largest speed along unit direction `dir` that respects the per-axis box.
double max_speed_along(const Vec2& dir, const Vec2& v_max);

bool within_workspace(const Vec2& p, const Vec2& extent);

}  // namespace stplan

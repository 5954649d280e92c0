#pragma once

#include <iosfwd>
#include <vector>

#include "stplan/core_types.hpp"
#include "stplan/world.hpp"

namespace stplan {

/// Segment swept by one obstacle center over a slice: a at the slice start,
/// b = a + v * dt at its end.
struct ObstacleSegment {
    int obstacle_id = 0;
    Vec2 a = Vec2::Zero();
    Vec2 b = Vec2::Zero();
    Vec2 v = Vec2::Zero();
    double radius = 0.0;
};

struct DistanceResult {
    double d = 0.0;                 // signed clearance, negative inside the inflated radius
    Vec2 grad_p = Vec2::Zero();     // d(d)/d(p_r)
    Vec2 grad_v = Vec2::Zero();     // d(d)/d(v) = tau_star * grad_p
    double tau_star = 0.0;          // offset into the slice of the closest approach
    int obstacle_id = -1;           // -1 when there are no obstacles
};

/// Signed distance keyed by (position, velocity, time).
///
/// For a query state (p, v, t) in slice i, each obstacle contributes the
/// closest approach between the robot sweeping p + v * tau and the obstacle
/// sweeping its segment, tau in [0, dt]. Evaluation is analytic; nothing is
/// rasterized.
class TimedEsdf {
public:
    static TimedEsdf build(const WorldSnapshot& world, double t0, double horizon, double dt, double c_eff,
                           double epsilon);

    /// Throws std::out_of_range when s.t lies outside [t0, t0 + horizon).
    DistanceResult query(const StateTime& s) const;

    std::size_t slice_count() const { return slices_.size(); }
    std::size_t slice_index(double t) const;
    const std::vector<ObstacleSegment>& slice(std::size_t i) const { return slices_.at(i); }
    double t0() const { return t0_; }
    double dt() const { return dt_; }
    double horizon() const { return static_cast<double>(slices_.size()) * dt_; }
    double epsilon() const { return epsilon_; }
    double c_eff() const { return c_eff_; }

private:
    std::vector<std::vector<ObstacleSegment>> slices_;
    double t0_ = 0.0;
    double dt_ = 0.1;
    double c_eff_ = 0.0;
    double epsilon_ = 0.0;
};

/// max(epsilon - d, 0); zero at d == epsilon.
double hinge(double d, double epsilon);

/// True iff some t > 0 brings the robot (p_r + v t) within c_eff of the
/// obstacle center (p_k + v_k t).
bool in_velocity_obstacle(const Vec2& v, const Vec2& p_r, const Obstacle& obstacle, double c_eff);

/// Same test restricted to t in (0, window].
bool in_velocity_obstacle(const Vec2& v, const Vec2& p_r, const Obstacle& obstacle, double c_eff, double window);

/// Writes "x,y,d" rows sampling one slice at the given robot velocity.
void write_slice_csv(const TimedEsdf& field, std::size_t slice, const Vec2& velocity, const Vec2& extent,
                     double resolution, std::ostream& out);

}  // namespace stplan

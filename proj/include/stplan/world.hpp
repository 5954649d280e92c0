#pragma once

#include <vector>

#include "stplan/core_types.hpp"

namespace stplan {

/// Obstacles as observed at t_now. Planning-side predictions extrapolate at
/// constant velocity and never wrap.
struct WorldSnapshot {
    ObstacleSet obstacles;
    double t_now = 0.0;
    Vec2 workspace_extent{10.0, 10.0};
};

/// Obstacle positions at time t >= t_now. Throws std::invalid_argument for t < t_now.
std::vector<Vec2> extrapolate(const WorldSnapshot& snapshot, double t);

/// Position of one obstacle `elapsed` seconds after the snapshot.
inline Vec2 extrapolate(const Obstacle& o, double elapsed) { return o.p + o.v * elapsed; }

/// min_i |p - position_i(t)| - c_eff. Negative means (p, t) is inside an
/// inflated obstacle. Returns +infinity when there are no obstacles.
double min_clearance(const WorldSnapshot& snapshot, const Vec2& p, double t, double c_eff);

/// Teleports every obstacle that left [0, extent] to the antipodal point:
/// p <- extent - p, then each exited coordinate is placed on its entry
/// boundary. Velocities are unchanged.
WorldSnapshot wrap_obstacles(const WorldSnapshot& snapshot);

}  // namespace stplan

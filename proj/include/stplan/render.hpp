#pragma once

#include <iosfwd>

#include "stplan/core_types.hpp"
#include "stplan/timed_esdf.hpp"
#include "stplan/world.hpp"

namespace stplan {

/// Workspace outline, each obstacle's swept segment over the trajectory span,
/// its disc at the snapshot time, start and goal markers, and the trajectory
/// as a single polyline. A generation timestamp comment is added unless
/// `deterministic`.
void write_plan_svg(const WorldSnapshot& world, const Trajectory& traj, const ScenarioConfig& cfg,
                    std::ostream& out, bool deterministic);

/// Heatmap of the hinge-free distance d on one slice at the given robot
/// velocity, sampled every `resolution` meters.
void write_esdf_svg(const TimedEsdf& field, std::size_t slice, const Vec2& velocity, const Vec2& extent,
                    double resolution, std::ostream& out);

}  // namespace stplan

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "stplan/core_types.hpp"
#include "stplan/triangulation.hpp"
#include "stplan/world.hpp"

namespace stplan {

/// Discretization of the node-placement problem.
struct FrontEndParams {
    int headings = 16;
    std::vector<double> speed_fractions{0.5, 1.0};  // of the per-axis-clamped max speed
    int time_candidates = 10;                       // Q, uniform over (0, max_step_time]
    double max_step_time = 1.0;                     // t_m
    double alignment_weight = 1.0;                  // alpha [m]
    std::size_t max_expansions = 3000;
};

/// Delaunay triangulation of the extrapolated obstacle centers (plus the
/// workspace corners) at t_now + t_index * dt.
struct SliceGraph {
    int t_index = 0;
    double time = 0.0;
    Triangulation tri;
};

SliceGraph build_slice(const WorldSnapshot& world, int t_index, double dt);

struct DualNode {
    StateTime state;
    int slice = 0;
    int triangle = -1;   // -1 for the goal terminus
    double g = 0.0;
    double h = 0.0;
    int parent = -1;     // index into StPath::nodes
};

struct StPath {
    std::vector<DualNode> nodes;
    bool complete = false;
    std::size_t expansions = 0;
};

/// d if d_obs > d0, else d * (2 - d_obs / d0). Never below d for d_obs >= 0.
double navi_cost_value(double length, double d_obs, double d0);

/// NaviCost of the constant-velocity segment a -> b: length penalized by the
/// closest obstacle-center distance along it, with d0 = 2 * c_s.
double navi_cost(const StateTime& a, const StateTime& b, const WorldSnapshot& world, double c_s);

/// On-demand state-time dual graph over one world snapshot.
///
/// Slices are triangulated lazily and cached. Node placement enumerates
/// headings x speeds x arrival offsets; clearance against every
/// extrapolated obstacle is decided in closed form over the whole
/// constant-velocity segment.
class StateTimeGraph {
public:
    StateTimeGraph(WorldSnapshot world, ScenarioConfig cfg, FrontEndParams params = {});

    const SliceGraph& slice(int t_index);
    double slice_time(int t_index) const { return world_.t_now + t_index * cfg_.dt; }
    int slice_of(double t) const;

    const WorldSnapshot& world() const { return world_; }
    const ScenarioConfig& config() const { return cfg_; }
    const FrontEndParams& params() const { return params_; }

    /// Velocity grid: headings x speed fractions, speeds clamped to the per-axis box.
    const std::vector<Vec2>& velocity_candidates() const { return velocities_; }

    /// Arrival offsets tau_q = q * t_m / Q, q = 1..Q.
    std::vector<double> time_candidates() const;

    /// Latest safe arrival offset per velocity candidate from `current`:
    /// a candidate (v, tau) keeps clearance iff tau < result[v].
    std::vector<double> safe_horizons(const StateTime& current) const;

    /// Best admissible placement inside `target_triangle` of the slice holding
    /// `current`, or nullopt when no candidate satisfies every constraint.
    /// `progress_dir` is the start-goal vector of the surrounding search.
    std::optional<StateTime> place_node(const StateTime& current, int target_triangle, const Vec2& goal,
                                        const Vec2& progress_dir);

    /// Same, reusing safe_horizons(current).
    std::optional<StateTime> place_node(const StateTime& current, int target_triangle, const Vec2& goal,
                                        const Vec2& progress_dir, const std::vector<double>& horizons);

    /// Direct constant-velocity connection to the goal, at the fastest
    /// feasible speed rounded up to whole time steps, if it is collision free
    /// and arrives no later than t_start + horizon.
    std::optional<StateTime> goal_connection(const StateTime& from, const Vec2& goal, double t_start) const;

    /// Triangles reachable from a node in `triangle`: itself plus its edge neighbors.
    std::vector<int> successor_triangles(int t_index, int triangle);

private:
    bool segment_clear(const StateTime& from, const Vec2& velocity, double duration) const;

    WorldSnapshot world_;
    ScenarioConfig cfg_;
    FrontEndParams params_;
    std::vector<Vec2> velocities_;
    int steps_per_candidate_ = 1;
    std::map<int, SliceGraph> slices_;
    std::unordered_map<int, std::size_t> obstacle_index_;
};

/// State-time A*: heuristic is Euclidean distance to the goal, edge cost is
/// NaviCost, nodes are keyed by (slice, triangle). Returns a complete path
/// when a goal connection is popped; otherwise, on OPEN exhaustion, on a
/// popped node at or beyond the horizon, or on the expansion cap, the path
/// to the expanded node nearest to the goal with complete = false.
/// Throws std::invalid_argument for an inadmissible start.
StPath state_time_astar(const StateTime& start, const Vec2& goal, const WorldSnapshot& world,
                        const ScenarioConfig& cfg, const FrontEndParams& params = {},
                        std::ostream* debug = nullptr);

/// Same search on an existing graph (slices already built are reused).
StPath state_time_astar(StateTimeGraph& graph, const StateTime& start, const Vec2& goal,
                        std::ostream* debug = nullptr);

}  // namespace stplan

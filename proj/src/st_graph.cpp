#include "stplan/st_graph.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <queue>
#include <stdexcept>

#include <json.hpp>

#include "stplan/kinematics.hpp"
#include "stplan/predicates.hpp"

namespace stplan {

SliceGraph build_slice(const WorldSnapshot& world, int t_index, double dt) {
    if (t_index < 0) {
        throw std::invalid_argument("slice index must be non-negative");
    }
    const double t = world.t_now + t_index * dt;
    std::vector<int> ids;
    ids.reserve(world.obstacles.size());
    for (const auto& o : world.obstacles.obstacles()) ids.push_back(o.id);
    return {t_index, t, delaunay(extrapolate(world, t), ids, world.workspace_extent)};
}

double navi_cost_value(double length, double d_obs, double d0) {
    if (d_obs > d0) {
        return length;
    }
    return length * (2.0 - d_obs / d0);
}

double navi_cost(const StateTime& a, const StateTime& b, const WorldSnapshot& world, double c_s) {
    const double duration = b.t - a.t;
    if (!(duration > 0.0)) {
        throw std::invalid_argument("NaviCost needs a.t < b.t");
    }
    const Vec2 v = (b.p - a.p) / duration;
    const double elapsed = a.t - world.t_now;
    double d_obs = std::numeric_limits<double>::infinity();
    for (const auto& o : world.obstacles.obstacles()) {
        const auto ca = closest_approach(a.p - extrapolate(o, elapsed), v - o.v, duration);
        d_obs = std::min(d_obs, ca.distance);
    }
    return navi_cost_value((b.p - a.p).norm(), d_obs, 2.0 * c_s);
}

StateTimeGraph::StateTimeGraph(WorldSnapshot world, ScenarioConfig cfg, FrontEndParams params)
    : world_(std::move(world)), cfg_(std::move(cfg)), params_(std::move(params)) {
    cfg_.validate();
    if (params_.headings < 1 || params_.time_candidates < 1 || params_.speed_fractions.empty()) {
        throw std::invalid_argument("front-end discretization must be non-empty");
    }
    const double step = params_.max_step_time / params_.time_candidates;
    steps_per_candidate_ = static_cast<int>(std::lround(step / cfg_.dt));
    if (steps_per_candidate_ < 1 || std::abs(steps_per_candidate_ * cfg_.dt - step) > 1e-9) {
        throw std::invalid_argument("arrival offsets must be whole multiples of dt");
    }
    for (std::size_t i = 0; i < world_.obstacles.size(); ++i) {
        obstacle_index_[world_.obstacles[i].id] = i;
    }
    for (int k = 0; k < params_.headings; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / params_.headings;
        Vec2 dir(std::cos(theta), std::sin(theta));
        for (int axis = 0; axis < 2; ++axis) {
            if (std::abs(dir[axis]) < 1e-12) dir[axis] = 0.0;
        }
        const double s_max = max_speed_along(dir, cfg_.v_max);
        for (double f : params_.speed_fractions) {
            velocities_.push_back(clamp_velocity(f * s_max * dir, cfg_.v_max));
        }
    }
}

const SliceGraph& StateTimeGraph::slice(int t_index) {
    auto it = slices_.find(t_index);
    if (it == slices_.end()) {
        it = slices_.emplace(t_index, build_slice(world_, t_index, cfg_.dt)).first;
    }
    return it->second;
}

int StateTimeGraph::slice_of(double t) const {
    return static_cast<int>(std::lround((t - world_.t_now) / cfg_.dt));
}

std::vector<double> StateTimeGraph::time_candidates() const {
    std::vector<double> out;
    for (int q = 1; q <= params_.time_candidates; ++q) {
        out.push_back(q * steps_per_candidate_ * cfg_.dt);
    }
    return out;
}

std::vector<double> StateTimeGraph::safe_horizons(const StateTime& current) const {
    const double elapsed = current.t - world_.t_now;
    const double c_eff = cfg_.c_eff();
    const double t_m = time_candidates().back();
    std::vector<double> out(velocities_.size(), std::numeric_limits<double>::infinity());
    for (const auto& o : world_.obstacles.obstacles()) {
        const Vec2 r = current.p - extrapolate(o, elapsed);
        for (std::size_t k = 0; k < velocities_.size(); ++k) {
            out[k] = std::min(out[k], first_contact(r, velocities_[k] - o.v, c_eff, t_m));
        }
    }
    return out;
}

std::optional<StateTime> StateTimeGraph::place_node(const StateTime& current, int target_triangle, const Vec2& goal,
                                                    const Vec2& progress_dir) {
    return place_node(current, target_triangle, goal, progress_dir, safe_horizons(current));
}

std::optional<StateTime> StateTimeGraph::place_node(const StateTime& current, int target_triangle, const Vec2& goal,
                                                    const Vec2& progress_dir, const std::vector<double>& horizons) {
    const int k = slice_of(current.t);
    const SliceGraph& sg = slice(k);
    const Triangle& tri = sg.tri.triangles().at(static_cast<std::size_t>(target_triangle));

    // Triangle corners move with their obstacles; corners of the workspace stay put.
    std::array<const Obstacle*, 3> movers{nullptr, nullptr, nullptr};
    std::array<Vec2, 3> base;
    for (int c = 0; c < 3; ++c) {
        const TriVertex& vert = sg.tri.vertices()[tri.v[c]];
        base[c] = vert.p;
        if (vert.kind == VertexKind::obstacle) {
            movers[c] = &world_.obstacles[obstacle_index_.at(vert.obstacle_id)];
        }
    }

    const Vec2 to_goal = goal - current.p;
    const Vec2 goal_dir = to_goal.norm() > 1e-12 ? Vec2(to_goal.normalized()) : Vec2::Zero();
    const Vec2& extent = cfg_.workspace_extent;
    const auto taus = time_candidates();

    double best_score = -std::numeric_limits<double>::infinity();
    std::optional<StateTime> best;
    for (std::size_t vi = 0; vi < velocities_.size(); ++vi) {
        const Vec2& v = velocities_[vi];
        if (progress_dir.dot(v) <= 0.0) continue;
        const double speed = v.norm();
        const double alignment = params_.alignment_weight * goal_dir.dot(v / speed);
        for (std::size_t q = 0; q < taus.size(); ++q) {
            const double tau = taus[q];
            if (tau >= horizons[vi]) break;
            const Vec2 end = current.p + v * tau;
            if (!(end.x() > 0.0 && end.y() > 0.0 && end.x() < extent.x() && end.y() < extent.y())) continue;
            const double score = alignment + speed * tau;
            if (score <= best_score) continue;

            std::array<Vec2, 3> corner;
            for (int c = 0; c < 3; ++c) {
                corner[c] = movers[c] ? Vec2(base[c] + movers[c]->v * tau) : base[c];
            }
            if (predicates::orient2d(corner[0], corner[1], corner[2]) <= 0) continue;
            if (predicates::orient2d(corner[0], corner[1], end) < 0 ||
                predicates::orient2d(corner[1], corner[2], end) < 0 ||
                predicates::orient2d(corner[2], corner[0], end) < 0) {
                continue;
            }
            best_score = score;
            const int arrival = k + static_cast<int>(q + 1) * steps_per_candidate_;
            best = StateTime{end, v, slice_time(arrival)};
        }
    }
    return best;
}

bool StateTimeGraph::segment_clear(const StateTime& from, const Vec2& velocity, double duration) const {
    const double elapsed = from.t - world_.t_now;
    const double c_eff = cfg_.c_eff();
    for (const auto& o : world_.obstacles.obstacles()) {
        if (first_contact(from.p - extrapolate(o, elapsed), velocity - o.v, c_eff, duration) <= duration) {
            return false;
        }
    }
    return true;
}

std::optional<StateTime> StateTimeGraph::goal_connection(const StateTime& from, const Vec2& goal,
                                                         double t_start) const {
    const Vec2 delta = goal - from.p;
    const double d = delta.norm();
    int steps = 1;
    if (d > 1e-9) {
        const double speed = max_speed_along(delta / d, cfg_.v_max);
        steps = std::max(1, static_cast<int>(std::ceil(d / speed / cfg_.dt - 1e-9)));
    }
    const double duration = steps * cfg_.dt;
    const Vec2 v = delta / duration;
    const int arrival = slice_of(from.t) + steps;
    const double t_arrival = slice_time(arrival);
    if (t_arrival > t_start + cfg_.horizon + 1e-9) {
        return std::nullopt;
    }
    if (!segment_clear(from, v, duration)) {
        return std::nullopt;
    }
    return StateTime{goal, v, t_arrival};
}

std::vector<int> StateTimeGraph::successor_triangles(int t_index, int triangle) {
    std::vector<int> out{triangle};
    for (int nb : slice(t_index).tri.neighbors(triangle)) out.push_back(nb);
    return out;
}

namespace {

struct OpenEntry {
    double f;
    double h;
    std::size_t seq;
    int node;
    double g;

    bool operator>(const OpenEntry& o) const {
        if (f != o.f) return f > o.f;
        if (h != o.h) return h > o.h;
        return seq > o.seq;
    }
};

struct SearchNode {
    DualNode dual;
    bool closed = false;
    bool goal = false;
};

StPath backtrack(const std::vector<SearchNode>& nodes, int last, bool complete, std::size_t expansions) {
    std::vector<DualNode> chain;
    for (int i = last; i >= 0; i = nodes[i].dual.parent) {
        chain.push_back(nodes[i].dual);
    }
    StPath path;
    path.complete = complete;
    path.expansions = expansions;
    path.nodes.assign(chain.rbegin(), chain.rend());
    for (std::size_t i = 0; i < path.nodes.size(); ++i) {
        path.nodes[i].parent = static_cast<int>(i) - 1;
    }
    return path;
}

void dump_nodes(const std::vector<SearchNode>& nodes, std::ostream& out) {
    for (const auto& n : nodes) {
        const auto& d = n.dual;
        nlohmann::json j{{"p", {d.state.p.x(), d.state.p.y()}},
                         {"v", {d.state.v.x(), d.state.v.y()}},
                         {"t", d.state.t},
                         {"slice", d.slice},
                         {"triangle", d.triangle},
                         {"g", d.g},
                         {"h", d.h},
                         {"parent", d.parent},
                         {"closed", n.closed},
                         {"goal", n.goal}};
        out << j.dump() << '\n';
    }
}

}  // namespace

StPath state_time_astar(StateTimeGraph& graph, const StateTime& start, const Vec2& goal, std::ostream* debug) {
    const WorldSnapshot& world = graph.world();
    const ScenarioConfig& cfg = graph.config();
    if (!is_finite(start) || std::abs(start.t - world.t_now) > 1e-9) {
        throw std::invalid_argument("search start must be finite and stamped at the snapshot time");
    }
    if (min_clearance(world, start.p, start.t, cfg.c_eff()) < 0.0) {
        throw std::invalid_argument("search start is inside an obstacle");
    }
    const int start_tri = graph.slice(0).tri.locate(start.p);
    const Vec2 progress_dir = goal - start.p;
    const double c_eff = cfg.c_eff();

    std::vector<SearchNode> nodes;
    std::map<std::pair<int, int>, int> index;
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
    std::size_t seq = 0;

    nodes.push_back({DualNode{start, 0, start_tri, 0.0, (goal - start.p).norm(), -1}, false, false});
    index[{0, start_tri}] = 0;
    open.push({nodes[0].dual.h, nodes[0].dual.h, seq++, 0, 0.0});

    double best_goal_g = std::numeric_limits<double>::infinity();
    int nearest = 0;
    std::size_t expansions = 0;

    auto finish = [&](int last, bool complete) {
        if (debug) dump_nodes(nodes, *debug);
        return backtrack(nodes, last, complete, expansions);
    };
    auto consider_nearest = [&](int id) {
        const auto& a = nodes[id].dual;
        const auto& b = nodes[nearest].dual;
        if (a.h < b.h || (a.h == b.h && a.g < b.g)) nearest = id;
    };

    while (!open.empty()) {
        const OpenEntry top = open.top();
        open.pop();
        SearchNode& node = nodes[top.node];
        if (node.closed || top.g != node.dual.g) continue;
        if (node.goal) {
            return finish(top.node, true);
        }
        if (node.dual.state.t - start.t >= cfg.horizon - 1e-9) {
            break;
        }
        consider_nearest(top.node);
        node.closed = true;
        ++expansions;

        const DualNode current = node.dual;
        const int current_id = top.node;
        if (auto g_state = graph.goal_connection(current.state, goal, start.t)) {
            const double g = current.g + navi_cost(current.state, *g_state, world, c_eff);
            if (g < best_goal_g) {
                best_goal_g = g;
                nodes.push_back({DualNode{*g_state, graph.slice_of(g_state->t), -1, g, 0.0, current_id}, false, true});
                open.push({g, 0.0, seq++, static_cast<int>(nodes.size() - 1), g});
            }
        }
        if (expansions >= graph.params().max_expansions) {
            continue;
        }

        const auto horizons = graph.safe_horizons(current.state);
        for (int target : graph.successor_triangles(current.slice, current.triangle)) {
            auto placed = graph.place_node(current.state, target, goal, progress_dir, horizons);
            if (!placed) continue;
            const int k = graph.slice_of(placed->t);
            const int tri = graph.slice(k).tri.locate(placed->p);
            const double g = current.g + navi_cost(current.state, *placed, world, c_eff);
            const double h = (goal - placed->p).norm();
            auto [it, inserted] = index.try_emplace({k, tri}, static_cast<int>(nodes.size()));
            if (inserted) {
                nodes.push_back({DualNode{*placed, k, tri, g, h, current_id}, false, false});
            } else {
                SearchNode& existing = nodes[it->second];
                if (existing.closed || g >= existing.dual.g) continue;
                existing.dual = DualNode{*placed, k, tri, g, h, current_id};
            }
            open.push({g + h, h, seq++, it->second, g});
        }
    }
    return finish(nearest, false);
}

StPath state_time_astar(const StateTime& start, const Vec2& goal, const WorldSnapshot& world,
                        const ScenarioConfig& cfg, const FrontEndParams& params, std::ostream* debug) {
    StateTimeGraph graph(world, cfg, params);
    return state_time_astar(graph, start, goal, debug);
}

}  // namespace stplan

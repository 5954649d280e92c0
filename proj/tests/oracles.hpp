#pragma once

// Independent reference computations used only by tests. Nothing here calls
// the closed forms it is meant to check.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "stplan/core_types.hpp"
#include "stplan/st_graph.hpp"
#include "stplan/world.hpp"

namespace oracle {

using stplan::Vec2;

// min over tau in [0, tau_max] of |r + w tau| by uniform sampling.
inline double sampled_min_distance(const Vec2& r, const Vec2& w, double tau_max, int samples = 10000) {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= samples; ++k) {
        const double tau = tau_max * k / samples;
        best = std::min(best, (r + w * tau).norm());
    }
    return best;
}

// Refines a sampled minimum with golden-section search on the bracket around
// the best sample. The function is convex in tau so this converges to the
// true minimum far below the sampling resolution.
inline double refined_min_distance(const Vec2& r, const Vec2& w, double tau_max, int samples = 10000) {
    auto f = [&](double tau) { return (r + w * tau).norm(); };
    int best_k = 0;
    double best = f(0.0);
    for (int k = 1; k <= samples; ++k) {
        const double v = f(tau_max * k / samples);
        if (v < best) {
            best = v;
            best_k = k;
        }
    }
    double lo = tau_max * std::max(0, best_k - 1) / samples;
    double hi = tau_max * std::min(samples, best_k + 1) / samples;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 100; ++it) {
        const double a = hi - g * (hi - lo);
        const double b = lo + g * (hi - lo);
        if (f(a) < f(b)) hi = b; else lo = a;
    }
    return std::min(best, f(0.5 * (lo + hi)));
}

// Circumcircle audit in long double: true if no vertex lies inside the
// circumcircle of (a, b, c) by more than `tol` relative to the radius.
inline bool empty_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const std::vector<Vec2>& pts,
                               double tol = 1e-9) {
    using ld = long double;
    const ld ax = a.x(), ay = a.y(), bx = b.x(), by = b.y(), cx = c.x(), cy = c.y();
    const ld d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    if (std::fabs(static_cast<double>(d)) < 1e-300) return true;
    const ld ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d;
    const ld uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d;
    const ld r = std::sqrt((ax - ux) * (ax - ux) + (ay - uy) * (ay - uy));
    for (const Vec2& p : pts) {
        const ld dist = std::sqrt((p.x() - ux) * (p.x() - ux) + (p.y() - uy) * (p.y() - uy));
        if (dist < r * (1 - tol) - tol) return false;
    }
    return true;
}

// Composite Simpson rule for a matrix-valued integrand.
template <typename F>
Eigen::MatrixXd simpson(F f, double a, double b, int intervals = 2000) {
    if (intervals % 2) ++intervals;
    const double h = (b - a) / intervals;
    Eigen::MatrixXd sum = f(a) + f(b);
    for (int k = 1; k < intervals; ++k) sum += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return sum * (h / 3.0);
}

// Phi(t, s) for the constant-velocity model, built from the series of exp(A (t - s)).
inline Eigen::Matrix4d phi_series(double dt) {
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    A.topRightCorner<2, 2>().setIdentity();
    Eigen::Matrix4d term = Eigen::Matrix4d::Identity();
    Eigen::Matrix4d sum = Eigen::Matrix4d::Identity();
    for (int k = 1; k < 6; ++k) {
        term = term * A * dt / k;
        sum += term;
    }
    return sum;
}

// Q_i by quadrature of Phi(t_i, s) F Qc F^T Phi(t_i, s)^T over [t_{i-1}, t_i].
inline Eigen::Matrix4d quadrature_q(double dt, double q) {
    Eigen::Matrix<double, 4, 2> F = Eigen::Matrix<double, 4, 2>::Zero();
    F.bottomRows<2>().setIdentity();
    auto integrand = [&](double s) -> Eigen::MatrixXd {
        const Eigen::Matrix4d P = phi_series(dt - s);
        return P * F * (q * Eigen::Matrix2d::Identity()) * F.transpose() * P.transpose();
    };
    return simpson(integrand, 0.0, dt);
}

// 1/2 (x - mu)^T K^-1 (x - mu) with the dense GP kernel over waypoints 1..N-1,
// conditioned on waypoint 0 (K0 = 0, mu(t) = Phi(t, t0) x0).
inline double dense_kernel_energy(const std::vector<Eigen::Vector4d>& states, const std::vector<double>& times,
                                  double q) {
    const std::size_t n = states.size() - 1;
    Eigen::Matrix<double, 4, 2> F = Eigen::Matrix<double, 4, 2>::Zero();
    F.bottomRows<2>().setIdentity();
    Eigen::MatrixXd K(4 * n, 4 * n);
    Eigen::VectorXd diff(4 * n);
    const double t0 = times[0];
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = times[i + 1];
        diff.segment<4>(4 * i) = states[i + 1] - phi_series(ti - t0) * states[0];
        for (std::size_t j = 0; j < n; ++j) {
            const double tj = times[j + 1];
            auto integrand = [&](double s) -> Eigen::MatrixXd {
                return phi_series(ti - s) * F * (q * Eigen::Matrix2d::Identity()) * F.transpose() *
                       phi_series(tj - s).transpose();
            };
            K.block<4, 4>(4 * i, 4 * j) = simpson(integrand, t0, std::min(ti, tj));
        }
    }
    const Eigen::VectorXd sol = K.ldlt().solve(diff);
    return 0.5 * diff.dot(sol);
}

// Exhaustive Dijkstra over the same on-demand graph the A* searches: same
// successor triangles, placements, (slice, triangle) keying and goal
// connections, but no heuristic and no expansion cap. Nodes at or past the
// horizon are kept but not expanded. Returns the cheapest goal cost, or +inf.
inline double dijkstra_goal_cost(stplan::StateTimeGraph& graph, const stplan::StateTime& start, const Vec2& goal) {
    using stplan::StateTime;
    const auto& cfg = graph.config();
    const auto& world = graph.world();
    struct Node {
        StateTime state;
        int slice;
        int tri;
        double g;
        bool closed = false;
        bool goal = false;
    };
    std::vector<Node> nodes;
    std::map<std::pair<int, int>, int> index;
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    const int start_tri = graph.slice(0).tri.locate(start.p);
    nodes.push_back({start, 0, start_tri, 0.0});
    index[{0, start_tri}] = 0;
    open.push({0.0, 0});
    const Vec2 progress_dir = goal - start.p;
    while (!open.empty()) {
        const auto [g, id] = open.top();
        open.pop();
        if (nodes[id].closed || g != nodes[id].g) continue;
        if (nodes[id].goal) return g;
        nodes[id].closed = true;
        const Node cur = nodes[id];
        if (cur.state.t - start.t >= cfg.horizon - 1e-9) continue;
        if (auto gs = graph.goal_connection(cur.state, goal, start.t)) {
            const double cost = cur.g + stplan::navi_cost(cur.state, *gs, world, cfg.c_eff());
            nodes.push_back({*gs, graph.slice_of(gs->t), -1, cost, false, true});
            open.push({cost, static_cast<int>(nodes.size() - 1)});
        }
        for (int target : graph.successor_triangles(cur.slice, cur.tri)) {
            auto placed = graph.place_node(cur.state, target, goal, progress_dir);
            if (!placed) continue;
            const int k = graph.slice_of(placed->t);
            const int tri = graph.slice(k).tri.locate(placed->p);
            const double cost = cur.g + stplan::navi_cost(cur.state, *placed, world, cfg.c_eff());
            auto [it, inserted] = index.try_emplace({k, tri}, static_cast<int>(nodes.size()));
            if (inserted) {
                nodes.push_back({*placed, k, tri, cost});
            } else {
                Node& ex = nodes[it->second];
                if (ex.closed || cost >= ex.g) continue;
                ex.state = *placed;
                ex.g = cost;
            }
            open.push({cost, it->second});
        }
    }
    return std::numeric_limits<double>::infinity();
}

// Clearance of a robot moving p0 -> p0 + v * dt against obstacles moving at
// constant velocity, sampled at `substeps` + 1 instants.
inline double sampled_segment_clearance(const Vec2& p0, const Vec2& v, double dt,
                                        const std::vector<stplan::Obstacle>& obs, double elapsed, double c_eff,
                                        int substeps = 10) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= substeps; ++j) {
        const double tau = dt * j / substeps;
        for (const auto& o : obs) {
            const Vec2 po = o.p + o.v * (elapsed + tau);
            best = std::min(best, (p0 + v * tau - po).norm() - c_eff);
        }
    }
    return best;
}

}  // namespace oracle

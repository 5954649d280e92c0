#include "stplan/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stplan/kinematics.hpp"

namespace stplan {

ClosestApproach closest_approach(const Vec2& r, const Vec2& w, double tau_max) {
    const double ww = w.squaredNorm();
    double tau = 0.0;
    if (ww > 1e-24 && tau_max > 0.0) {
        tau = std::clamp(-r.dot(w) / ww, 0.0, tau_max);
    }
    return {tau, (r + w * tau).norm()};
}

double first_contact(const Vec2& r, const Vec2& w, double radius, double tau_max) {
    constexpr double kNever = std::numeric_limits<double>::infinity();
    const double c = r.squaredNorm() - radius * radius;
    if (c <= 0.0) {
        return 0.0;
    }
    const double a = w.squaredNorm();
    const double b = r.dot(w);
    if (a <= 1e-24 || b >= 0.0) {
        return kNever;
    }
    const double disc = b * b - a * c;
    if (disc < 0.0) {
        return kNever;
    }
    // Smaller root of a tau^2 + 2 b tau + c, in the cancellation-free form.
    const double tau = c / (-b + std::sqrt(disc));
    return tau <= tau_max ? tau : kNever;
}

std::vector<Vec2> extrapolate(const WorldSnapshot& snapshot, double t) {
    const double elapsed = t - snapshot.t_now;
    if (elapsed < 0.0) {
        throw std::invalid_argument("cannot extrapolate obstacles into the past");
    }
    std::vector<Vec2> out;
    out.reserve(snapshot.obstacles.size());
    for (const auto& o : snapshot.obstacles.obstacles()) {
        out.push_back(extrapolate(o, elapsed));
    }
    return out;
}

double min_clearance(const WorldSnapshot& snapshot, const Vec2& p, double t, double c_eff) {
    const double elapsed = t - snapshot.t_now;
    if (elapsed < 0.0) {
        throw std::invalid_argument("cannot extrapolate obstacles into the past");
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : snapshot.obstacles.obstacles()) {
        best = std::min(best, (p - extrapolate(o, elapsed)).norm() - c_eff);
    }
    return best;
}

WorldSnapshot wrap_obstacles(const WorldSnapshot& snapshot) {
    const Vec2& extent = snapshot.workspace_extent;
    std::vector<Obstacle> wrapped;
    wrapped.reserve(snapshot.obstacles.size());
    for (auto o : snapshot.obstacles.obstacles()) {
        if (!within_workspace(o.p, extent)) {
            Vec2 q = extent - o.p;
            for (int axis = 0; axis < 2; ++axis) {
                if (o.p[axis] > extent[axis]) {
                    q[axis] = 0.0;
                } else if (o.p[axis] < 0.0) {
                    q[axis] = extent[axis];
                }
            }
            o.p = q;
        }
        wrapped.push_back(o);
    }
    return {ObstacleSet(std::move(wrapped), snapshot.obstacles.radius()), snapshot.t_now, extent};
}

}  // namespace stplan

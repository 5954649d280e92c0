#include "stplan/timed_esdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "stplan/kinematics.hpp"

namespace stplan {

TimedEsdf TimedEsdf::build(const WorldSnapshot& world, double t0, double horizon, double dt, double c_eff,
                           double epsilon) {
    if (!(dt > 0.0) || !(horizon >= dt - 1e-12)) {
        throw std::invalid_argument("Timed-ESDF needs dt > 0 and horizon >= dt");
    }
    if (t0 < world.t_now - 1e-12) {
        throw std::invalid_argument("Timed-ESDF cannot start before the snapshot");
    }
    TimedEsdf field;
    field.t0_ = t0;
    field.dt_ = dt;
    field.c_eff_ = c_eff;
    field.epsilon_ = epsilon;
    const auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    field.slices_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double elapsed = t0 + static_cast<double>(i) * dt - world.t_now;
        auto& segs = field.slices_[i];
        segs.reserve(world.obstacles.size());
        for (const auto& o : world.obstacles.obstacles()) {
            const Vec2 a = extrapolate(o, elapsed);
            segs.push_back({o.id, a, a + o.v * dt, o.v, c_eff});
        }
    }
    return field;
}

std::size_t TimedEsdf::slice_index(double t) const {
    const double u = (t - t0_) / dt_;
    if (!(u >= -1e-9) || !(u < static_cast<double>(slices_.size()) - 1e-9)) {
        throw std::out_of_range("query time outside Timed-ESDF horizon");
    }
    return std::min(static_cast<std::size_t>(std::max(0.0, std::floor(u + 1e-9))), slices_.size() - 1);
}

DistanceResult TimedEsdf::query(const StateTime& s) const {
    const auto& segs = slices_[slice_index(s.t)];
    DistanceResult best;
    best.d = std::numeric_limits<double>::infinity();
    for (const auto& seg : segs) {
        const Vec2 r = s.p - seg.a;
        const Vec2 w = s.v - seg.v;
        const auto ca = closest_approach(r, w, dt_);
        const double d = ca.distance - seg.radius;
        if (d < best.d || (d == best.d && seg.obstacle_id < best.obstacle_id)) {
            Vec2 dir = r + w * ca.tau;
            const double n = dir.norm();
            if (n > 1e-12) {
                dir /= n;
            } else {
                // Centers coincide: no unique direction, fall back to the initial offset.
                dir = r.norm() > 1e-12 ? Vec2(r.normalized()) : Vec2(1.0, 0.0);
            }
            best.d = d;
            best.tau_star = ca.tau;
            best.grad_p = dir;
            best.grad_v = ca.tau * dir;
            best.obstacle_id = seg.obstacle_id;
        }
    }
    return best;
}

double hinge(double d, double epsilon) { return d < epsilon ? epsilon - d : 0.0; }

bool in_velocity_obstacle(const Vec2& v, const Vec2& p_r, const Obstacle& obstacle, double c_eff, double window) {
    const Vec2 r = p_r - obstacle.p;
    const Vec2 w = v - obstacle.v;
    // Only t > 0 counts, so a robot already inside the disc is in the VO iff it
    // stays inside for some positive time, which always holds.
    const double tc = first_contact(r, w, c_eff, window);
    return std::isfinite(tc) && tc <= window;
}

bool in_velocity_obstacle(const Vec2& v, const Vec2& p_r, const Obstacle& obstacle, double c_eff) {
    return in_velocity_obstacle(v, p_r, obstacle, c_eff, std::numeric_limits<double>::infinity());
}

void write_slice_csv(const TimedEsdf& field, std::size_t slice, const Vec2& velocity, const Vec2& extent,
                     double resolution, std::ostream& out) {
    const double t = field.t0() + static_cast<double>(slice) * field.dt();
    out << "x,y,d\n";
    const auto nx = static_cast<int>(std::floor(extent.x() / resolution + 1e-9));
    const auto ny = static_cast<int>(std::floor(extent.y() / resolution + 1e-9));
    for (int iy = 0; iy <= ny; ++iy) {
        for (int ix = 0; ix <= nx; ++ix) {
            const Vec2 p(ix * resolution, iy * resolution);
            const auto res = field.query({p, velocity, t});
            out << p.x() << ',' << p.y() << ',' << res.d << '\n';
        }
    }
}

}  // namespace stplan

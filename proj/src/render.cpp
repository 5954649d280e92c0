#include "stplan/render.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <stdexcept>
#include <string>

namespace stplan {

namespace {

constexpr double kScale = 50.0;  // px per meter
constexpr double kPad = 20.0;

struct Frame {
    Vec2 extent;
    double x(double wx) const { return kPad + wx * kScale; }
    double y(double wy) const { return kPad + (extent.y() - wy) * kScale; }
    double width() const { return 2 * kPad + extent.x() * kScale; }
    double height() const { return 2 * kPad + extent.y() * kScale; }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void header(std::ostream& out, const Frame& f) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(f.width()) << "\" height=\""
        << num(f.height()) << "\" viewBox=\"0 0 " << num(f.width()) << ' ' << num(f.height()) << "\">\n";
}

// Blue (far) to red (inside), saturating at 2 m.
std::string color_for(double d) {
    const double s = std::clamp(d / 2.0, 0.0, 1.0);
    const int r = d < 0.0 ? 200 : static_cast<int>(std::lround(255 * (1.0 - s)));
    const int g = d < 0.0 ? 0 : static_cast<int>(std::lround(255 * (1.0 - std::abs(2 * s - 1))));
    const int b = d < 0.0 ? 0 : static_cast<int>(std::lround(255 * s));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace

void write_plan_svg(const WorldSnapshot& world, const Trajectory& traj, const ScenarioConfig& cfg,
                    std::ostream& out, bool deterministic) {
    const Frame f{cfg.workspace_extent};
    header(out, f);
    if (!deterministic) {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char stamp[64];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        out << "<!-- generated " << stamp << " -->\n";
    }
    out << "<rect x=\"" << num(f.x(0)) << "\" y=\"" << num(f.y(cfg.workspace_extent.y())) << "\" width=\""
        << num(cfg.workspace_extent.x() * kScale) << "\" height=\"" << num(cfg.workspace_extent.y() * kScale)
        << "\" fill=\"white\" stroke=\"black\"/>\n";

    const double span = std::max(0.0, traj.t_end() - world.t_now);
    for (const auto& o : world.obstacles.obstacles()) {
        const Vec2 end = extrapolate(o, span);
        out << "<line x1=\"" << num(f.x(o.p.x())) << "\" y1=\"" << num(f.y(o.p.y())) << "\" x2=\""
            << num(f.x(end.x())) << "\" y2=\"" << num(f.y(end.y()))
            << "\" stroke=\"#d08080\" stroke-width=\"" << num(2 * cfg.c_eff() * kScale)
            << "\" stroke-opacity=\"0.35\" stroke-linecap=\"round\"/>\n";
        out << "<circle cx=\"" << num(f.x(o.p.x())) << "\" cy=\"" << num(f.y(o.p.y())) << "\" r=\""
            << num(cfg.c_eff() * kScale) << "\" fill=\"#c03030\"/>\n";
    }
    out << "<circle cx=\"" << num(f.x(cfg.start.x())) << "\" cy=\"" << num(f.y(cfg.start.y()))
        << "\" r=\"5\" fill=\"#208020\"/>\n";
    out << "<circle cx=\"" << num(f.x(cfg.goal.x())) << "\" cy=\"" << num(f.y(cfg.goal.y()))
        << "\" r=\"5\" fill=\"#202080\"/>\n";

    out << "<polyline fill=\"none\" stroke=\"#2060c0\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (i) out << ' ';
        out << num(f.x(traj[i].p.x())) << ',' << num(f.y(traj[i].p.y()));
    }
    out << "\"/>\n</svg>\n";
}

void write_esdf_svg(const TimedEsdf& field, std::size_t slice, const Vec2& velocity, const Vec2& extent,
                    double resolution, std::ostream& out) {
    if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
    const Frame f{extent};
    header(out, f);
    const auto nx = static_cast<long>(std::ceil(extent.x() / resolution - 1e-9));
    const auto ny = static_cast<long>(std::ceil(extent.y() / resolution - 1e-9));
    const double t = field.t0() + static_cast<double>(slice) * field.dt();
    const double cell = resolution * kScale;
    for (long j = 0; j < ny; ++j) {
        for (long i = 0; i < nx; ++i) {
            const Vec2 c((i + 0.5) * resolution, (j + 0.5) * resolution);
            const double d = field.query(StateTime{c, velocity, t}).d;
            out << "<rect x=\"" << num(f.x(i * resolution)) << "\" y=\"" << num(f.y((j + 1) * resolution))
                << "\" width=\"" << num(cell) << "\" height=\"" << num(cell) << "\" fill=\"" << color_for(d)
                << "\"/>\n";
        }
    }
    out << "</svg>\n";
}

}  // namespace stplan

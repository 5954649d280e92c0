#include "stplan/dataset_replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace stplan {

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& tok, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        parse_error(line, "not a number: '" + tok + "'");
    }
    if (used != tok.size() || !std::isfinite(v)) parse_error(line, "not a number: '" + tok + "'");
    return v;
}

long parse_int(const std::string& tok, std::size_t line) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(tok, &used);
    } catch (const std::exception&) {
        parse_error(line, "not an integer: '" + tok + "'");
    }
    if (used != tok.size()) parse_error(line, "not an integer: '" + tok + "'");
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

Vec2 lerp(const Vec2& a, const Vec2& b, double f) { return a + (b - a) * f; }

// Position and velocity of a resampled track at t, if alive.
bool track_state(const AgentTrack& track, double t, Vec2& p, Vec2& v) {
    const auto& s = track.samples;
    const double t0 = s.front().t;
    const double t1 = s.back().t;
    constexpr double tol = 1e-9;
    if (t < t0 - tol || t > t1 + tol) return false;
    const auto n = static_cast<long>(s.size());
    const double u = std::clamp((t - t0) / kReplayStep, 0.0, static_cast<double>(n - 1));
    const long k = std::min(static_cast<long>(std::floor(u)), n - 1);
    p = k + 1 < n ? lerp(s[k].p, s[k + 1].p, u - static_cast<double>(k)) : s[k].p;
    if (n == 1) {
        v = Vec2::Zero();
        return true;
    }
    const long i = std::clamp(std::lround(u), 0L, n - 1);
    if (i == 0) {
        v = (s[1].p - s[0].p) / (s[1].t - s[0].t);
    } else if (i == n - 1) {
        v = (s[i].p - s[i - 1].p) / (s[i].t - s[i - 1].t);
    } else {
        v = (s[i + 1].p - s[i - 1].p) / (s[i + 1].t - s[i - 1].t);
    }
    return true;
}

}  // namespace

TrackFile parse_tracks(std::istream& in) {
    TrackFile file;
    bool have_fps = false;
    std::map<int, std::map<long, Vec2>> rows;  // agent -> frame -> p
    std::string raw;
    std::size_t line = 0;
    std::size_t data_rows = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = trim(raw);
        if (text.empty()) continue;
        if (text[0] == '#') {
            const std::string body = trim(text.substr(1));
            const std::string key = "source_fps:";
            if (body.compare(0, key.size(), key) == 0) {
                file.source_fps = parse_double(trim(body.substr(key.size())), line);
                if (!(file.source_fps > 0.0)) parse_error(line, "source_fps must be positive");
                have_fps = true;
            }
            continue;
        }
        if (!have_fps) parse_error(line, "data row before the '# source_fps:' header");
        std::istringstream fields(text);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) tok.push_back(t);
        if (tok.size() != 4) {
            parse_error(line, "expected 4 fields (frame agent x y), got " + std::to_string(tok.size()));
        }
        const long frame = parse_int(tok[0], line);
        const long agent = parse_int(tok[1], line);
        if (agent < std::numeric_limits<int>::min() || agent > std::numeric_limits<int>::max()) {
            parse_error(line, "agent id out of range");
        }
        const Vec2 p(parse_double(tok[2], line), parse_double(tok[3], line));
        auto& track = rows[static_cast<int>(agent)];
        if (!track.emplace(frame, p).second) {
            parse_error(line, "duplicate frame " + std::to_string(frame) + " for agent " + std::to_string(agent));
        }
        ++data_rows;
    }
    if (data_rows == 0) throw std::runtime_error("no trajectory rows in input");
    for (const auto& [agent, frames] : rows) {
        AgentTrack track{agent, {}};
        for (const auto& [frame, p] : frames) {
            track.samples.push_back({static_cast<double>(frame) / file.source_fps, p});
        }
        file.tracks.push_back(std::move(track));
    }
    return file;
}

TrackFile load_tracks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return parse_tracks(in);
}

void write_tracks(const TrackFile& file, std::ostream& out) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "# source_fps: %.17g\n", file.source_fps);
    out << buf;
    for (const auto& track : file.tracks) {
        for (const auto& s : track.samples) {
            std::snprintf(buf, sizeof buf, "%ld\t%d\t%.17g\t%.17g\n", std::lround(s.t * file.source_fps), track.id,
                          s.p.x(), s.p.y());
            out << buf;
        }
    }
}

ReplaySequence interpolate_10hz(const std::vector<AgentTrack>& tracks, double margin) {
    ReplaySequence seq;
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
    Vec2 hi = -lo;
    seq.t_begin = std::numeric_limits<double>::infinity();
    seq.t_end = -seq.t_begin;
    for (const auto& track : tracks) {
        const auto& src = track.samples;
        if (src.size() < 2) {
            ++seq.dropped;
            continue;
        }
        for (std::size_t i = 1; i < src.size(); ++i) {
            if (!(src[i].t > src[i - 1].t)) throw std::invalid_argument("track times must be strictly increasing");
        }
        const double t0 = src.front().t;
        const double span = src.back().t - t0;
        const auto n = static_cast<std::size_t>(std::floor(span / kReplayStep + 1e-9)) + 1;
        AgentTrack grid{track.id, {}};
        grid.samples.reserve(n);
        std::size_t j = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = std::min(t0 + static_cast<double>(k) * kReplayStep, src.back().t);
            while (j + 2 < src.size() && src[j + 1].t <= t) ++j;
            const double f = std::clamp((t - src[j].t) / (src[j + 1].t - src[j].t), 0.0, 1.0);
            grid.samples.push_back({t0 + static_cast<double>(k) * kReplayStep, lerp(src[j].p, src[j + 1].p, f)});
        }
        for (const auto& s : src) {
            lo = lo.cwiseMin(s.p);
            hi = hi.cwiseMax(s.p);
        }
        seq.t_begin = std::min(seq.t_begin, t0);
        seq.t_end = std::max(seq.t_end, grid.samples.back().t);
        seq.tracks.push_back(std::move(grid));
    }
    if (seq.tracks.empty()) throw std::invalid_argument("no track has two or more samples");
    seq.origin = lo - Vec2::Constant(margin);
    seq.extent = hi - lo + Vec2::Constant(2.0 * margin);
    for (auto& track : seq.tracks) {
        for (auto& s : track.samples) s.p -= seq.origin;
    }
    return seq;
}

WorldSnapshot snapshot(const ReplaySequence& seq, double t, double radius) {
    if (t < seq.t_begin - 1e-9 || t > seq.t_end + 1e-9) {
        throw std::out_of_range("time outside the replay span");
    }
    return snapshot_or_empty(seq, t, radius);
}

WorldSnapshot snapshot_or_empty(const ReplaySequence& seq, double t, double radius) {
    std::vector<Obstacle> alive;
    for (const auto& track : seq.tracks) {
        Vec2 p;
        Vec2 v;
        if (track_state(track, t, p, v)) alive.push_back({track.id, p, v});
    }
    return {ObstacleSet(std::move(alive), radius), t, seq.extent};
}

ScenarioConfig bench_scenario(const ReplaySequence& seq, const ScenarioConfig& base) {
    ScenarioConfig cfg = base;
    cfg.workspace_extent = seq.extent;
    cfg.v_max = Vec2(1.5, 1.5);
    cfg.safe_distance = 0.4;
    cfg.start = Vec2(0.0, 0.5 * seq.extent.y());
    cfg.goal = Vec2(seq.extent.x(), 0.5 * seq.extent.y());
    cfg.validate();
    return cfg;
}

WorldSnapshot ReplayEnvironment::observe() const {
    WorldSnapshot w = snapshot_or_empty(*seq_, offset_ + elapsed_, radius_);
    w.t_now = elapsed_;
    return w;
}

std::vector<Vec2> ReplayEnvironment::true_positions(double t) const {
    std::vector<Vec2> out;
    for (const auto& track : seq_->tracks) {
        Vec2 p;
        Vec2 v;
        if (track_state(track, offset_ + t, p, v)) out.push_back(p);
    }
    return out;
}

MetricsRow run_bench(const ReplaySequence& seq, const ScenarioConfig& cfg, PlannerKind planner, int trials,
                     std::size_t threads, const PlannerParams& params, const TrialSink& sink) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    cfg.validate();
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));
    std::mutex sink_mutex;
    parallel_for(outcomes.size(), threads, [&](std::size_t k) {
        const std::uint64_t seed = cfg.rng_seed + k;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> start_time(seq.t_begin, seq.t_end);
        ReplayEnvironment env(seq, start_time(rng), cfg.c_eff());
        TrialResult r;
        r.trace = replan_loop(env, cfg, planner, params);
        r.outcome.seed = seed;
        r.outcome.status = r.trace.status;
        r.outcome.time_cost = r.trace.time_cost;
        for (const auto& tick : r.trace.ticks) {
            if (tick.min_clearance < 0.0) ++r.outcome.audit_penetrations;
        }
        outcomes[k] = r.outcome;
        if (sink) {
            std::lock_guard<std::mutex> lock(sink_mutex);
            sink(0.0, planner, static_cast<int>(k), r);
        }
    });
    return aggregate(0.0, planner, std::move(outcomes));
}

}  // namespace stplan

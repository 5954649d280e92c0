#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stplan/core_types.hpp"
#include "stplan/planner.hpp"
#include "stplan/sim_harness.hpp"
#include "stplan/world.hpp"

namespace stplan {

struct TrackSample {
    double t = 0.0;
    Vec2 p = Vec2::Zero();
};

struct AgentTrack {
    int id = 0;
    std::vector<TrackSample> samples;  // strictly increasing t
};

/// Tracks as read from a file, plus the declared source frame rate.
struct TrackFile {
    double source_fps = 0.0;
    std::vector<AgentTrack> tracks;  // sorted by agent id
};

/// Parses `# source_fps: <float>` followed by whitespace-separated rows
/// `frame_id agent_id x y`. Other `#` lines are comments. Rows of one agent may
/// come in any order; they are sorted by time. Throws std::runtime_error
/// with the offending line number on malformed input, on an empty file, or on
/// a repeated (agent, frame) pair.
TrackFile parse_tracks(std::istream& in);
TrackFile load_tracks(const std::string& path);

/// Inverse of parse_tracks for tracks whose times are whole frames.
void write_tracks(const TrackFile& file, std::ostream& out);

constexpr double kReplayStep = 0.1;
constexpr double kReplayMargin = 1.0;

/// Tracks resampled every 0.1 s from their first sample, shifted so the
/// fitted bounds start at the origin.
struct ReplaySequence {
    std::vector<AgentTrack> tracks;
    Vec2 origin = Vec2::Zero();   // data coordinates of the workspace corner
    Vec2 extent = Vec2::Zero();   // workspace size after the margin
    double t_begin = 0.0;
    double t_end = 0.0;
    std::size_t dropped = 0;      // single-sample tracks left out
};

ReplaySequence interpolate_10hz(const std::vector<AgentTrack>& tracks, double margin = kReplayMargin);

/// Agents alive at t with grid-interpolated positions and finite-difference
/// velocities. Throws std::out_of_range for t outside [t_begin, t_end].
WorldSnapshot snapshot(const ReplaySequence& seq, double t, double radius);

/// Same, returning an empty world outside the sequence span.
WorldSnapshot snapshot_or_empty(const ReplaySequence& seq, double t, double radius);

/// Benchmark constants: v_max 1.5 per axis, safe distance 0.4, start and goal
/// at the middle of the left and right edges of the fitted workspace.
ScenarioConfig bench_scenario(const ReplaySequence& seq, const ScenarioConfig& base = {});

/// Open-loop playback: agents ignore the robot. Time zero is `t_offset`
/// seconds into the sequence.
class ReplayEnvironment : public Environment {
public:
    ReplayEnvironment(const ReplaySequence& seq, double t_offset, double radius)
        : seq_(&seq), offset_(t_offset), radius_(radius) {}

    double time() const override { return elapsed_; }
    WorldSnapshot observe() const override;
    std::vector<Vec2> true_positions(double t) const override;
    void step(double dt) override { elapsed_ += dt; }

private:
    const ReplaySequence* seq_;
    double offset_;
    double radius_;
    double elapsed_ = 0.0;
};

/// `trials` runs at seeded start times uniform over the sequence span
/// (seed = cfg.rng_seed + trial). Returns one MetricsRow with sweep value 0.
MetricsRow run_bench(const ReplaySequence& seq, const ScenarioConfig& cfg, PlannerKind planner, int trials,
                     std::size_t threads = 0, const PlannerParams& params = {}, const TrialSink& sink = {});

}  // namespace stplan

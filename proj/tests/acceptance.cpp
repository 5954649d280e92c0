// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stplan/gp_prior.hpp"
#include "stplan/map_optimizer.hpp"
#include "stplan/planner.hpp"
#include "stplan/sim_harness.hpp"
#include "stplan/st_graph.hpp"
#include "stplan/timed_esdf.hpp"

using namespace stplan;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

double median(std::vector<double> xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    const std::size_t m = xs.size() / 2;
    return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

std::shared_ptr<const TimedEsdf> field_of(std::vector<Obstacle> obs, double horizon, double epsilon,
                                          double radius = 0.3) {
    const WorldSnapshot w{ObstacleSet(std::move(obs), radius), 0.0, Vec2(10, 10)};
    return std::make_shared<const TimedEsdf>(TimedEsdf::build(w, 0.0, horizon, 0.1, radius, epsilon));
}

// 1. Central differences (h = 1e-6) against the analytic sparse Jacobian.
Verdict gradient_fidelity() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> up(0, 10);
    std::uniform_real_distribution<double> uv(-1.5, 1.5);
    const double h = 1e-6;
    const double eps = 3.0;  // wide enough that every obstacle factor is active
    int checked = 0;
    int rejected = 0;
    double worst = 0.0;
    while (checked < 1000) {
        std::vector<Obstacle> obs;
        for (int i = 0; i < 4; ++i) obs.push_back({i, Vec2(up(rng), up(rng)), Vec2(uv(rng), uv(rng))});
        const auto field = field_of(obs, 1.0, eps);
        const FactorGraph g(8, 0.1, field);
        std::vector<Vec4> s;
        for (int i = 0; i < 8; ++i) s.push_back(Vec4(up(rng), up(rng), uv(rng), uv(rng)));
        const auto traj = Trajectory::from_states(0.0, 0.1, s);
        // Non-degenerate: away from tau* clamps, the hinge corner and nearest-obstacle switches.
        bool degenerate = false;
        for (std::size_t i = 1; i + 1 < traj.size() && !degenerate; ++i) {
            const auto q = field->query(traj[i]);
            if (std::abs(q.d - eps) < 1e-3) degenerate = true;
            for (const auto& seg : field->slice(field->slice_index(traj[i].t))) {
                const Vec2 r = traj[i].p - seg.a;
                const Vec2 w = traj[i].v - seg.v;
                if (seg.obstacle_id == q.obstacle_id) {
                    const double tau_u = -r.dot(w) / w.squaredNorm();
                    if (std::abs(tau_u) < 1e-3 || std::abs(tau_u - 0.1) < 1e-3) degenerate = true;
                    continue;
                }
                if (oracle::refined_min_distance(r, w, 0.1, 100) - seg.radius - q.d < 1e-3) degenerate = true;
            }
        }
        if (degenerate) {
            ++rejected;
            continue;
        }
        ++checked;
        const Eigen::MatrixXd analytic = Eigen::MatrixXd(residuals_and_jacobian(traj, g).jacobian);
        for (Eigen::Index c = 0; c < analytic.cols(); ++c) {
            auto lo = s;
            auto hi = s;
            lo[1 + c / 4](c % 4) -= h;
            hi[1 + c / 4](c % 4) += h;
            const auto rl = residuals_and_jacobian(Trajectory::from_states(0.0, 0.1, lo), g).residuals;
            const auto rh = residuals_and_jacobian(Trajectory::from_states(0.0, 0.1, hi), g).residuals;
            const Eigen::VectorXd fd = (rh - rl) / (2 * h);
            for (Eigen::Index r = 0; r < fd.size(); ++r) {
                const double a = analytic(r, c);
                worst = std::max(worst, std::abs(fd(r) - a) / std::max(1.0, std::abs(a)));
            }
        }
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-4 && secs < 10.0,
            fmt("max rel err %.3g over %d configs (%d degenerate skipped), %.2f s", worst, checked, rejected, secs)};
}

// 2. Analytic query against plain tau sampling, 1e4 samples per slice.
Verdict esdf_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1002);
    std::uniform_real_distribution<double> up(0, 10);
    std::uniform_real_distribution<double> uv(-1.8, 1.8);
    std::uniform_int_distribution<int> count(1, 6);
    std::uniform_real_distribution<double> ut(0.0, 0.999);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        std::vector<Obstacle> obs;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) obs.push_back({i, Vec2(up(rng), up(rng)), Vec2(uv(rng), uv(rng))});
        const auto field = field_of(obs, 1.0, 0.2);
        const StateTime s{Vec2(up(rng), up(rng)), Vec2(uv(rng), uv(rng)), ut(rng)};
        double sampled = std::numeric_limits<double>::infinity();
        for (const auto& seg : field->slice(field->slice_index(s.t))) {
            sampled = std::min(sampled, oracle::sampled_min_distance(s.p - seg.a, s.v - seg.v, field->dt()) -
                                            seg.radius);
        }
        worst = std::max(worst, std::abs(field->query(s).d - sampled));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-6 && secs < 10.0, fmt("max |d - sampled| %.3g over 1000 configs, %.2f s", worst, secs)};
}

// 3. Pairwise sparse energy against the dense kernel energy by quadrature.
Verdict markov_factorization() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1003);
    std::uniform_real_distribution<double> u(-2, 2);
    std::uniform_real_distribution<double> udt(0.05, 0.5);
    std::uniform_real_distribution<double> uq(0.5, 2.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double dt = udt(rng);
        const double q = uq(rng);
        const double start = u(rng);
        std::vector<Vec4> s;
        std::vector<double> t;
        for (int i = 0; i < 5; ++i) {
            s.push_back(Vec4(u(rng), u(rng), u(rng), u(rng)));
            t.push_back(start + dt * i);
        }
        const double sparse = prior_neg_log_density(Trajectory::from_states(start, dt, s), GpParams{q});
        const double dense = oracle::dense_kernel_energy(s, t, q);
        worst = std::max(worst, std::abs(sparse - dense) / std::abs(dense));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-6 && secs < 30.0, fmt("max rel diff %.3g over 100 trajectories, %.2f s", worst, secs)};
}

// 4. Without obstacles LM lands on the straight constant-velocity mean.
Verdict quadratic_exactness() {
    std::mt19937_64 rng(1004);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::uniform_real_distribution<double> uv(-1.8, 1.8);
    std::uniform_int_distribution<int> un(3, 111);  // up to a full 10 s plan
    double worst_obj = 0.0;
    double worst_dev = 0.0;
    int worst_iters = 0;
    const auto field = field_of({}, 12.0, 0.2);
    for (int k = 0; k < 200; ++k) {
        const int n = un(rng);
        const Vec2 p0(5 + 4 * u(rng), 5 + 4 * u(rng));
        const Vec2 v(uv(rng), uv(rng));
        std::vector<Vec4> mean;
        for (int i = 0; i < n; ++i) {
            const Vec2 p = p0 + v * (0.1 * i);
            mean.push_back(Vec4(p.x(), p.y(), v.x(), v.y()));
        }
        auto init = mean;
        for (int i = 1; i + 1 < n; ++i) init[i] += Vec4(u(rng), u(rng), u(rng), u(rng));
        const FactorGraph g(static_cast<std::size_t>(n), 0.1, field);
        const auto res = optimize(Trajectory::from_states(0.0, 0.1, init), g, 3);
        worst_obj = std::max(worst_obj, res.report.final_objective);
        worst_iters = std::max(worst_iters, res.report.iterations);
        for (int i = 0; i < n; ++i) worst_dev = std::max(worst_dev, (res.trajectory[i].state() - mean[i]).norm());
    }
    return {worst_obj < 1e-9 && worst_iters <= 3,
            fmt("worst objective %.3g after <= %d iterations, max deviation from the mean %.3g (200 runs)",
                worst_obj, worst_iters, worst_dev)};
}

// 5. NaviCost lower bound and A* optimality against exhaustive Dijkstra.
Verdict front_end_optimality() {
    std::mt19937_64 rng(1005);
    std::uniform_real_distribution<double> u(0, 10);
    std::uniform_real_distribution<double> uv(-1.8, 1.8);
    std::uniform_real_distribution<double> ucs(0.1, 1.0);
    std::size_t violations = 0;
    std::vector<Obstacle> obs;
    for (int i = 0; i < 20; ++i) obs.push_back({i, Vec2(u(rng), u(rng)), Vec2(uv(rng), uv(rng))});
    const WorldSnapshot w{ObstacleSet(obs, 0.3), 0.0, Vec2(10, 10)};
    for (int k = 0; k < 100000; ++k) {
        const StateTime a{Vec2(u(rng), u(rng)), Vec2::Zero(), u(rng) / 5};
        const StateTime b{Vec2(u(rng), u(rng)), Vec2::Zero(), a.t + 0.1 + u(rng) / 5};
        if (navi_cost(a, b, w, ucs(rng)) < (b.p - a.p).norm()) ++violations;
    }

    ScenarioConfig cfg;
    int compared = 0;
    int mismatches = 0;
    std::uint64_t seed = 0;
    for (; compared < 20 && seed < 200; ++seed) {
        const int n = 1 + static_cast<int>(seed % 8);
        const auto sc = init_scenario(cfg, n, 5000 + seed);
        StateTimeGraph g(sc.world, cfg);
        const auto path = state_time_astar(g, sc.robot, cfg.goal);
        if (!path.complete) continue;
        ++compared;
        StateTimeGraph fresh(sc.world, cfg);
        if (path.nodes.back().g != oracle::dijkstra_goal_cost(fresh, sc.robot, cfg.goal)) ++mismatches;
    }
    return {violations == 0 && compared == 20 && mismatches == 0,
            fmt("%zu NaviCost violations in 1e5 pairs; %d/%d scenes differ from Dijkstra (%llu seeds tried)",
                violations, mismatches, compared, static_cast<unsigned long long>(seed))};
}

struct AuditTally {
    int successes = 0;
    int penetrations = 0;      // re-audited at dt/10 from the recorded obstacles
    int disagreements = 0;     // recorded clearance differs from the re-audit
    double fine_min = std::numeric_limits<double>::infinity();  // dt/100, informational

    void add(const ExecutionTrace& trace, const ScenarioConfig& cfg) {
        if (!trace.success()) return;
        ++successes;
        for (const auto& tick : trace.ticks) {
            const double again = oracle::sampled_segment_clearance(tick.robot.p, tick.command, cfg.dt,
                                                                   tick.obstacles, 0.0, cfg.c_eff(), kAuditSubsteps);
            if (again < 0.0) ++penetrations;
            if (std::abs(again - tick.min_clearance) > 1e-9 * std::max(1.0, std::abs(again))) ++disagreements;
            fine_min = std::min(fine_min, oracle::sampled_segment_clearance(tick.robot.p, tick.command, cfg.dt,
                                                                            tick.obstacles, 0.0, cfg.c_eff(), 100));
        }
    }
};

// 6. Empty world, 10 m: every arrival within 1.1 x the straight-line time.
Verdict empty_world(AuditTally& audit) {
    ScenarioConfig cfg;
    const double bound = 1.1 * (10.0 / 1.8);
    double worst = 0.0;
    int failures = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto r = run_trial(cfg, 0, PlannerKind::st, seed);
        if (!r.trace.success()) ++failures;
        worst = std::max(worst, r.outcome.time_cost);
        audit.add(r.trace, cfg);
    }
    return {failures == 0 && worst <= bound,
            fmt("worst arrival %.2f s (bound %.2f s), %d/30 failed", worst, bound, failures)};
}

struct SweepData {
    std::vector<MetricsRow> rows;
    std::string csv;
    std::vector<double> front_ms;  // ST ticks at 40 obstacles
    std::vector<double> back_ms;
    std::vector<double> cycle_ms;
    double seconds = 0.0;
};

SweepData run_sweep(AuditTally* audit) {
    ExperimentConfig cfg;  // {20, 40, 60, 80} x 30 trials, ST / VO / WG
    SweepData out;
    const auto t0 = Clock::now();
    out.rows = run_experiment(cfg, {}, [&](double value, PlannerKind p, int, const TrialResult& r) {
        if (audit) audit->add(r.trace, cfg.base);
        if (value == 40 && p == PlannerKind::st) {
            for (const auto& tick : r.trace.ticks) {
                out.front_ms.push_back(tick.front_end_ms);
                out.back_ms.push_back(tick.back_end_ms);
                out.cycle_ms.push_back(tick.front_end_ms + tick.back_end_ms);
            }
        }
    });
    out.seconds = seconds_since(t0);
    std::ostringstream csv;
    write_metrics_csv(out.rows, csv);
    out.csv = csv.str();
    return out;
}

const MetricsRow& row_of(const SweepData& d, double value, PlannerKind p) {
    for (const auto& r : d.rows) {
        if (r.sweep_value == value && r.planner == p) return r;
    }
    throw std::logic_error("missing sweep row");
}

// 7. Success falls with density, allowing one small inversion per planner.
Verdict trend(const SweepData& d) {
    bool pass = d.seconds <= 20 * 60;
    std::string detail;
    for (PlannerKind p : {PlannerKind::st, PlannerKind::vo, PlannerKind::wg}) {
        int inversions = 0;
        double worst_rise = 0.0;
        std::string rates;
        double prev = 2.0;
        for (double n : {20.0, 40.0, 60.0, 80.0}) {
            const double rate = row_of(d, n, p).success_rate;
            rates += fmt("%s%.3f", rates.empty() ? "" : "/", rate);
            if (rate > prev + 1e-12) {
                ++inversions;
                worst_rise = std::max(worst_rise, rate - prev);
            }
            prev = rate;
        }
        if (inversions > 1 || worst_rise > 0.1 + 1e-12) pass = false;
        detail += fmt("%s %s (%d inv); ", to_string(p).c_str(), rates.c_str(), inversions);
    }
    return {pass, detail + fmt("sweep %.1f s", d.seconds)};
}

// 8. At the default setting ST beats both baselines on the paired seeds.
Verdict ranking(const SweepData& d) {
    const auto& st = row_of(d, 40, PlannerKind::st);
    const auto& vo = row_of(d, 40, PlannerKind::vo);
    const auto& wg = row_of(d, 40, PlannerKind::wg);
    const bool pass = st.success_rate >= vo.success_rate && st.success_rate >= wg.success_rate &&
                      st.mean_time_cost <= vo.mean_time_cost && st.mean_time_cost <= wg.mean_time_cost;
    return {pass, fmt("success ST %.3f VO %.3f WG %.3f; mean time ST %.2f VO %.2f WG %.2f s", st.success_rate,
                      vo.success_rate, wg.success_rate, st.mean_time_cost, vo.mean_time_cost, wg.mean_time_cost)};
}

// 9. Median per-replan timings at 40 obstacles.
Verdict efficiency(const SweepData& d) {
    const double fe = median(d.front_ms);
    const double be = median(d.back_ms);
    const double cycle = median(d.cycle_ms);
    return {fe <= 10.0 && be <= 30.0 && cycle <= 50.0,
            fmt("median front end %.2f ms, back end %.2f ms, cycle %.2f ms (%.0f Hz) over %zu replans", fe, be,
                cycle, 1000.0 / cycle, d.front_ms.size())};
}

Verdict safety(const AuditTally& a) {
    return {a.penetrations == 0 && a.disagreements == 0 && a.successes > 0,
            fmt("%d successful trials, %d penetrating steps, %d recorded/re-audit mismatches; finer dt/100 "
                "min clearance %.4f m",
                a.successes, a.penetrations, a.disagreements, a.fine_min)};
}

Verdict determinism(const SweepData& first) {
    const SweepData again = run_sweep(nullptr);
    return {again.csv == first.csv, fmt("%zu-byte metrics CSV, rerun %s", first.csv.size(),
                                        again.csv == first.csv ? "identical" : "differs")};
}

}  // namespace

int main() {
    int failed = 0;
    auto report = [&](int id, const char* name, const Verdict& v) {
        std::printf("[%s] %2d %-26s %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
        std::fflush(stdout);
        if (!v.pass) ++failed;
    };
    auto guarded = [&](int id, const char* name, const std::function<Verdict()>& f) {
        try {
            report(id, name, f());
        } catch (const std::exception& e) {
            report(id, name, {false, std::string("exception: ") + e.what()});
        }
    };

    guarded(1, "gradient fidelity", gradient_fidelity);
    guarded(2, "timed-esdf oracle", esdf_oracle);
    guarded(3, "markov factorization", markov_factorization);
    guarded(4, "quadratic exactness", quadratic_exactness);
    guarded(5, "front-end optimality", front_end_optimality);

    AuditTally audit;
    guarded(6, "empty-world time", [&] { return empty_world(audit); });
    SweepData sweep;
    bool have_sweep = false;
    try {
        sweep = run_sweep(&audit);
        have_sweep = true;
    } catch (const std::exception& e) {
        for (int id : {7, 8, 9}) report(id, "sweep", {false, std::string("exception: ") + e.what()});
    }
    if (have_sweep) {
        guarded(7, "density trend", [&] { return trend(sweep); });
        guarded(8, "ranking at 40", [&] { return ranking(sweep); });
        guarded(9, "efficiency", [&] { return efficiency(sweep); });
    }
    guarded(10, "safety audit", [&] { return safety(audit); });
    if (have_sweep) {
        guarded(11, "determinism", [&] { return determinism(sweep); });
    } else {
        report(11, "determinism", {false, "no sweep to rerun"});
    }

    std::printf("%d of 11 criteria failed\n", failed);
    return failed ? 1 : 0;
}

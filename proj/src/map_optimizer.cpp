#include "stplan/map_optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SparseCholesky>

namespace stplan {

FactorGraph::FactorGraph(std::size_t n_waypoints, double dt, std::shared_ptr<const TimedEsdf> field,
                         OptimizerParams params)
    : n_waypoints_(n_waypoints), dt_(dt), field_(std::move(field)), params_(params) {
    if (n_waypoints_ < 2) {
        throw std::invalid_argument("factor graph needs at least two waypoints");
    }
    if (!field_) {
        throw std::invalid_argument("factor graph needs a Timed-ESDF");
    }
    if (!(params_.sigma_obs > 0.0)) {
        throw std::invalid_argument("sigma_obs must be positive");
    }
    const PriorFactor proto = make_prior_factor(1, dt_, params_.gp);
    for (std::size_t i = 1; i < n_waypoints_; ++i) {
        PriorFactor f = proto;
        f.i = i;
        priors_.push_back(f);
    }
    for (std::size_t i = 1; i + 1 < n_waypoints_; ++i) {
        obstacle_factors_.push_back(i);
    }
}

FactorGraph FactorGraph::without_obstacle_factor(std::size_t i) const {
    FactorGraph copy = *this;
    std::erase(copy.obstacle_factors_, i);
    return copy;
}

void FactorGraph::check_shape(const Trajectory& traj) const {
    if (traj.size() != n_waypoints_ || std::abs(traj.dt() - dt_) > 1e-12) {
        throw std::invalid_argument("trajectory does not match factor graph shape");
    }
}

double objective(const Trajectory& traj, const FactorGraph& graph) {
    graph.check_shape(traj);
    double prior = 0.0;
    for (const auto& f : graph.prior_factors()) {
        const Vec4 e = f.phi * traj[f.i - 1].state() - traj[f.i].state();
        prior += 0.5 * (f.whitening * e).squaredNorm();
    }
    const double inv_sigma = 1.0 / graph.params().sigma_obs;
    double obstacle = 0.0;
    for (std::size_t i : graph.obstacle_factors()) {
        const double h = hinge(graph.field().query(traj[i]).d, graph.field().epsilon()) * inv_sigma;
        obstacle += 0.5 * h * h;
    }
    return prior + obstacle;
}

Linearization residuals_and_jacobian(const Trajectory& traj, const FactorGraph& graph) {
    graph.check_shape(traj);
    const auto n = traj.size();
    Linearization lin;
    lin.residuals.resize(static_cast<Eigen::Index>(graph.residual_dim()));
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(graph.prior_factors().size() * 32 + graph.obstacle_factors().size() * 4);

    // Column offset of a free waypoint, or -1 for a pinned endpoint.
    auto column = [n](std::size_t i) -> int {
        return (i == 0 || i + 1 == n) ? -1 : static_cast<int>(4 * (i - 1));
    };

    int row = 0;
    for (const auto& f : graph.prior_factors()) {
        const Vec4 e = f.phi * traj[f.i - 1].state() - traj[f.i].state();
        lin.residuals.segment<4>(row) = f.whitening * e;
        const Mat4 d_prev = f.whitening * f.phi;
        const Mat4 d_cur = -f.whitening;
        if (const int c = column(f.i - 1); c >= 0) {
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    if (d_prev(a, b) != 0.0) triplets.emplace_back(row + a, c + b, d_prev(a, b));
        }
        if (const int c = column(f.i); c >= 0) {
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    if (d_cur(a, b) != 0.0) triplets.emplace_back(row + a, c + b, d_cur(a, b));
        }
        row += 4;
    }

    const double inv_sigma = 1.0 / graph.params().sigma_obs;
    const double eps = graph.field().epsilon();
    for (std::size_t i : graph.obstacle_factors()) {
        const auto q = graph.field().query(traj[i]);
        lin.residuals[row] = hinge(q.d, eps) * inv_sigma;
        const int c = column(i);
        if (q.d < eps && c >= 0) {
            triplets.emplace_back(row, c + 0, -q.grad_p.x() * inv_sigma);
            triplets.emplace_back(row, c + 1, -q.grad_p.y() * inv_sigma);
            triplets.emplace_back(row, c + 2, -q.grad_v.x() * inv_sigma);
            triplets.emplace_back(row, c + 3, -q.grad_v.y() * inv_sigma);
        }
        ++row;
    }

    lin.jacobian.resize(static_cast<Eigen::Index>(graph.residual_dim()),
                        static_cast<Eigen::Index>(graph.n_variables()));
    lin.jacobian.setFromTriplets(triplets.begin(), triplets.end());
    return lin;
}

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::converged:
            return "converged";
        case SolveStatus::max_iterations:
            return "max_iterations";
        case SolveStatus::solver_failure:
            return "solver_failure";
    }
    return "unknown";
}

void to_json(nlohmann::json& j, const SolveReport& report) {
    j = nlohmann::json{
        {"iterations", report.iterations},
        {"initial_objective", report.initial_objective},
        {"final_objective", report.final_objective},
        {"converged", report.converged},
        {"status", to_string(report.status)},
        {"final_lambda", report.final_lambda},
        {"objective_trace", report.objective_trace},
    };
}

namespace {

constexpr double kRelativeTolerance = 1e-6;
constexpr double kStepTolerance = 1e-8;
constexpr double kMaxLambda = 1e16;

std::vector<Vec4> apply_step(const std::vector<Vec4>& states, const Eigen::VectorXd& delta) {
    std::vector<Vec4> out = states;
    for (std::size_t i = 1; i + 1 < out.size(); ++i) {
        out[i] += delta.segment<4>(static_cast<Eigen::Index>(4 * (i - 1)));
    }
    return out;
}

}  // namespace

OptimizeResult optimize(const Trajectory& init, const FactorGraph& graph, int max_iters, double lambda0) {
    graph.check_shape(init);
    SolveReport report;
    std::vector<Vec4> states = init.states();
    Trajectory current = init;
    double f = objective(current, graph);
    report.initial_objective = f;
    report.objective_trace.push_back(f);
    double lambda = lambda0;

    if (graph.n_free() == 0) {
        report.final_objective = f;
        report.converged = max_iters > 0;
        report.status = report.converged ? SolveStatus::converged : SolveStatus::max_iterations;
        return {current, report};
    }

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    while (report.iterations < max_iters) {
        ++report.iterations;
        const Linearization lin = residuals_and_jacobian(current, graph);
        const Eigen::SparseMatrix<double> jt = lin.jacobian.transpose();
        Eigen::SparseMatrix<double> normal = jt * lin.jacobian;
        const Eigen::VectorXd gradient = jt * lin.residuals;
        const Eigen::VectorXd diag = normal.diagonal();
        for (Eigen::Index k = 0; k < diag.size(); ++k) {
            normal.coeffRef(k, k) += lambda * diag[k];
        }
        // Active obstacle rows change the pattern between iterations.
        solver.compute(normal);
        if (solver.info() != Eigen::Success) {
            lambda *= 3.0;
            if (lambda > kMaxLambda) {
                report.status = SolveStatus::solver_failure;
                break;
            }
            continue;
        }
        const Eigen::VectorXd delta = solver.solve(-gradient);
        if (!delta.allFinite()) {
            report.status = SolveStatus::solver_failure;
            break;
        }
        if (delta.norm() < kStepTolerance) {
            report.converged = true;
            report.status = SolveStatus::converged;
            break;
        }
        std::vector<Vec4> candidate_states = apply_step(states, delta);
        Trajectory candidate = Trajectory::from_states(init.t0(), init.dt(), candidate_states);
        const double f_new = objective(candidate, graph);
        if (f_new < f) {
            const double relative = (f - f_new) / std::max(f, 1e-300);
            states = std::move(candidate_states);
            current = std::move(candidate);
            f = f_new;
            report.objective_trace.push_back(f);
            lambda /= 3.0;
            if (relative < kRelativeTolerance) {
                report.converged = true;
                report.status = SolveStatus::converged;
                break;
            }
        } else {
            lambda *= 3.0;
            if (lambda > kMaxLambda) {
                // No descent left at any damping: a stationary point up to precision.
                report.converged = true;
                report.status = SolveStatus::converged;
                break;
            }
        }
    }
    report.final_objective = f;
    report.final_lambda = lambda;
    return {current, report};
}

}  // namespace stplan

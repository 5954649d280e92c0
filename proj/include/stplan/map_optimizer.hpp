#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <json.hpp>

#include "stplan/core_types.hpp"
#include "stplan/gp_prior.hpp"
#include "stplan/timed_esdf.hpp"

namespace stplan {

struct OptimizerParams {
    GpParams gp;
    double sigma_obs = 0.05;  // shared isotropic obstacle-likelihood std-dev
};

/// MAP objective over a trajectory with pinned first and last waypoints:
/// one prior factor per consecutive pair plus one hinge factor per free
/// waypoint, evaluated against a shared Timed-ESDF.
class FactorGraph {
public:
    FactorGraph(std::size_t n_waypoints, double dt, std::shared_ptr<const TimedEsdf> field,
                OptimizerParams params = {});

    std::size_t n_waypoints() const { return n_waypoints_; }
    double dt() const { return dt_; }
    std::size_t n_free() const { return n_waypoints_ - 2; }
    std::size_t n_variables() const { return 4 * n_free(); }
    std::size_t residual_dim() const { return 4 * priors_.size() + obstacle_factors_.size(); }
    const std::vector<PriorFactor>& prior_factors() const { return priors_; }
    const std::vector<std::size_t>& obstacle_factors() const { return obstacle_factors_; }
    const TimedEsdf& field() const { return *field_; }
    const OptimizerParams& params() const { return params_; }

    /// Copy of this graph without the obstacle factor on waypoint i.
    FactorGraph without_obstacle_factor(std::size_t i) const;

    /// Throws std::invalid_argument unless traj matches the graph shape.
    void check_shape(const Trajectory& traj) const;

private:
    std::size_t n_waypoints_;
    double dt_;
    std::shared_ptr<const TimedEsdf> field_;
    OptimizerParams params_;
    std::vector<PriorFactor> priors_;
    std::vector<std::size_t> obstacle_factors_;
};

/// Prior energy plus 1/2 sigma_obs^-2 sum hinge(d_i, eps)^2.
double objective(const Trajectory& traj, const FactorGraph& graph);

struct Linearization {
    Eigen::VectorXd residuals;             // whitened, so 1/2 |r|^2 == objective
    Eigen::SparseMatrix<double> jacobian;  // columns: [p; v] of free waypoints 1..n-2
};

Linearization residuals_and_jacobian(const Trajectory& traj, const FactorGraph& graph);

enum class SolveStatus { converged, max_iterations, solver_failure };

struct SolveReport {
    int iterations = 0;
    double initial_objective = 0.0;
    double final_objective = 0.0;
    bool converged = false;
    SolveStatus status = SolveStatus::max_iterations;
    double final_lambda = 0.0;
    std::vector<double> objective_trace;  // initial value, then one entry per accepted step
};

void to_json(nlohmann::json& j, const SolveReport& report);
std::string to_string(SolveStatus status);

struct OptimizeResult {
    Trajectory trajectory;
    SolveReport report;
};

/// Levenberg-Marquardt on (J^T J + lambda diag(J^T J)) delta = -J^T r.
/// Accepted steps divide lambda by 3, rejected ones multiply it by 3. Stops on
/// relative objective change < 1e-6, |delta| < 1e-8 or max_iters. Endpoint
/// waypoints are never touched.
OptimizeResult optimize(const Trajectory& init, const FactorGraph& graph, int max_iters, double lambda0 = 3e-8);

}  // namespace stplan

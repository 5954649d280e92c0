#pragma once

#include "stplan/core_types.hpp"

namespace stplan {

/// Constant-velocity (white-noise-on-acceleration) GP prior over [p; v].
struct GpParams {
    double q = 1.0;  // power-spectral density, Qc = q * I2
};

/// Pairwise prior factor between waypoints i-1 and i.
struct PriorFactor {
    std::size_t i = 1;
    Mat4 phi = Mat4::Identity();
    Mat4 q = Mat4::Identity();
    Mat4 q_inv = Mat4::Identity();
    Mat4 whitening = Mat4::Identity();  // W with W^T W = q_inv
};

/// [[I, dt I], [0, I]]. Throws std::invalid_argument for negative dt.
Mat4 transition(double delta_t);

/// q * [[dt^3/3 I, dt^2/2 I], [dt^2/2 I, dt I]]. Throws for dt <= 0.
Mat4 process_noise_cov(double delta_t, const GpParams& params);

PriorFactor make_prior_factor(std::size_t i, double delta_t, const GpParams& params);

/// e = Phi(dt) [prev.p; prev.v] - [cur.p; cur.v]. Throws std::invalid_argument
/// unless cur.t > prev.t.
Vec4 prior_error(const StateTime& prev, const StateTime& cur, const GpParams& params);

/// 1/2 sum_i e_i^T Q_i^-1 e_i over consecutive waypoint pairs.
double prior_neg_log_density(const Trajectory& traj, const GpParams& params);

}  // namespace stplan

#include "stplan/gp_prior.hpp"

#include <stdexcept>

#include <Eigen/Cholesky>

namespace stplan {

Mat4 transition(double delta_t) {
    if (delta_t < 0.0) {
        throw std::invalid_argument("transition needs delta_t >= 0");
    }
    Mat4 phi = Mat4::Identity();
    phi(0, 2) = delta_t;
    phi(1, 3) = delta_t;
    return phi;
}

Mat4 process_noise_cov(double delta_t, const GpParams& params) {
    if (!(delta_t > 0.0)) {
        throw std::invalid_argument("process noise needs delta_t > 0");
    }
    if (!(params.q > 0.0)) {
        throw std::invalid_argument("power-spectral density must be positive");
    }
    const double pp = delta_t * delta_t * delta_t / 3.0;
    const double pv = delta_t * delta_t / 2.0;
    const double vv = delta_t;
    Mat4 qi = Mat4::Zero();
    for (int axis = 0; axis < 2; ++axis) {
        qi(axis, axis) = pp;
        qi(axis, axis + 2) = pv;
        qi(axis + 2, axis) = pv;
        qi(axis + 2, axis + 2) = vv;
    }
    return params.q * qi;
}

PriorFactor make_prior_factor(std::size_t i, double delta_t, const GpParams& params) {
    PriorFactor f;
    f.i = i;
    f.phi = transition(delta_t);
    f.q = process_noise_cov(delta_t, params);
    // Q = L L^T, so W = L^-1 gives W^T W = Q^-1.
    const Eigen::LLT<Mat4> llt(f.q);
    f.whitening = llt.matrixL().solve(Mat4::Identity());
    f.q_inv = f.whitening.transpose() * f.whitening;
    return f;
}

Vec4 prior_error(const StateTime& prev, const StateTime& cur, const GpParams& params) {
    (void)params;
    if (!(cur.t > prev.t)) {
        throw std::invalid_argument("prior error needs strictly increasing times");
    }
    return transition(cur.t - prev.t) * prev.state() - cur.state();
}

double prior_neg_log_density(const Trajectory& traj, const GpParams& params) {
    const PriorFactor f = make_prior_factor(1, traj.dt(), params);
    double total = 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const Vec4 e = f.phi * traj[i - 1].state() - traj[i].state();
        total += 0.5 * (f.whitening * e).squaredNorm();
    }
    return total;
}

}  // namespace stplan

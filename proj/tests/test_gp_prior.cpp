#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stplan/gp_prior.hpp"

using namespace stplan;

TEST_CASE("transition matrix") {
    const Mat4 phi = transition(0.1);
    Mat4 expected = Mat4::Identity();
    expected(0, 2) = 0.1;
    expected(1, 3) = 0.1;
    CHECK((phi - expected).norm() == 0.0);
    CHECK(transition(0.0) == Mat4::Identity());
    CHECK_THROWS_AS(transition(-0.1), std::invalid_argument);
    CHECK((transition(0.37) - oracle::phi_series(0.37)).norm() < 1e-15);
}

TEST_CASE("process noise covariance matches quadrature") {
    const GpParams p{1.0};
    const Mat4 q = process_noise_cov(0.1, p);
    CHECK(q(0, 0) == doctest::Approx(3.3333e-4).epsilon(1e-4));
    CHECK(q(0, 2) == doctest::Approx(5e-3));
    CHECK(q(2, 2) == doctest::Approx(0.1));
    CHECK(q(0, 1) == 0.0);
    for (double dt : {0.05, 0.1, 0.7}) {
        for (double qc : {0.5, 1.0, 3.0}) {
            const Mat4 quad = oracle::quadrature_q(dt, qc);
            CHECK((process_noise_cov(dt, GpParams{qc}) - quad).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    CHECK_THROWS_AS(process_noise_cov(0.0, p), std::invalid_argument);
}

TEST_CASE("prior factor whitening satisfies W^T W = Q^-1") {
    for (double dt : {0.05, 0.1, 1.0}) {
        const PriorFactor f = make_prior_factor(3, dt, GpParams{2.0});
        CHECK(f.i == 3);
        const Mat4 inv = f.q.inverse();
        CHECK((f.q_inv - inv).norm() <= 1e-9 * inv.norm());
        CHECK((f.whitening.transpose() * f.whitening - inv).norm() <= 1e-9 * inv.norm());
        CHECK((f.q - f.q.transpose()).norm() == 0.0);
        CHECK(f.q.llt().info() == Eigen::Success);
    }
}

TEST_CASE("prior error examples") {
    const GpParams p;
    const StateTime prev{Vec2(0, 0), Vec2(1, 0), 0.0};
    CHECK(prior_error(prev, {Vec2(0.1, 0), Vec2(1, 0), 0.1}, p).norm() < 1e-15);
    const Vec4 pos = prior_error(prev, {Vec2(0.12, 0), Vec2(1, 0), 0.1}, p);
    CHECK((pos - Vec4(-0.02, 0, 0, 0)).norm() < 1e-15);
    const Vec4 vel = prior_error(prev, {Vec2(0.1, 0), Vec2(0.8, 0), 0.1}, p);
    CHECK((vel - Vec4(0, 0, 0.2, 0)).norm() < 1e-15);
    CHECK_THROWS_AS(prior_error(prev, {Vec2(0.1, 0), Vec2(1, 0), 0.0}, p), std::invalid_argument);
}

TEST_CASE("prior error Jacobians are Phi and -I") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2, 2);
    const GpParams p;
    const double h = 1e-6;
    for (int k = 0; k < 50; ++k) {
        const StateTime a{Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng)), 0.0};
        const StateTime b{Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng)), 0.1};
        for (int c = 0; c < 4; ++c) {
            auto bump = [&](StateTime s, double d) {
                (c < 2 ? s.p[c] : s.v[c - 2]) += d;
                return s;
            };
            const Vec4 da = (prior_error(bump(a, h), b, p) - prior_error(bump(a, -h), b, p)) / (2 * h);
            const Vec4 db = (prior_error(a, bump(b, h), p) - prior_error(a, bump(b, -h), p)) / (2 * h);
            CHECK((da - transition(0.1).col(c)).norm() < 1e-8);
            CHECK((db + Mat4::Identity().col(c)).norm() < 1e-8);
        }
    }
}

TEST_CASE("negative log density") {
    const GpParams p;
    std::vector<Vec4> line;
    for (int i = 0; i < 6; ++i) line.push_back(Vec4(0.1 * i, 0.2 * i, 1.0, 2.0));
    CHECK(prior_neg_log_density(Trajectory::from_states(0.0, 0.1, line), p) < 1e-24);

    auto kinked = line;
    kinked[3](0) -= 0.01;  // factor 3 sees e = (0.01, 0, 0, 0); factor 4 also moves
    const Vec4 e(0.01, 0, 0, 0);
    const Mat4 qinv = oracle::quadrature_q(0.1, 1.0).inverse();
    const Vec4 e4 = transition(0.1) * Vec4(-0.01, 0, 0, 0);
    const double expected = 0.5 * e.dot(qinv * e) + 0.5 * e4.dot(qinv * e4);
    CHECK(prior_neg_log_density(Trajectory::from_states(0.0, 0.1, kinked), p) ==
          doctest::Approx(expected).epsilon(1e-9));

    // A kink in the last waypoint touches a single factor.
    auto tail = line;
    tail.back()(0) += 0.01;
    const Vec4 et(-0.01, 0, 0, 0);
    CHECK(prior_neg_log_density(Trajectory::from_states(0.0, 0.1, tail), p) ==
          doctest::Approx(0.5 * et.dot(qinv * et)).epsilon(1e-9));
}

TEST_CASE("negative log density is non-negative and translation invariant") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    const GpParams p{0.7};
    for (int k = 0; k < 100; ++k) {
        std::vector<Vec4> s;
        for (int i = 0; i < 7; ++i) s.push_back(Vec4(u(rng), u(rng), u(rng), u(rng)));
        const double e = prior_neg_log_density(Trajectory::from_states(1.0, 0.1, s), p);
        CHECK(e >= 0.0);
        const Vec4 shift(u(rng) * 5, u(rng) * 5, 0, 0);
        for (auto& x : s) x += shift;
        CHECK(prior_neg_log_density(Trajectory::from_states(1.0, 0.1, s), p) ==
              doctest::Approx(e).epsilon(1e-9));
    }
}

TEST_CASE("sparse energy equals the dense kernel energy") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 10; ++k) {
        std::vector<Vec4> s;
        std::vector<double> t;
        for (int i = 0; i < 5; ++i) {
            s.push_back(Vec4(u(rng), u(rng), u(rng), u(rng)));
            t.push_back(0.1 * i);
        }
        const double sparse = prior_neg_log_density(Trajectory::from_states(0.0, 0.1, s), GpParams{1.0});
        const double dense = oracle::dense_kernel_energy(s, t, 1.0);
        CHECK(std::abs(sparse - dense) <= 1e-6 * std::abs(dense));
    }
}

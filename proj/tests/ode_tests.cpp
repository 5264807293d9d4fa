#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gflow/ode.hpp"

using namespace gflow;

namespace {
Config cfg;
}

TEST_CASE("constant field gives a constant trajectory") {
    auto rhs = [](double, const std::vector<double>&, std::vector<double>& dy) {
        dy[0] = 0.0;
    };
    auto traj = integrate_ode(rhs, {1.5}, -3.0, 3.0, cfg);
    CHECK_FALSE(traj.blowup_forward);
    CHECK_FALSE(traj.blowup_backward);
    CHECK(traj.value(2.17)[0] == 1.5);
    CHECK(traj.value(-2.9)[0] == 1.5);
}

TEST_CASE("linear field reproduces the exponential") {
    auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
        dy[0] = y[0];
    };
    auto traj = integrate_ode(rhs, {1.0}, -1.0, 1.0, cfg);
    for (double t : {-1.0, -0.63, -0.2, 0.0, 0.31, 0.77, 1.0})
        CHECK(traj.value(t)[0] == Catch::Approx(std::exp(t)).margin(1e-8));
}

TEST_CASE("quadratic field blows up in finite time") {
    // x' = x^2, x(0) = 1: x(t) = 1/(1-t), escape at t = 1
    auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
        dy[0] = y[0] * y[0];
    };
    auto traj = integrate_ode(rhs, {1.0}, -2.0, 2.0, cfg);
    CHECK(traj.blowup_forward);
    CHECK_FALSE(traj.blowup_backward);
    CHECK(traj.t_max() < 1.0);
    CHECK(traj.t_max() > 0.9);
    for (double t : {-1.5, -0.5, 0.5, 0.85})
        CHECK(traj.value(t)[0] == Catch::Approx(1.0 / (1.0 - t)).epsilon(2e-6));
    CHECK_THROWS_AS(traj.value(1.5), OutOfIntegratedRange);
}

TEST_CASE("harmonic oscillator round trip") {
    auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    auto traj = integrate_ode(rhs, {1.0, 0.0}, 0.0, 2.0 * M_PI, cfg);
    auto end = traj.value(2.0 * M_PI);
    CHECK(end[0] == Catch::Approx(1.0).margin(1e-7));
    CHECK(end[1] == Catch::Approx(0.0).margin(1e-7));
    // dense output mid-interval
    CHECK(traj.value(M_PI / 3)[0] == Catch::Approx(0.5).margin(1e-7));
}

TEST_CASE("two step controls agree within combined tolerance") {
    auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
        dy[0] = std::sin(y[0]) + 0.3 * y[0];
    };
    Config loose = cfg;
    loose.ode_abs_tol = 1e-6;
    loose.ode_rel_tol = 1e-6;
    auto a = integrate_ode(rhs, {0.8}, 0.0, 2.0, cfg);
    auto b = integrate_ode(rhs, {0.8}, 0.0, 2.0, loose);
    for (double t : {0.5, 1.0, 1.7})
        CHECK(a.value(t)[0] == Catch::Approx(b.value(t)[0]).margin(1e-4));
}

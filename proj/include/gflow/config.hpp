#pragma once

#include <cstdint>

namespace gflow {

// Every tolerance and threshold used across the engine lives here, so a
// computation is reproducible from (inputs, config) alone.
struct Config {
    // series truncation
    int weight_cap = 4;

    // pointwise expression/coefficient equality
    int sample_points = 20;
    double sample_tol = 1e-9;
    double point_lo = 0.3; // sample box for base coordinates
    double point_hi = 1.7;

    // ODE integration (embedded Runge-Kutta 4(5))
    double ode_abs_tol = 1e-9;
    double ode_rel_tol = 1e-8;
    double blowup_norm = 1e8;
    double min_step = 1e-12;
    double max_step = 0.1;
    double t_max = 8.0;          // cap for domain estimates of complete fields
    double cond_limit = 1e8;     // fundamental-matrix conditioning flag

    // verdicts for numeric theorem checks: pass below, fail above,
    // INDETERMINATE in between
    double pass_threshold = 1e-6;
    double fail_threshold = 1e-3;

    // sampling of (point, s, t) tuples for numeric checks
    int verify_samples = 6;
    double verify_t_range = 0.4;
    std::uint64_t seed = 20240915;

    // step for finite differences in base coordinates (5-point stencils)
    double fd_step = 1e-2;
};

} // namespace gflow

#pragma once

#include <vector>

namespace cfmac {

/// Saturated DCF fixed point (basic access, unlimited retries).
struct DcfModelParams {
    int n = 1;   // contenders
    int w = 16;  // minimum contention window
    int m = 6;   // maximum backoff stage
};

struct FixedPoint {
    double tau = 0.0;  // per-slot transmission probability
    double p = 0.0;    // conditional collision probability
    double residual = 0.0;
    int iterations = 0;
};

/// tau as a function of p: 2 / (W + 1 + p W sum_{i<m} (2p)^i), the
/// singularity-free form of 2(1-2p) / ((1-2p)(W+1) + pW(1-(2p)^m)).
double transmission_probability(double p, int w, int m);

/// p - (1 - (1 - tau(p))^(n-1)); increasing in p, zero at the fixed point.
double fixed_point_residual(double p, const DcfModelParams& params);

/// Bisection on p in [0, 1) until |residual| < 1e-10 (at most 200 steps).
/// Throws Error(InvalidConfig) for bad params, Error(NoConvergence) if the
/// iteration cap is hit.
FixedPoint solve_fixed_point(const DcfModelParams& params);

/// Model collision probability for `n` contenders with CW_min 16, m = 6;
/// comparable to a measured F/A.
double expected_loss_fraction(int n);

struct ModelRow {
    int n;
    double tau;
    double p;
};

std::vector<ModelRow> reference_curve(int n_min, int n_max, int w = 16, int m = 6);

}  // namespace cfmac

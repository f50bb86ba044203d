#include "cfmac/analytic_model.hpp"

#include <cmath>
#include <string>

#include "cfmac/error.hpp"

namespace cfmac {

namespace {

constexpr double kTolerance = 1e-10;
constexpr int kMaxIterations = 200;

}  // namespace

double transmission_probability(double p, int w, int m) {
    double series = 0.0;
    double term = 1.0;
    for (int i = 0; i < m; ++i) {
        series += term;
        term *= 2.0 * p;
    }
    return 2.0 / (static_cast<double>(w) + 1.0 + p * static_cast<double>(w) * series);
}

double fixed_point_residual(double p, const DcfModelParams& params) {
    const double tau = transmission_probability(p, params.w, params.m);
    return p - (1.0 - std::pow(1.0 - tau, params.n - 1));
}

FixedPoint solve_fixed_point(const DcfModelParams& params) {
    if (params.n < 1 || params.w < 2 || params.m < 0) {
        throw Error(ErrorCode::InvalidConfig, "model params: need n >= 1, w >= 2, m >= 0");
    }
    double lo = 0.0;
    double hi = 1.0;
    FixedPoint fp;
    double r_lo = fixed_point_residual(lo, params);
    if (std::abs(r_lo) < kTolerance) {
        fp.p = 0.0;
        fp.tau = transmission_probability(0.0, params.w, params.m);
        fp.residual = r_lo;
        return fp;
    }
    for (int it = 1; it <= kMaxIterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double r = fixed_point_residual(mid, params);
        fp.iterations = it;
        if (std::abs(r) < kTolerance) {
            fp.p = mid;
            fp.tau = transmission_probability(mid, params.w, params.m);
            fp.residual = r;
            return fp;
        }
        if (r < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    throw Error(ErrorCode::NoConvergence, "fixed point did not converge for n=" + std::to_string(params.n));
}

double expected_loss_fraction(int n) {
    return solve_fixed_point(DcfModelParams{n, 16, 6}).p;
}

std::vector<ModelRow> reference_curve(int n_min, int n_max, int w, int m) {
    std::vector<ModelRow> rows;
    for (int n = n_min; n <= n_max; ++n) {
        const FixedPoint fp = solve_fixed_point(DcfModelParams{n, w, m});
        rows.push_back(ModelRow{n, fp.tau, fp.p});
    }
    return rows;
}

}  // namespace cfmac

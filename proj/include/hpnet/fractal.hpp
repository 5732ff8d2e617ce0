#pragma once

#include "hpnet/geometry.hpp"

namespace hpnet {

struct DimensionEstimate {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<double> scales_used;
    std::vector<long> counts;
    bool degenerate_fit = false;  // r^2 < 0.9
};

// Least-squares fit of log N(r) against log(1/r) with grid-aligned boxes,
// averaged over 3 random grid offsets.  Needs >= 4 scales spanning at least
// two decades relative to the set extent.
DimensionEstimate box_dimension(const std::vector<double>& points, const std::vector<double>& scales,
                                unsigned seed = 7);
DimensionEstimate box_dimension_intervals(const std::vector<Interval>& intervals,
                                          const std::vector<double>& scales, unsigned seed = 7);

// Box count at a single scale and offset (exposed for the monotonicity test).
long box_count(const std::vector<double>& points, double scale, double offset);

// tau with gamma^tau = 1/2, i.e. log 2 / log(1/gamma).
double cantor_tau(double gamma);

// Self-similar middle-gap construction: each interval spawns two children of
// relative length gamma at its ends.  gamma in (0, 1/2], depth <= 20.
std::vector<Interval> generate_middle_gamma_cantor(double gamma, int depth);

// Geometric scale ladder r0 * ratio^k, k = 0..n-1.
std::vector<double> geometric_scales(double r0, double ratio, int n);

}  // namespace hpnet

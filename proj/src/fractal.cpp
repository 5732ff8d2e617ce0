#include "hpnet/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace hpnet {

long box_count(const std::vector<double>& points, double scale, double offset) {
    std::set<long long> cells;
    for (double x : points) cells.insert(static_cast<long long>(std::floor((x - offset) / scale)));
    return static_cast<long>(cells.size());
}

namespace {

long box_count_intervals(const std::vector<Interval>& iv, double scale, double offset) {
    std::vector<std::pair<long long, long long>> cellrange;
    cellrange.reserve(iv.size());
    for (const auto& I : iv)
        cellrange.push_back({static_cast<long long>(std::floor((I.a - offset) / scale)),
                             static_cast<long long>(std::floor((I.b - offset) / scale))});
    std::sort(cellrange.begin(), cellrange.end());
    long total = 0;
    long long covered_to = std::numeric_limits<long long>::min();
    for (auto [a, b] : cellrange) {
        if (b <= covered_to) continue;
        total += static_cast<long>(b - std::max(a, covered_to + 1) + 1);
        covered_to = b;
    }
    return total;
}

template <class CountFn>
DimensionEstimate fit_dimension(double extent, const std::vector<double>& scales, unsigned seed,
                                CountFn&& count) {
    if (scales.size() < 4) throw std::invalid_argument("box_dimension: need at least 4 scales");
    std::vector<double> sorted = scales;
    std::sort(sorted.rbegin(), sorted.rend());
    if (!(sorted.front() / sorted.back() >= 99.0))
        throw std::invalid_argument("box_dimension: scales must span at least two decades");
    if (extent <= 0) extent = 1.0;

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);

    DimensionEstimate est;
    int ns = static_cast<int>(sorted.size());
    std::vector<double> offsets(3 * ns);
    for (auto& o : offsets) o = U(rng);
    std::vector<double> xs(ns), ys(ns);
    std::vector<long> last(ns);
#pragma omp parallel for schedule(dynamic)
    for (int si = 0; si < ns; ++si) {
        double r = sorted[si];
        double mean = 0.0;
        for (int o = 0; o < 3; ++o) {
            last[si] = count(r, offsets[3 * si + o] * r);
            mean += double(last[si]);
        }
        xs[si] = std::log(1.0 / r);
        ys[si] = std::log(mean / 3.0);
    }
    est.scales_used = sorted;
    est.counts = last;
    int n = static_cast<int>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    est.slope = (n * sxy - sx * sy) / denom;
    est.intercept = (sy - est.slope * sx) / n;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (int i = 0; i < n; ++i) ss_res += sqr(ys[i] - est.slope * xs[i] - est.intercept);
    est.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    est.degenerate_fit = est.r_squared < 0.9;
    return est;
}

}  // namespace

DimensionEstimate box_dimension(const std::vector<double>& points, const std::vector<double>& scales,
                                unsigned seed) {
    if (points.empty()) throw std::invalid_argument("box_dimension: empty point set");
    auto [lo, hi] = std::minmax_element(points.begin(), points.end());
    return fit_dimension(*hi - *lo, scales, seed,
                         [&](double r, double o) { return box_count(points, r, o); });
}

DimensionEstimate box_dimension_intervals(const std::vector<Interval>& intervals,
                                          const std::vector<double>& scales, unsigned seed) {
    if (intervals.empty()) throw std::invalid_argument("box_dimension: empty interval set");
    double lo = 1e300, hi = -1e300;
    for (const auto& I : intervals) {
        lo = std::min(lo, I.a);
        hi = std::max(hi, I.b);
    }
    return fit_dimension(hi - lo, scales, seed,
                         [&](double r, double o) { return box_count_intervals(intervals, r, o); });
}

double cantor_tau(double gamma) {
    if (!(gamma > 0.0) || !(gamma < 1.0)) throw std::invalid_argument("cantor_tau: gamma in (0,1)");
    return std::log(2.0) / std::log(1.0 / gamma);
}

std::vector<Interval> generate_middle_gamma_cantor(double gamma, int depth) {
    if (!(gamma > 0.0) || gamma > 0.5)
        throw std::invalid_argument("generate_middle_gamma_cantor: gamma in (0, 1/2]");
    if (depth < 0 || depth > 20)
        throw std::invalid_argument("generate_middle_gamma_cantor: depth in [0, 20]");
    std::vector<Interval> cur{{0.0, 1.0}};
    for (int d = 0; d < depth; ++d) {
        std::vector<Interval> next;
        next.reserve(cur.size() * 2);
        for (const auto& I : cur) {
            double len = I.length() * gamma;
            next.push_back({I.a, I.a + len});
            next.push_back({I.b - len, I.b});
        }
        cur = std::move(next);
    }
    return cur;
}

std::vector<double> geometric_scales(double r0, double ratio, int n) {
    std::vector<double> v(n);
    double r = r0;
    for (int i = 0; i < n; ++i, r *= ratio) v[i] = r;
    return v;
}

}  // namespace hpnet

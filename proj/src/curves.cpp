#include "hpnet/curves.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpnet {

int Curve::locate(double at) const {
    auto it = std::upper_bound(s.begin(), s.end(), at);
    int i = static_cast<int>(it - s.begin()) - 1;
    return std::clamp(i, 0, size() - 2);
}

cplx Curve::point_at(double at) const {
    if (size() == 1) return z[0];
    int i = locate(at);
    double f = (at - s[i]) / (s[i + 1] - s[i]);
    f = std::clamp(f, 0.0, 1.0);
    return z[i] + f * (z[i + 1] - z[i]);
}

double Curve::phi_at(double at) const {
    if (size() == 1) return phi[0];
    int i = locate(at);
    double f = (at - s[i]) / (s[i + 1] - s[i]);
    f = std::clamp(f, 0.0, 1.0);
    return phi[i] + f * (phi[i + 1] - phi[i]);
}

Curve Curve::reversed() const {
    Curve r;
    int n = size();
    r.s.resize(n);
    r.z.resize(n);
    r.phi.resize(n);
    double L = length();
    for (int i = 0; i < n; ++i) {
        r.s[i] = L - (s[n - 1 - i] - s.front());
        r.z[i] = z[n - 1 - i];
        r.phi[i] = phi[n - 1 - i] + PI;
    }
    return r;
}

Curve Curve::translated(cplx d) const {
    Curve r = *this;
    for (auto& p : r.z) p += d;
    return r;
}

Curve Curve::scaled(double t) const {
    if (!(t > 0)) throw std::invalid_argument("Curve::scaled: factor must be positive");
    Curve r = *this;
    for (auto& v : r.s) v *= t;
    for (auto& p : r.z) p *= t;
    return r;
}

Curve Curve::mirrored_x() const {
    Curve r = *this;
    for (auto& p : r.z) p = cplx(-p.real(), p.imag());
    for (auto& a : r.phi) a = PI - a;
    return r;
}

Curve Curve::subcurve(double s0, double s1) const {
    if (!(s1 > s0)) throw std::invalid_argument("subcurve: empty window");
    Curve r;
    r.s.push_back(0.0);
    r.z.push_back(point_at(s0));
    r.phi.push_back(phi_at(s0));
    for (int i = 0; i < size(); ++i) {
        if (s[i] > s0 + 1e-12 && s[i] < s1 - 1e-12) {
            r.s.push_back(s[i] - s0);
            r.z.push_back(z[i]);
            r.phi.push_back(phi[i]);
        }
    }
    r.s.push_back(s1 - s0);
    r.z.push_back(point_at(s1));
    r.phi.push_back(phi_at(s1));
    return r;
}

Curve Curve::resampled(double ds) const {
    double L = length();
    int n = std::max(2, static_cast<int>(std::ceil(L / ds)) + 1);
    Curve r;
    r.s.resize(n);
    r.z.resize(n);
    r.phi.resize(n);
    for (int i = 0; i < n; ++i) {
        double at = s.front() + L * i / (n - 1);
        r.s[i] = at - s.front();
        r.z[i] = point_at(at);
        r.phi[i] = phi_at(at);
    }
    return r;
}

double default_ds(double length) { return std::min(0.01, length / 2000.0); }

namespace {

// Position increment over [a, b] by composite Simpson on e^{i phi}.
cplx step_integral(const std::function<double(double)>& phi_fn, double a, double b) {
    const int sub = 4;
    double h = (b - a) / (2 * sub);
    cplx acc = unit_dir(phi_fn(a)) + unit_dir(phi_fn(b));
    for (int j = 1; j < 2 * sub; ++j) acc += (j % 2 ? 4.0 : 2.0) * unit_dir(phi_fn(a + j * h));
    return acc * (h / 3.0);
}

Curve curve_from_samples(const std::function<double(double)>& phi_fn, const std::vector<double>& at,
                         cplx z0) {
    Curve c;
    int n = static_cast<int>(at.size());
    c.s = at;
    c.z.resize(n);
    c.phi.resize(n);
    c.z[0] = z0;
    c.phi[0] = phi_fn(at[0]);
    for (int i = 1; i < n; ++i) {
        c.z[i] = c.z[i - 1] + step_integral(phi_fn, at[i - 1], at[i]);
        c.phi[i] = phi_fn(at[i]);
    }
    return c;
}

}  // namespace

Curve curve_from_angle(const std::function<double(double)>& phi_fn, double len, cplx z0, double ds) {
    int n = std::max(2, static_cast<int>(std::ceil(len / ds)) + 1);
    std::vector<double> at(n);
    for (int i = 0; i < n; ++i) at[i] = len * i / (n - 1);
    return curve_from_samples(phi_fn, at, z0);
}

Curve curve_from_angle_adaptive(const std::function<double(double)>& phi_fn, double len, cplx z0,
                                double ds_max, double dphi_max) {
    std::vector<double> at;
    at.push_back(0.0);
    while (at.back() < len) {
        double s0 = at.back();
        double step = ds_max;
        // shrink until the angle change over the step is below dphi_max
        for (int it = 0; it < 60; ++it) {
            double s1 = std::min(s0 + step, len);
            if (std::fabs(phi_fn(s1) - phi_fn(s0)) <= dphi_max || s1 - s0 < 1e-12) break;
            step *= 0.5;
        }
        at.push_back(std::min(s0 + step, len));
    }
    return curve_from_samples(phi_fn, at, z0);
}

Curve arc_piece(cplx z0, double phi0, double kappa, double len, double ds) {
    return curve_from_angle([=](double u) { return phi0 + kappa * u; }, len, z0, ds);
}

Curve concat(const Curve& a, const Curve& b) {
    Curve r = a;
    cplx shift = a.end() - b.start();
    double s0 = a.s.back();
    for (int i = 1; i < b.size(); ++i) {
        r.s.push_back(s0 + (b.s[i] - b.s.front()));
        r.z.push_back(b.z[i] + shift);
        r.phi.push_back(b.phi[i]);
    }
    return r;
}

CurveHealth curve_health(const Curve& c) {
    CurveHealth h;
    cplx acc = c.z.front();
    double drift = 0.0;
    for (int i = 0; i + 1 < c.size(); ++i) {
        double ds = c.s[i + 1] - c.s[i];
        double chord = std::abs(c.z[i + 1] - c.z[i]);
        if (ds > 0) h.worst_speed = std::min(h.worst_speed, chord / ds);
        h.worst_lift_step = std::max(h.worst_lift_step, std::fabs(c.phi[i + 1] - c.phi[i]));
        acc += 0.5 * ds * (unit_dir(c.phi[i]) + unit_dir(c.phi[i + 1]));
        drift = std::max(drift, std::abs(acc - c.z[i + 1]));
    }
    h.reintegrate_error = drift;
    return h;
}

namespace {

constexpr int kMollN = 512;  // trapezoid nodes on [-1,1]; spectral for the bump

double bump_raw(double x) {
    double t = 1.0 - x * x;
    return t > 0 ? std::exp(-1.0 / t) : 0.0;
}

double bump_mass_raw() {
    static const double mass = [] {
        double acc = 0.0;
        for (int i = 0; i <= kMollN; ++i) {
            double x = -1.0 + 2.0 * i / kMollN;
            double w = (i == 0 || i == kMollN) ? 0.5 : 1.0;
            acc += w * bump_raw(x);
        }
        return acc * (2.0 / kMollN);
    }();
    return mass;
}

}  // namespace

double mollifier_mass() { return bump_mass_raw(); }
double mollifier(double x) { return bump_raw(x) / bump_mass_raw(); }

double mollifier_integral_check() {
    const int n = 1 << 15;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        double x = -1.0 + 2.0 * i / n;
        double w = (i == 0 || i == n) ? 0.5 : 1.0;
        acc += w * mollifier(x);
    }
    return acc * (2.0 / n);
}

Curve adjoin_smooth_tail(const Curve& Z, double l, double delta, double kappa0, double tau) {
    if (!(delta > 0)) throw std::invalid_argument("adjoin_smooth_tail: delta must be positive");
    if (l + delta > Z.length() + 1e-9)
        throw std::invalid_argument("adjoin_smooth_tail: window exceeds curve domain");

    auto beta = [&](double u) -> double {
        double a = l + delta / 3.0, b = l + 2.0 * delta / 3.0;
        if (u < 0) u = -u;  // even reflection below the domain start
        if (u <= a) return Z.phi_at(std::min(u, Z.length()));
        double target_b = (b - l - delta) * kappa0 + tau;
        if (u >= b) return (u - l - delta) * kappa0 + tau;
        double va = Z.phi_at(a);
        return va + (u - a) / (b - a) * (target_b - va);
    };

    // Convolution weights on the same trapezoid grid as the normalization, so
    // constants and affine angle tracks are reproduced exactly.
    static const std::vector<std::pair<double, double>> nodes = [] {
        std::vector<std::pair<double, double>> v;
        double total = 0.0;
        for (int i = 0; i <= kMollN; ++i) {
            double x = -1.0 + 2.0 * i / kMollN;
            double w = ((i == 0 || i == kMollN) ? 0.5 : 1.0) * bump_raw(x);
            if (w > 0) v.push_back({x, w});
            total += w;
        }
        for (auto& p : v) p.second /= total;
        return v;
    }();
    double rad = delta / 10.0;
    auto smoothed = [&](double u) {
        double acc = 0.0;
        for (const auto& [x, w] : nodes) acc += w * beta(u - rad * x);
        return acc;
    };

    // Keep Z's samples on [0, l] verbatim, then integrate the smoothed angle.
    Curve out;
    for (int i = 0; i < Z.size() && Z.s[i] <= l + 1e-15; ++i) {
        out.s.push_back(Z.s[i]);
        out.z.push_back(Z.z[i]);
        out.phi.push_back(Z.phi[i]);
    }
    if (out.s.empty() || out.s.back() < l - 1e-15) {
        out.s.push_back(l);
        out.z.push_back(Z.point_at(l));
        out.phi.push_back(Z.phi_at(l));
    }
    // resolve the blend zone well without exploding on huge arcs
    double tail_ds = std::max(delta / 30.0, 2 * delta / 4000.0);
    tail_ds = std::min(tail_ds, std::max(default_ds(l + 2 * delta), delta / 30.0));
    int n = std::max(2, static_cast<int>(std::ceil(2 * delta / tail_ds)) + 1);
    double s_prev = out.s.back();
    out.phi.back() = smoothed(s_prev);
    for (int i = 1; i < n; ++i) {
        double s_next = l + 2 * delta * i / (n - 1);
        out.s.push_back(s_next);
        out.z.push_back(out.z.back() + step_integral(smoothed, s_prev, s_next));
        out.phi.push_back(smoothed(s_next));
        s_prev = s_next;
    }
    return out;
}

CurvatureSample curvature_at(const Curve& c, double at) {
    CurvatureSample r;
    int i = c.locate(at);
    double h = c.s[std::min(i + 1, c.size() - 1)] - c.s[i];
    double lo = at - h, hi = at + h;
    if (lo < c.s.front() || hi > c.s.back()) {
        r.one_sided = true;
        if (lo < c.s.front())
            r.kappa = (c.phi_at(c.s.front() + h) - c.phi_at(c.s.front())) / h;
        else
            r.kappa = (c.phi_at(c.s.back()) - c.phi_at(c.s.back() - h)) / h;
        return r;
    }
    r.kappa = (c.phi_at(hi) - c.phi_at(lo)) / (2 * h);
    return r;
}

namespace {

// Distance from a point to the closed upper unit half-disk.
double dist_to_half_disk(cplx p) {
    if (p.imag() >= 0.0) return std::max(0.0, std::abs(p) - 1.0);
    double x = std::clamp(p.real(), -1.0, 1.0);
    return std::abs(p - cplx(x, 0.0));
}

}  // namespace

Curve place_family_member(const Curve& c, const CapFamilyParams& p) {
    if (!(p.epsilon > 0) || !(p.epsilon < PI / 8))
        throw std::invalid_argument("cap family: epsilon must lie in (0, pi/8)");
    if (!(p.t > 0)) throw std::invalid_argument("cap family: scale must be positive");
    return c.scaled(p.t).translated(cplx(p.alpha, 0.0));
}

CapFamilyReport in_cap_family(const Curve& c, double eps, double tol, double cap_frac) {
    CapFamilyReport rep;
    if (c.size() < 2) return rep;

    rep.worst_height = std::max(std::fabs(c.start().imag() + eps), std::fabs(c.end().imag() + eps));
    rep.ends_at_height = rep.worst_height <= tol;

    double a0 = std::fabs(wrap_pi(c.phi.front() - (PI / 2 + eps)));
    double a1 = std::fabs(wrap_pi(c.phi.back() + (PI / 2 + eps)));
    rep.worst_angle = std::max(a0, a1);
    rep.end_angles = rep.worst_angle <= tol;

    double worst_up = 0.0;
    for (int i = 0; i + 1 < c.size(); ++i) {
        double ds = c.s[i + 1] - c.s[i];
        if (ds > 0) worst_up = std::max(worst_up, (c.phi[i + 1] - c.phi[i]) / ds);
    }
    rep.worst_monotone = worst_up;
    rep.monotone = worst_up <= 1e-9;

    double worst_d = -1e300;
    for (const auto& p : c.z) worst_d = std::max(worst_d, dist_to_half_disk(p) - 2 * eps);
    rep.worst_distance = worst_d;
    rep.contained = worst_d <= tol;

    double L = c.length(), cap = cap_frac * L;
    double worst_kappa = 0.0;
    for (int i = 0; i < c.size(); ++i) {
        double at = c.s[i] - c.s.front();
        if (at > cap && at < L - cap) continue;
        if (at <= 0 || at >= L) continue;
        worst_kappa = std::max(worst_kappa, std::fabs(curvature_at(c, c.s[i]).kappa));
    }
    rep.worst_cap_kappa = worst_kappa;
    rep.straight_caps = worst_kappa < 1e-8;
    return rep;
}

}  // namespace hpnet

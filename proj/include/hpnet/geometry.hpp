#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace hpnet {

using cplx = std::complex<double>;

inline constexpr double PI = 3.14159265358979323846;
inline constexpr double TWO_PI = 2.0 * PI;

inline cplx unit_dir(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Wrap to (-pi, pi].
inline double wrap_pi(double a) {
    a = std::fmod(a, TWO_PI);
    if (a <= -PI) a += TWO_PI;
    if (a > PI) a -= TWO_PI;
    return a;
}

// Representative of `a` (mod 2*pi) nearest to `ref`.
inline double lift_near(double a, double ref) { return ref + wrap_pi(a - ref); }

// Representative of `a` (mod pi) nearest to `ref`.
inline double lift_near_mod_pi(double a, double ref) {
    double d = std::fmod(a - ref, PI);
    if (d > PI / 2) d -= PI;
    if (d <= -PI / 2) d += PI;
    return ref + d;
}

inline double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }
inline double dot(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }

inline double sqr(double x) { return x * x; }

// Round to 12 significant digits; all emitted numbers go through this so that
// repeated runs produce byte-identical files.
inline double round12(double x) {
    if (!std::isfinite(x)) return x;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return std::strtod(buf, nullptr);
}

inline std::string fmt12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

// Deterministic xoshiro-style generator; std::mt19937 seeded per use site.
struct Interval {
    double a = 0.0, b = 0.0;
    double length() const { return b - a; }
    double mid() const { return 0.5 * (a + b); }
};

}  // namespace hpnet

#pragma once

#include <functional>
#include <vector>

#include "hpnet/geometry.hpp"

namespace hpnet {

// Planar arc with arc-length parametrization.  `s` is strictly increasing,
// `z` the positions and `phi` a continuous lift of the tangent angle (no 2*pi
// jumps).  Curves are immutable once built; all mutators return new curves.
struct Curve {
    std::vector<double> s;
    std::vector<cplx> z;
    std::vector<double> phi;

    int size() const { return static_cast<int>(s.size()); }
    double length() const { return s.empty() ? 0.0 : s.back() - s.front(); }

    cplx point_at(double at) const;
    double phi_at(double at) const;
    cplx start() const { return z.front(); }
    cplx end() const { return z.back(); }

    Curve reversed() const;
    Curve translated(cplx d) const;
    Curve scaled(double t) const;      // t > 0, about the origin
    Curve mirrored_x() const;          // x -> -x; tangent angle -> pi - phi
    Curve resampled(double ds) const;  // uniform arc length
    Curve subcurve(double s0, double s1) const;

    // Index of the last sample with s[i] <= at (clamped).
    int locate(double at) const;
};

// Default sampling: ds = min(0.01, length/2000).
double default_ds(double length);

// Build a curve from a tangent-angle function on [0, len]; positions by
// composite Simpson between samples.
Curve curve_from_angle(const std::function<double(double)>& phi_fn, double len, cplx z0, double ds);

// Same, but sample spacing additionally bounded so the angle changes at most
// `dphi_max` per step.  Keeps giant low-curvature arcs representable.
Curve curve_from_angle_adaptive(const std::function<double(double)>& phi_fn, double len, cplx z0,
                                double ds_max, double dphi_max);

// Piece of constant curvature: a segment (kappa = 0) or circular arc.
Curve arc_piece(cplx z0, double phi0, double kappa, double len, double ds);

Curve concat(const Curve& a, const Curve& b);  // b translated to a's endpoint

struct CurveHealth {
    double worst_speed = 1.0;      // min chord/arc ratio
    double worst_lift_step = 0.0;  // max |phi_{i+1} - phi_i|
    double reintegrate_error = 0.0;
};
CurveHealth curve_health(const Curve& c);

// Normalized bump exp(-1/(1-s^2)) on (-1,1); `mollifier_mass` is the
// normalization constant computed by quadrature.
double mollifier(double x);
double mollifier_mass();
double mollifier_integral_check();  // re-integrates the normalized bump

// Smooth adjunction of a constant-curvature tail.  Output agrees with Z on
// [0, l], has tangent angle (s - l - delta)*kappa0 + tau for s >= l + delta,
// and extends to s = l + 2*delta.  The transition ramps the angle linearly on
// [l + delta/3, l + 2*delta/3] and convolves with the bump scaled to width
// delta/10.  Throws std::invalid_argument if l + delta exceeds Z's domain.
Curve adjoin_smooth_tail(const Curve& Z, double l, double delta, double kappa0, double tau);

struct CurvatureSample {
    double kappa = 0.0;
    bool one_sided = false;  // within one sample of an endpoint
};
CurvatureSample curvature_at(const Curve& c, double at);

// Scaled/translated family parameters for the admissible initial-arc family.
struct CapFamilyParams {
    double epsilon = 0.02;  // in (0, pi/8)
    double t = 1.0;         // scale, > 0
    double alpha = 0.0;     // horizontal translation
};

// t*C + alpha.  Throws std::invalid_argument on out-of-range parameters.
Curve place_family_member(const Curve& c, const CapFamilyParams& p);

// Membership report for the family of concave cap curves over the unit
// half-disk: endpoints at height -eps, end tangents +-(pi/2 + eps), monotone
// nonincreasing tangent, contained in the 2*eps-neighborhood of the closed
// upper unit half-disk, straight initial and terminal subarcs (first and last
// 5% of arc length, |curvature| < 1e-8).
struct CapFamilyReport {
    bool ends_at_height = false;
    bool end_angles = false;
    bool monotone = false;
    bool contained = false;
    bool straight_caps = false;
    double worst_height = 0.0;
    double worst_angle = 0.0;
    double worst_monotone = 0.0;   // max positive tangent increment rate
    double worst_distance = 0.0;   // max dist to half-disk minus 2*eps
    double worst_cap_kappa = 0.0;
    bool all() const { return ends_at_height && end_angles && monotone && contained && straight_caps; }
};
// cap_frac: fraction of the arc length the straight-cap window covers.
CapFamilyReport in_cap_family(const Curve& c, double eps, double tol = 1e-6, double cap_frac = 0.05);

}  // namespace hpnet

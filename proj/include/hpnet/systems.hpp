#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "hpnet/geometry.hpp"

namespace hpnet {

// Riemann invariant pair (R1, R2).
struct InvariantPair {
    double r1 = 0.0, r2 = 0.0;
};

inline InvariantPair operator+(InvariantPair a, InvariantPair b) { return {a.r1 + b.r1, a.r2 + b.r2}; }
inline InvariantPair operator-(InvariantPair a, InvariantPair b) { return {a.r1 - b.r1, a.r2 - b.r2}; }
inline double norm(InvariantPair a) { return std::hypot(a.r1, a.r2); }

// Inclination map theta1(R1, R2) of a hyperbolic system in Riemann-invariant
// form whose two characteristic directions differ by exactly pi/2.  theta2 is
// never stored; it is theta1 + pi/2 by definition.
//
// Three kinds:
//   Cps        theta = (m1*R1 - m2*R2) / (m1^2 - m2^2), constant stretch factors
//   Linear     theta = c1*R1 + c2*R2 + c0
//   Tabulated  bilinear interpolation of theta over an (R1, R2) rectangle
class NormalSystem {
  public:
    struct Cps {
        double m1, m2;
    };
    struct Linear {
        double c1, c2, c0;
    };
    struct Tabulated {
        double r1_min, r1_max;
        double r2_min, r2_max;
        int n1, n2;                  // grid nodes per axis
        std::vector<double> values;  // row-major: [i1 * n2 + i2]
    };

    static NormalSystem cps(double m1, double m2);
    static NormalSystem linear(double c1, double c2, double c0);
    static NormalSystem tabulated(Tabulated t);

    // theta1 at R.  Throws std::out_of_range for tabulated queries outside the
    // table rectangle.
    double theta(InvariantPair r) const;

    // (d theta/d R1, d theta/d R2).  Tabulated: centered differences with step
    // = half the cell; throws std::domain_error if the magnitude escapes the
    // stored derivative bounds.
    std::pair<double, double> theta_gradient(InvariantPair r) const;

    double lower_bound_A() const { return A_; }
    double upper_bound_B() const { return B_; }

    // K = B/A; degenerate A == B reports exactly 1.
    double quasi_hp_constant() const;

    // All rho2 in [window.a, window.b] with theta(rho1, rho2) == target mod
    // 2*pi, ascending.  Monotone bracket scan at step pi/(2B) + bisection.
    std::vector<double> admissible_corner_values(double rho1, double target, Interval window) const;

    // Solve theta(r1, x) = target for x, seeded at r2_seed.  theta(r1, .) is
    // strictly monotone so the root is unique; Newton with bisection fallback.
    double solve_r2(double r1, double target, double r2_seed) const;
    // Solve theta(x, r2) = target for x.
    double solve_r1(double target, double r2, double r1_seed) const;

    // Move along a k-characteristic on which theta changes by dtheta: the k-th
    // invariant is constant, the other follows from the inclination relation.
    InvariantPair transport(InvariantPair r, int k, double dtheta) const;

    bool is_cps() const { return std::holds_alternative<Cps>(kind_); }
    bool is_linear_kind() const { return !std::holds_alternative<Tabulated>(kind_); }
    const Cps* as_cps() const { return std::get_if<Cps>(&kind_); }

  private:
    NormalSystem() = default;
    std::variant<Cps, Linear, Tabulated> kind_;
    double A_ = 0.0, B_ = 0.0;

    double theta_raw(double r1, double r2) const;
};

}  // namespace hpnet

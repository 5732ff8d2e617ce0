#include "hpnet/systems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpnet {

NormalSystem NormalSystem::cps(double m1, double m2) {
    if (m1 <= 0 || m2 <= 0) throw std::invalid_argument("cps: stretch factors must be positive");
    if (m1 == m2) throw std::invalid_argument("cps: stretch factors must differ");
    NormalSystem s;
    s.kind_ = Cps{m1, m2};
    double d = std::fabs(m1 * m1 - m2 * m2);
    s.A_ = std::min(m1, m2) / d;
    s.B_ = std::max(m1, m2) / d;
    return s;
}

NormalSystem NormalSystem::linear(double c1, double c2, double c0) {
    if (c1 == 0 || c2 == 0) throw std::invalid_argument("linear: coefficients must be nonzero");
    NormalSystem s;
    s.kind_ = Linear{c1, c2, c0};
    s.A_ = std::min(std::fabs(c1), std::fabs(c2));
    s.B_ = std::max(std::fabs(c1), std::fabs(c2));
    return s;
}

NormalSystem NormalSystem::tabulated(Tabulated t) {
    if (t.n1 < 2 || t.n2 < 2) throw std::invalid_argument("tabulated: need at least a 2x2 grid");
    if (static_cast<int>(t.values.size()) != t.n1 * t.n2)
        throw std::invalid_argument("tabulated: value count does not match grid");
    if (!(t.r1_max > t.r1_min) || !(t.r2_max > t.r2_min))
        throw std::invalid_argument("tabulated: degenerate rectangle");
    NormalSystem s;
    s.kind_ = std::move(t);
    const auto& tab = std::get<Tabulated>(s.kind_);
    // Derivative bounds from finite differences over all cells, widened 1%.
    double h1 = (tab.r1_max - tab.r1_min) / (tab.n1 - 1);
    double h2 = (tab.r2_max - tab.r2_min) / (tab.n2 - 1);
    double lo = 1e300, hi = 0;
    auto v = [&](int i, int j) { return tab.values[i * tab.n2 + j]; };
    for (int i = 0; i + 1 < tab.n1; ++i)
        for (int j = 0; j + 1 < tab.n2; ++j) {
            double g1a = std::fabs((v(i + 1, j) - v(i, j)) / h1);
            double g1b = std::fabs((v(i + 1, j + 1) - v(i, j + 1)) / h1);
            double g2a = std::fabs((v(i, j + 1) - v(i, j)) / h2);
            double g2b = std::fabs((v(i + 1, j + 1) - v(i + 1, j)) / h2);
            lo = std::min({lo, g1a, g1b, g2a, g2b});
            hi = std::max({hi, g1a, g1b, g2a, g2b});
        }
    if (lo <= 0) throw std::invalid_argument("tabulated: inclination is flat in some cell");
    s.A_ = lo * 0.99;
    s.B_ = hi * 1.01;
    return s;
}

double NormalSystem::theta_raw(double r1, double r2) const {
    if (auto* c = std::get_if<Cps>(&kind_))
        return (c->m1 * r1 - c->m2 * r2) / (c->m1 * c->m1 - c->m2 * c->m2);
    if (auto* l = std::get_if<Linear>(&kind_)) return l->c1 * r1 + l->c2 * r2 + l->c0;
    const auto& t = std::get<Tabulated>(kind_);
    const double tol = 1e-9;
    if (r1 < t.r1_min - tol || r1 > t.r1_max + tol || r2 < t.r2_min - tol || r2 > t.r2_max + tol)
        throw std::out_of_range("tabulated theta: query outside table rectangle");
    double h1 = (t.r1_max - t.r1_min) / (t.n1 - 1);
    double h2 = (t.r2_max - t.r2_min) / (t.n2 - 1);
    double u = std::clamp((r1 - t.r1_min) / h1, 0.0, double(t.n1 - 1));
    double w = std::clamp((r2 - t.r2_min) / h2, 0.0, double(t.n2 - 1));
    int i = std::min(int(u), t.n1 - 2), j = std::min(int(w), t.n2 - 2);
    double fu = u - i, fw = w - j;
    auto v = [&](int a, int b) { return t.values[a * t.n2 + b]; };
    return (1 - fu) * (1 - fw) * v(i, j) + fu * (1 - fw) * v(i + 1, j) + (1 - fu) * fw * v(i, j + 1) +
           fu * fw * v(i + 1, j + 1);
}

double NormalSystem::theta(InvariantPair r) const {
    if (!std::isfinite(r.r1) || !std::isfinite(r.r2))
        throw std::invalid_argument("theta: invariants must be finite");
    return theta_raw(r.r1, r.r2);
}

std::pair<double, double> NormalSystem::theta_gradient(InvariantPair r) const {
    if (auto* c = std::get_if<Cps>(&kind_)) {
        double d = c->m1 * c->m1 - c->m2 * c->m2;
        return {c->m1 / d, -c->m2 / d};
    }
    if (auto* l = std::get_if<Linear>(&kind_)) return {l->c1, l->c2};
    const auto& t = std::get<Tabulated>(kind_);
    double h1 = 0.5 * (t.r1_max - t.r1_min) / (t.n1 - 1);
    double h2 = 0.5 * (t.r2_max - t.r2_min) / (t.n2 - 1);
    auto clamped = [&](double x, double lo, double hi) { return std::clamp(x, lo, hi); };
    double a1 = clamped(r.r1 - h1, t.r1_min, t.r1_max), b1 = clamped(r.r1 + h1, t.r1_min, t.r1_max);
    double a2 = clamped(r.r2 - h2, t.r2_min, t.r2_max), b2 = clamped(r.r2 + h2, t.r2_min, t.r2_max);
    double g1 = (theta_raw(b1, r.r2) - theta_raw(a1, r.r2)) / (b1 - a1);
    double g2 = (theta_raw(r.r1, b2) - theta_raw(r.r1, a2)) / (b2 - a2);
    double tol = 1e-9;
    if (std::fabs(g1) < A_ - tol || std::fabs(g1) > B_ + tol || std::fabs(g2) < A_ - tol ||
        std::fabs(g2) > B_ + tol)
        throw std::domain_error("theta_gradient: finite-difference gradient escapes (A,B)");
    return {g1, g2};
}

double NormalSystem::quasi_hp_constant() const {
    if (A_ == B_) return 1.0;
    return B_ / A_;
}

namespace {

// Bisection for f(x) = 0 on a bracket with f(a), f(b) of opposite sign.
template <class F>
double bisect(F&& f, double a, double b, double fa, double tol) {
    for (int it = 0; it < 200 && (b - a) > tol; ++it) {
        double m = 0.5 * (a + b);
        double fm = f(m);
        if (fm == 0.0) return m;
        if ((fa < 0) == (fm < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

std::vector<double> NormalSystem::admissible_corner_values(double rho1, double target, Interval window) const {
    if (!(window.b > window.a)) return {};
    std::vector<double> roots;
    double step = PI / (2.0 * B_);
    auto f = [&](double r2) { return wrap_pi(theta_raw(rho1, r2) - target); };
    // theta(rho1, .) is strictly monotone, so wrap_pi(theta - target) is
    // piecewise monotone with one root between each pair of sign changes away
    // from the branch cut.
    double prev_x = window.a;
    double prev_f = f(prev_x);
    for (double x = window.a + step; prev_x < window.b; x += step) {
        x = std::min(x, window.b);
        double fx = f(x);
        if (std::fabs(fx - prev_f) < PI) {  // no branch jump inside this cell
            if (prev_f == 0.0)
                roots.push_back(prev_x);
            else if ((prev_f < 0) != (fx < 0))
                roots.push_back(bisect(f, prev_x, x, prev_f, 1e-12));
        }
        prev_x = x;
        prev_f = fx;
        if (x >= window.b) break;
    }
    if (prev_f == 0.0) roots.push_back(prev_x);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double a, double b) { return std::fabs(a - b) < 1e-9; }),
                roots.end());
    return roots;
}

double NormalSystem::solve_r2(double r1, double target, double r2_seed) const {
    if (auto* c = std::get_if<Cps>(&kind_))
        return (c->m1 * r1 - target * (c->m1 * c->m1 - c->m2 * c->m2)) / c->m2;
    if (auto* l = std::get_if<Linear>(&kind_)) return (target - l->c0 - l->c1 * r1) / l->c2;
    // Monotone in r2 with |slope| in (A, B): bracket around the seed, then
    // safeguarded Newton.
    double x = r2_seed;
    double f0 = theta_raw(r1, x) - target;
    double span = std::fabs(f0) / A_ * 1.1 + 1e-6;
    double a = x - span, b = x + span;
    double fa = theta_raw(r1, a) - target, fb = theta_raw(r1, b) - target;
    if ((fa < 0) == (fb < 0)) throw std::domain_error("solve_r2: root not bracketed");
    if (fa > 0) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    for (int it = 0; it < 100; ++it) {
        double g = theta_gradient({r1, x}).second;
        double fx = theta_raw(r1, x) - target;
        if (std::fabs(fx) < 1e-13) return x;
        double xn = x - fx / g;
        if (!((xn > std::min(a, b)) && (xn < std::max(a, b)))) xn = 0.5 * (a + b);
        double fn = theta_raw(r1, xn) - target;
        if ((fn < 0) == (fa < 0))
            a = xn, fa = fn;
        else
            b = xn;
        x = xn;
        if (std::fabs(b - a) < 1e-14 * (1 + std::fabs(x))) break;
    }
    return x;
}

double NormalSystem::solve_r1(double target, double r2, double r1_seed) const {
    if (auto* c = std::get_if<Cps>(&kind_))
        return (target * (c->m1 * c->m1 - c->m2 * c->m2) + c->m2 * r2) / c->m1;
    if (auto* l = std::get_if<Linear>(&kind_)) return (target - l->c0 - l->c2 * r2) / l->c1;
    double x = r1_seed;
    double f0 = theta_raw(x, r2) - target;
    double span = std::fabs(f0) / A_ * 1.1 + 1e-6;
    double a = x - span, b = x + span;
    double fa = theta_raw(a, r2) - target, fb = theta_raw(b, r2) - target;
    if ((fa < 0) == (fb < 0)) throw std::domain_error("solve_r1: root not bracketed");
    if (fa > 0) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    for (int it = 0; it < 100; ++it) {
        double g = theta_gradient({x, r2}).first;
        double fx = theta_raw(x, r2) - target;
        if (std::fabs(fx) < 1e-13) return x;
        double xn = x - fx / g;
        if (!((xn > std::min(a, b)) && (xn < std::max(a, b)))) xn = 0.5 * (a + b);
        double fn = theta_raw(xn, r2) - target;
        if ((fn < 0) == (fa < 0))
            a = xn, fa = fn;
        else
            b = xn;
        x = xn;
        if (std::fabs(b - a) < 1e-14 * (1 + std::fabs(x))) break;
    }
    return x;
}

InvariantPair NormalSystem::transport(InvariantPair r, int k, double dtheta) const {
    double target = theta(r) + dtheta;
    if (k == 1) return {r.r1, solve_r2(r.r1, target, r.r2)};
    if (k == 2) return {solve_r1(target, r.r2, r.r1), r.r2};
    throw std::invalid_argument("transport: family index must be 1 or 2");
}

}  // namespace hpnet

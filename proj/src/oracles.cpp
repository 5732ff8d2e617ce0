#include "hpnet/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace hpnet {

std::pair<double, double> gm_stretch_factors(double psi0, double log_rho) {
    if (!(log_rho > 0)) throw std::invalid_argument("gm_stretch_factors: log_rho must be positive");
    double a = psi0 / log_rho;
    double s = std::sqrt(a * a + 4.0);
    return {(s + a) / 2.0, (s - a) / 2.0};
}

SpiralParams SpiralParams::from_alpha(double alpha) {
    if (!(alpha > 0) || !(alpha < PI / 2))
        throw std::invalid_argument("spiral: alpha must lie in (0, pi/2)");
    double m2 = std::tan(alpha);
    return {alpha, 1.0 / m2, m2};
}

SpiralParams SpiralParams::from_asymmetry(double a) {
    double s = std::sqrt(a * a + 4.0);
    double m1 = (s + a) / 2.0, m2 = (s - a) / 2.0;
    return {std::atan(m2), m1, m2};
}

double SpiralField::theta(cplx z) const {
    if (z == cplx(0.0, 0.0)) throw std::domain_error("spiral theta: singular at the origin");
    return std::arg(z) + p_.alpha;
}

double SpiralField::rotation(cplx z) const {
    if (z == cplx(0.0, 0.0)) throw std::domain_error("spiral rotation: singular at the origin");
    return std::arg(z) + p_.a() * std::log(std::abs(z));
}

InvariantPair SpiralField::invariants(cplx z) const {
    double th = theta(z), ph = rotation(z);
    return {p_.m1 * th - p_.m2 * ph, p_.m2 * th - p_.m1 * ph};
}

std::optional<FieldSample> SpiralField::sample(cplx z) const {
    if (z == cplx(0.0, 0.0)) return std::nullopt;
    return FieldSample{invariants(z), theta(z)};
}

Curve SpiralField::characteristic(double r0, double psi0, int k, double len, double ds) const {
    if (!(r0 > 0)) throw std::domain_error("spiral characteristic: needs r0 > 0");
    double ca = std::cos(p_.alpha), sa = std::sin(p_.alpha);
    // k = 1 moves outward at rate cos(alpha); k = 2 inward at rate sin(alpha).
    double rate = (k == 1) ? ca : -sa;
    double slope = (k == 1) ? p_.m2 : -p_.m1;  // d psi / d log r
    if (rate < 0 && len >= r0 / (-rate)) len = 0.999 * r0 / (-rate);
    int n = std::max(2, static_cast<int>(std::ceil(len / ds)) + 1);
    Curve c;
    c.s.resize(n);
    c.z.resize(n);
    c.phi.resize(n);
    for (int i = 0; i < n; ++i) {
        double s = len * i / (n - 1);
        double r = r0 + s * rate;
        double psi = psi0 + slope * std::log(r / r0);
        c.s[i] = s;
        c.z[i] = r * unit_dir(psi);
        c.phi[i] = psi + p_.alpha + (k == 2 ? PI / 2 : 0.0);
    }
    return c;
}

std::pair<double, double> SpiralField::node_polar(double rp, double psip, double rq, double psiq) const {
    double c1 = psip - p_.m2 * std::log(rp);
    double c2 = psiq + p_.m1 * std::log(rq);
    double lr = (c2 - c1) / (p_.m1 + p_.m2);
    return {std::exp(lr), c1 + p_.m2 * lr};
}

}  // namespace hpnet

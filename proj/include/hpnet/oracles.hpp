#pragma once

#include "hpnet/curves.hpp"
#include "hpnet/field.hpp"

namespace hpnet {

// Stretch factors of the extremal annulus rotation: a = psi0 / log(rho),
// m1 = (sqrt(a^2+4)+a)/2, m2 = (sqrt(a^2+4)-a)/2.  m1*m2 = 1.
std::pair<double, double> gm_stretch_factors(double psi0, double log_rho);

// Parameters of the logarithmic-spiral solution theta(r e^{i psi}) = psi + alpha
// with tan(alpha) = m2 and m1*m2 = 1.
struct SpiralParams {
    double alpha, m1, m2;
    double a() const { return m1 - m2; }
    static SpiralParams from_alpha(double alpha);
    static SpiralParams from_asymmetry(double a);  // a = m1 - m2
};

// Closed-form solution on the punctured plane.  theta = psi + alpha; the
// rotation phi = psi + a*log r (zero at z = 1); invariants
// R_i = m_i*theta - m_j*phi.  Characteristics are logarithmic spirals.
class SpiralField : public SolutionField {
  public:
    explicit SpiralField(SpiralParams p) : p_(p) {}
    const SpiralParams& params() const { return p_; }

    std::optional<FieldSample> sample(cplx z) const override;

    double theta(cplx z) const;    // principal branch of arg
    double rotation(cplx z) const; // phi = psi + a log r, principal branch
    InvariantPair invariants(cplx z) const;

    // Unit-speed k-characteristic through (r0, psi0) (lifted polar angle).
    // k = 1: r(s) = r0 + s cos(alpha),  psi = psi0 + tan(alpha) log(r/r0)
    // k = 2: r(s) = r0 - s sin(alpha),  psi = psi0 + cot(alpha)^-1... psi = psi0 - cot? see impl
    Curve characteristic(double r0, double psi0, int k, double len, double ds) const;

    // Exact node of the characteristic net: intersection of the
    // 1-characteristic through (rp, psip) and the 2-characteristic through
    // (rq, psiq), in lifted polar coordinates.
    std::pair<double, double> node_polar(double rp, double psip, double rq, double psiq) const;

  private:
    SpiralParams p_;
};

}  // namespace hpnet

#pragma once

#include <cstdint>

#include "hpnet/curves.hpp"
#include "hpnet/systems.hpp"

namespace hpnet {

enum class NodeStatus : std::uint8_t { Valid = 0, Folded = 1, Unreached = 2 };

// Characteristic-coordinate solution of the characteristic initial value
// problem.  Node (i, j) sits at parameters (t1[i], t2[j]); invariants are
// stored once per row/column (R1 depends only on t2, R2 only on t1), so the
// transport identities hold structurally.
struct CharGrid {
    std::vector<double> t1, t2;
    std::vector<cplx> zeta;               // [i * n2 + j]
    std::vector<NodeStatus> status;       // [i * n2 + j]
    std::vector<double> thetabar;         // inclination lift per node
    std::vector<double> r1_of_t2;         // size n2
    std::vector<double> r2_of_t1;         // size n1
    int sign1 = 1, sign2 = 1;             // curve orientation vs the field directions
    int folds = 0;

    int n1() const { return static_cast<int>(t1.size()); }
    int n2() const { return static_cast<int>(t2.size()); }
    cplx at(int i, int j) const { return zeta[i * n2() + j]; }
    NodeStatus st(int i, int j) const { return status[i * n2() + j]; }
    double theta_at(int i, int j) const { return thetabar[i * n2() + j]; }
    InvariantPair invariants(int i, int j) const { return {r1_of_t2[j], r2_of_t1[i]}; }
};

struct GoursatOptions {
    double fold_tol_rel = 1e-12;  // times the median initial cell area
    bool parallel = true;
    double t1_cap = 0.0;  // 0 = full curve; otherwise truncate the parameter range
    double t2_cap = 0.0;
};

// Values of the invariant component that varies along an initial
// characteristic arc, one per curve sample.  fixed_index = 1 means C is a
// 1-characteristic carrying constant R1 = corner.r1 (returns R2(s)), and
// symmetrically for fixed_index = 2.  The corner value must be admissible:
// theta(corner) has to match C's initial tangent modulo pi (after the pi/2
// shift for a 2-arc) within 1e-8.
std::vector<double> edge_invariant_profile(const NormalSystem& sys, const Curve& c,
                                           InvariantPair corner, int fixed_index);

// Angle-averaged characteristic-crossing sweep.  C1 and C2 must share their
// initial point with orthogonal tangents there (1e-6 tolerance, re-projected
// exactly).  Folds are marked and the sweep continues around them.
CharGrid solve_goursat(const NormalSystem& sys, const Curve& c1, const Curve& c2,
                       InvariantPair corner, const GoursatOptions& opts = {});

// Serial reference sweep; must produce bit-identical grids.
CharGrid solve_goursat_serial(const NormalSystem& sys, const Curve& c1, const Curve& c2,
                              InvariantPair corner, const GoursatOptions& opts = {});

// The curve z(t) + r*i*z'(t).  Throws std::domain_error("fold ...") if
// 1 - r*kappa(t) <= 0 anywhere.  Output s is true arc length.
Curve parallel_extension(const Curve& c, double r);

// Minimum oriented cell area over cells whose four corners are Valid.
double grid_min_jacobian(const CharGrid& g);

// Extract a grid characteristic as a curve: family 1 follows t2 = const
// (index = j), family 2 follows t1 = const (index = i).  Stops at the first
// non-valid node.
Curve grid_char_curve(const CharGrid& g, int family, int index);

}  // namespace hpnet

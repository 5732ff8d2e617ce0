#pragma once

#include <functional>

#include "hpnet/net_analysis.hpp"

namespace hpnet {

// One leg of an invariant-transport path: move along a k-characteristic on
// which the inclination changes by dtheta.
struct TransportLeg {
    int k;
    double dtheta;
};

InvariantPair transport_path(const NormalSystem& sys, InvariantPair rho,
                             const std::vector<TransportLeg>& legs);
double legs_total(const std::vector<TransportLeg>& legs);

struct ConstructionOptions {
    double delta0 = PI / 4;        // strip piece turn budget (halved on fold)
    double spine_radius = 2.0;     // radius of the spine arc behind the data curve
    int max_grid_axis = 380;       // per-axis node cap for validation grids
    double cap_fraction = 0.0025;  // straight-cap window used for pipeline family checks
    bool validate = true;          // run the strip solves and property checks
    int transfer_samples = 12;
    double resolution = 1.0;       // curve/grid sampling multiplier (for refinement studies)
};

// Arc accepting every member of the cap family as initial data.  Side 1 runs
// from e (left, height -eps, tangent pi/2 + eps) to m (on the real axis,
// tangent -pi/4); side 2 is the mirror image, from m (tangent pi/4) to e.
struct UniversalArc {
    int side = 1;
    double epsilon = 0.02;
    Curve curve;          // traversed e -> m (side 1) or m -> e (side 2)
    cplx e_point, m_point;
    Curve data_curve;     // representative cap curve, left foot at (-1, -eps)
    Curve spine;          // characteristic from the data curve's left end, ray included
    double r0 = 0.0;      // parallel offset distance the arc came from
    std::vector<TransportLeg> transfer_legs;  // rho at the data curve's left end -> R at m
    double angle_shift = 0.0;                 // sum of the legs
    double b0 = 0.0;                          // measured sup ||f(rho) - rho||
    std::vector<InvariantPair> sample_rho, sample_image;

    InvariantPair transfer(const NormalSystem& sys, InvariantPair rho) const {
        return transport_path(sys, rho, transfer_legs);
    }
};

UniversalArc build_universal_arc(const NormalSystem& sys, double epsilon, int side,
                                 const ConstructionOptions& opt = {});

// Child cap curve enclosing a scaled copy of the tent, plus the transport
// path from the tent corner to its left endpoint.
struct ChildBuild {
    int side = 2;            // 2: goes under the left arm; 1: mirror, under the right
    Curve x_curve;           // normalized family member
    double xi = 0.0;         // tent point u maps to xi*(u - center) in the child frame
    double center = 0.0;     // real
    std::vector<TransportLeg> legs;  // corner value -> R at x_curve's left endpoint
    double shift_total = 0.0;
    double alpha = 0.0;   // placed curve = x_curve + alpha
    Curve t_curve;        // far characteristic the enclosing arc was offset from
    double s_r0 = 0.0;    // offset distance of the enclosing arc
};

// Unit-scale tent: both arms joined at the origin, the child builds, and the
// similarity data the recursion iterates.
struct TentGeometry {
    double epsilon = 0.02;
    UniversalArc ua1, ua2;
    Curve arm1;  // traversed e'1 -> 0, tangent pi/2+eps down to -pi/4
    Curve arm2;  // traversed 0 -> e'2, tangent pi/4 down to -(pi/2+eps)
    double half_width = 0.0;   // |m| of the untranslated arcs
    Interval foot;             // real-axis interval spanned by the tent
    InvariantPair rho_ref;     // reference corner value the unit solves used
    ChildBuild child_left, child_right;
    double xi = 0.0;           // common child scale
    double shift_left = 0.0;   // child tent: t -> xi*t + shift
    double shift_right = 0.0;
    std::vector<TransportLeg> composed_left, composed_right;  // g then f, corner to corner
};

TentGeometry build_tent(const NormalSystem& sys, double epsilon, const ConstructionOptions& opt = {});

// The unique rho on the level curve theta(R) = theta(rho0) + pi with
// composed(rho) = rho0, found by monotone bisection along the level curve.
InvariantPair solve_corner_fixed_point(const NormalSystem& sys, InvariantPair rho0,
                                       const std::function<InvariantPair(InvariantPair)>& composed,
                                       double window = 0.0);

struct NestedIntervalTree {
    std::vector<std::vector<Interval>> levels;  // levels[0] = {root interval}
    // exact interval length per level: the absolute endpoints cannot carry
    // the deep similarity scales once they drop below the position resolution
    std::vector<double> level_length;
    double gamma = 0.0;   // measured minimum-gap ratio
    double tau = 0.0;     // gamma^tau = 1/2
    double delta2 = 0.0;  // measured oscillation floor
    double r1 = 0.0;      // sector scale ratio (the child scale)

    double length_at(int level) const {
        if (level < static_cast<int>(level_length.size())) return level_length[level];
        return levels[level].empty() ? 0.0 : levels[level].front().length();
    }
};

struct TentInstance {
    double scale = 1.0;
    double shift = 0.0;  // real translation
    InvariantPair rho;
    int level = 0;
    int parent = -1;  // index into the breadth-first tent list
};

struct SingularSolution {
    TentGeometry geom;
    NestedIntervalTree tree;
    std::vector<TentInstance> tents;  // breadth-first
    std::shared_ptr<PatchworkField> field;
    std::vector<CharGrid> patch_grids;  // unit-frame grid patches, for emission
    double seam_worst = 0.0;  // worst invariant jump across shared characteristics
};

SingularSolution build_singular_solution(const NormalSystem& sys, double epsilon, int depth,
                                         const ConstructionOptions& opt = {});

// Minimum over the provided covers of sum diam(G)^tau, after normalizing the
// root interval to unit length.  Throws std::invalid_argument if a cover
// misses part of the deepest level.
double min_cover_sum(const NestedIntervalTree& tree,
                     const std::vector<std::vector<Interval>>& covers);

// Cover made of tree nodes; validation and diameters use exact index
// arithmetic and the per-level lengths, so it stays meaningful at depths
// where absolute endpoints have collapsed.
struct CoverPiece {
    int level = 0;
    int index = 0;
};
double min_cover_sum(const NestedIntervalTree& tree,
                     const std::vector<std::vector<CoverPiece>>& covers);

// Oscillation of theta over the nontangential sector at an interval midpoint,
// measured along the tent arms of the given instance.
double sector_oscillation(const NormalSystem& sys, const TentGeometry& geom,
                          const TentInstance& tent, double radius_factor, double delta1 = 0.2);

}  // namespace hpnet

#pragma once

#include <functional>
#include <memory>
#include <unordered_map>

#include "hpnet/curves.hpp"
#include "hpnet/field.hpp"
#include "hpnet/goursat.hpp"

namespace hpnet {

// Planar regions characteristics are traced in.
class Domain {
  public:
    static Domain upper_half_plane(double diameter_hint);
    static Domain disk(cplx c, double R);
    static Domain annulus(cplx c, double r, double R);
    // Simply connected sector r < |z-c| < R, psi0 < arg < psi1 (width < 2*pi).
    static Domain annulus_sector(cplx c, double r, double R, double psi0, double psi1);
    static Domain rect(double x0, double x1, double y0, double y1);

    bool contains(cplx z) const { return fn_(z); }
    double diameter() const { return diam_; }
    cplx center() const { return center_; }

  private:
    std::function<bool(cplx)> fn_;
    double diam_ = 1.0;
    cplx center_{0, 0};
};

enum class TraceEnd { Boundary, MaxLength, FieldGap, TargetLength };

struct TraceOptions {
    double step = 1e-3;
    double max_len = 0.0;  // 0: ten domain diameters
};

struct TraceResult {
    Curve curve;
    TraceEnd end = TraceEnd::Boundary;
};

// Fourth-order integration of dz/ds = e^{i theta} (k = 1) or i e^{i theta}
// (k = 2), direction -1 reverses.  Stops on the domain boundary (endpoint
// within 1e-9 of it), at a field gap, or at max_len.
TraceResult trace(const SolutionField& f, cplx z0, int k, int direction, const Domain& dom,
                  const TraceOptions& opt);

// Characteristic quadrilateral a,b,c,d: ab and cd are i-arcs, ac and bd the
// joining j-arcs of length eps.
struct CharQuad {
    cplx a, b, c, d;
    Curve ab, ac, bd, cd;
    int i_index = 1;
    double closure_gap = 0.0;
    bool positively_oriented = true;
};

CharQuad extract_quad(const SolutionField& f, cplx z0, int i_index, double l, double eps,
                      const Domain& dom, double step);

struct RatioReport {
    enum class Kind { Ratio, BothZero, OneZero } kind = Kind::Ratio;
    double dtheta_ac = 0.0, dtheta_bd = 0.0;
    double ratio = 0.0;  // |dtheta_bd| / |dtheta_ac| when kind == Ratio
    bool signs_agree = true;
};
RatioReport quasi_hp_ratio(const CharQuad& q);

// Residuals of D2 D1 theta = (D1 theta)^2 and D1 D2 theta = -(D2 theta)^2,
// via centered differences of step h along directions re-evaluated at the
// shifted points.  Throws std::domain_error when the stencil leaves the field.
std::pair<double, double> blowup_residual(const SolutionField& f, cplx z, double h);

struct TaggedCurve {
    Curve curve;
    int k = 1;
};

struct BoundAuditOptions {
    double tol_rel = 0.05;        // relative slack on the curvature/length product
    double kappa_min = 1e-4;      // below this the bound is treated as vacuous
    int samples_per_curve = 12;
    double trace_step = 2e-3;
    int diam_subarcs = 8;         // diameter-bound subarcs sampled per curve
    unsigned seed = 1234;
};

struct BoundAuditReport {
    // (a)+(b) curvature * orthogonal-half-characteristic-length <= K
    int product_checked = 0, product_failed = 0;
    double worst_product = 0.0;
    cplx worst_product_at{0, 0};
    // (c) diam(subarc) <= 5 * chord
    int diam_checked = 0, diam_failed = 0;
    double worst_diam_ratio = 0.0;
    // (d) measured area constants (reported, never asserted)
    double eta_measured = 0.0;
    double eta_prime_measured = 0.0;
    bool passed(double) const { return product_failed == 0 && diam_failed == 0; }
};

BoundAuditReport bound_audit(const std::vector<TaggedCurve>& net, double K, const SolutionField& f,
                             const Domain& dom, const BoundAuditOptions& opt = {});

enum class BoundaryLabel { Regular, Type0, Type1, ISingularity1, ISingularity2 };

struct BoundaryClassification {
    BoundaryLabel label = BoundaryLabel::Regular;
    std::vector<double> oscillation;  // per scale
    double final_oscillation = 0.0;
};

// Heuristic nontangential-limit indicator: oscillation of theta over sectors
// {delta1 < arg(z - p) < pi - delta1, |z - p| < r} across the given scales.
BoundaryClassification classify_boundary_point(const SolutionField& f, cplx p,
                                               const std::vector<double>& scales,
                                               double delta1 = 0.2, double reg_tol = 0.05);

// Default scale ladder for the classifier: six levels at ratio one half.
std::vector<double> default_sector_scales(double r0);

// Field backed by a characteristic grid: point-in-cell search via a uniform
// spatial hash over cell boxes, then inverse-bilinear iteration.
class GridField : public SolutionField {
  public:
    GridField(const NormalSystem& sys, CharGrid grid);
    std::optional<FieldSample> sample(cplx z) const override;
    const CharGrid& grid() const { return grid_; }

  private:
    const NormalSystem& sys_;
    CharGrid grid_;
    double bin_ = 1.0;
    std::unordered_map<long long, std::vector<int>> bins_;  // cell ids per bin
    void insert_cell(int ci);
};

// Ordered overlay of fields; the first one that answers wins.
class PatchworkField : public SolutionField {
  public:
    void add(std::shared_ptr<const SolutionField> f) { parts_.push_back(std::move(f)); }
    std::optional<FieldSample> sample(cplx z) const override {
        for (const auto& p : parts_) {
            if (auto s = p->sample(z)) return s;
        }
        return std::nullopt;
    }
    int size() const { return static_cast<int>(parts_.size()); }

  private:
    std::vector<std::shared_ptr<const SolutionField>> parts_;
};

// Similarity-placed wrapper: query z maps to (z - shift)/scale in the base
// field, invariants get a constant offset, theta recomputed from the system.
class FramedField : public SolutionField {
  public:
    FramedField(const NormalSystem& sys, std::shared_ptr<const SolutionField> base, double scale,
                cplx shift, InvariantPair r_offset)
        : sys_(sys), base_(std::move(base)), scale_(scale), shift_(shift), off_(r_offset) {}
    std::optional<FieldSample> sample(cplx z) const override {
        auto s = base_->sample((z - shift_) / scale_);
        if (!s) return std::nullopt;
        InvariantPair r = s->R + off_;
        return FieldSample{r, sys_.theta(r)};
    }

  private:
    const NormalSystem& sys_;
    std::shared_ptr<const SolutionField> base_;
    double scale_;
    cplx shift_;
    InvariantPair off_;
};

// Thin field along a characteristic: answers within `capture` of the curve
// with the stored invariant profile.
class CurveProfileField : public SolutionField {
  public:
    CurveProfileField(const NormalSystem& sys, Curve c, std::vector<InvariantPair> profile,
                      double capture);
    std::optional<FieldSample> sample(cplx z) const override;

  private:
    const NormalSystem& sys_;
    Curve c_;
    std::vector<InvariantPair> profile_;
    double capture_;
    double bin_;
    std::unordered_map<long long, std::vector<int>> bins_;
};

}  // namespace hpnet

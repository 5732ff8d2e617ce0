#include "hpnet/singular_construction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpnet {

InvariantPair transport_path(const NormalSystem& sys, InvariantPair rho,
                             const std::vector<TransportLeg>& legs) {
    InvariantPair r = rho;
    for (const auto& leg : legs) r = sys.transport(r, leg.k, leg.dtheta);
    return r;
}

double legs_total(const std::vector<TransportLeg>& legs) {
    double t = 0.0;
    for (const auto& leg : legs) t += leg.dtheta;
    return t;
}

namespace {

std::vector<TransportLeg> cat_legs(std::vector<TransportLeg> a, const std::vector<TransportLeg>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// ---------------------------------------------------------------- geometry

std::vector<double> axis_crossings(const Curve& c) {
    std::vector<double> out;
    for (int i = 0; i + 1 < c.size(); ++i) {
        double y0 = c.z[i].imag(), y1 = c.z[i + 1].imag();
        if ((y0 < 0) != (y1 < 0)) {
            double f = y0 / (y0 - y1);
            out.push_back(c.s[i] + f * (c.s[i + 1] - c.s[i]));
        }
    }
    return out;
}

// Interpolated parameter of the last upward crossing of the height strictly
// before `before`, and of the first downward crossing after `after`.
double rising_crossing_before(const Curve& c, double height, double before) {
    double best = -1.0;
    for (int i = 0; i + 1 < c.size(); ++i) {
        if (c.s[i] >= before) break;
        double y0 = c.z[i].imag() - height, y1 = c.z[i + 1].imag() - height;
        if (y0 < 0 && y1 >= 0) {
            double f = y0 / (y0 - y1);
            double t = c.s[i] + f * (c.s[i + 1] - c.s[i]);
            if (t < before) best = t;
        }
    }
    if (best < 0) throw std::runtime_error("construction: no rising height crossing found");
    return best;
}

double falling_crossing_after(const Curve& c, double height, double after) {
    for (int i = 0; i + 1 < c.size(); ++i) {
        if (c.s[i + 1] <= after) continue;
        double y0 = c.z[i].imag() - height, y1 = c.z[i + 1].imag() - height;
        if (y0 >= 0 && y1 < 0) {
            double f = y0 / (y0 - y1);
            double t = c.s[i] + f * (c.s[i + 1] - c.s[i]);
            if (t > after) return t;
        }
    }
    throw std::runtime_error("construction: no falling height crossing found");
}

Curve straight_to_height(cplx z0, double angle, double height, double ds) {
    double rate = std::sin(angle);
    if (std::fabs(rate) < 1e-9)
        throw std::runtime_error("construction: cap direction is horizontal");
    double len = (height - z0.imag()) / rate;
    if (!(len > 0)) throw std::runtime_error("construction: cap already past the target height");
    return arc_piece(z0, angle, 0.0, len, std::min(ds, len / 8));
}

// Representative member of the cap family: straight cap, arc of total turn
// -(pi + 2 eps), straight cap; left foot at (-1, -eps).
Curve representative_cap_curve(double eps) {
    const double rc = 0.55, lcap = 0.12;
    double arc_len = rc * (PI + 2 * eps);
    double ds = default_ds(2 * lcap + arc_len);
    Curve r = concat(concat(arc_piece({0, 0}, PI / 2 + eps, 0.0, lcap, ds),
                            arc_piece({0, 0}, PI / 2 + eps, -1.0 / rc, arc_len, ds)),
                     arc_piece({0, 0}, -(PI / 2 + eps), 0.0, lcap, ds));
    return r.translated(cplx(-1.0, -eps) - r.start());
}

struct SpineBuild {
    Curve spine;     // curved part, smooth straightening, long exact ray
    double arc_len;  // parameter length of the curved part
};

// Characteristic the construction grows behind the data curve: an arc of
// radius rv turning clockwise from pi + eps, straightened onto the -pi/4 ray.
SpineBuild build_spine(cplx c_l, double eps, double rv, double ray_len, double resolution) {
    const double slack = 0.05, delta = 0.15;
    double turn = (5 * PI / 4 + eps) - slack;
    double ds = std::min(0.01, rv * turn / 1500) / resolution;
    Curve v = arc_piece(c_l, PI + eps, -1.0 / rv, rv * turn, ds);
    Curve v1 = adjoin_smooth_tail(v, v.length() - delta, delta, 0.0, -PI / 4);
    SpineBuild sb;
    sb.spine = concat(v1, arc_piece({0, 0}, -PI / 4, 0.0, ray_len, std::min(0.5, ray_len / 64)));
    sb.arc_len = v.length() - delta;
    return sb;
}

// Cap one end of an open arc: ramp the tangent to the exact target angle and
// run straight, cutting exactly at the target height.  `left_end` caps the
// start (via the reversal trick), otherwise the end.
Curve cap_end(const Curve& c, bool left_end, double target_angle, double height, double delta) {
    Curve work = left_end ? c.reversed() : c;
    double target = left_end ? target_angle + PI : target_angle;
    target = lift_near(target, work.phi.back());
    double rate = std::sin(target);
    if (rate >= -1e-6) throw std::runtime_error("cap_end: target direction does not descend");
    double gap = work.end().imag() - height;
    if (!(gap > 0)) throw std::runtime_error("cap_end: curve already below the target height");
    delta = std::min({delta, 0.35 * gap / std::fabs(rate), 0.2 * work.length()});
    Curve ramped = adjoin_smooth_tail(work, work.length() - delta, delta, 0.0, target);
    // the last delta of the adjoined tail has the exact target angle
    double exact_start = work.length();
    cplx z_exact = ramped.point_at(exact_start);
    if (z_exact.imag() <= height)
        throw std::runtime_error("cap_end: blend overshot the target height");
    double need = (height - z_exact.imag()) / rate;
    Curve full;
    if (exact_start + need <= ramped.length()) {
        full = ramped.subcurve(0.0, exact_start + need);
    } else {
        full = concat(ramped, straight_to_height(ramped.end(), target, height, delta / 4));
    }
    return left_end ? full.reversed() : full;
}

Curve resample_for_grid(const Curve& c, int max_axis) {
    if (c.size() <= max_axis) return c;
    return c.resampled(c.length() / (max_axis - 1));
}

// ------------------------------------------------------- ray region field

// Solution between a characteristic and its offset: constant invariants on
// each straight orthogonal ray.  normal_sign picks which side the rays leave.
class RayRegionField final : public SolutionField {
  public:
    RayRegionField(const NormalSystem& sys, Curve base, std::vector<InvariantPair> profile,
                   double rmax, int normal_sign)
        : sys_(sys), base_(std::move(base)), prof_(std::move(profile)), rmax_(rmax),
          sgn_(normal_sign) {
        if (static_cast<int>(prof_.size()) != base_.size())
            throw std::invalid_argument("RayRegionField: profile size mismatch");
    }

    std::optional<FieldSample> sample(cplx z) const override {
        auto u = [&](int i) { return dot(z - base_.z[i], unit_dir(base_.phi[i])); };
        int n = base_.size();
        double u0 = u(0), u1 = u(n - 1);
        if ((u0 < 0) == (u1 < 0)) return std::nullopt;
        int lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            int mid = (lo + hi) / 2;
            if ((u(mid) < 0) == (u0 < 0))
                lo = mid;
            else
                hi = mid;
        }
        double ulo = u(lo), uhi = u(hi);
        double f = (ulo == uhi) ? 0.0 : ulo / (ulo - uhi);
        cplx foot = base_.z[lo] + f * (base_.z[hi] - base_.z[lo]);
        double phi = base_.phi[lo] + f * (base_.phi[hi] - base_.phi[lo]);
        double r = dot(z - foot, double(sgn_) * cplx(0, 1) * unit_dir(phi));
        if (r < -1e-9 || r > rmax_) return std::nullopt;
        InvariantPair R{prof_[lo].r1 + f * (prof_[hi].r1 - prof_[lo].r1),
                        prof_[lo].r2 + f * (prof_[hi].r2 - prof_[lo].r2)};
        return FieldSample{R, sys_.theta(R)};
    }

  private:
    const NormalSystem& sys_;
    Curve base_;
    std::vector<InvariantPair> prof_;
    double rmax_;
    int sgn_;
};

std::vector<InvariantPair> profile_pairs(const NormalSystem& sys, const Curve& c,
                                         InvariantPair corner, int fixed_index) {
    auto varying = edge_invariant_profile(sys, c, corner, fixed_index);
    std::vector<InvariantPair> out(varying.size());
    for (size_t i = 0; i < varying.size(); ++i)
        out[i] = (fixed_index == 1) ? InvariantPair{corner.r1, varying[i]}
                                    : InvariantPair{varying[i], corner.r2};
    return out;
}

}  // namespace

// ------------------------------------------------------------ universal arc

UniversalArc build_universal_arc(const NormalSystem& sys, double epsilon, int side,
                                 const ConstructionOptions& opt) {
    if (!(epsilon > 0 && epsilon <= 0.05))
        throw std::invalid_argument("build_universal_arc: epsilon must lie in (0, 0.05]");
    if (side != 1 && side != 2)
        throw std::invalid_argument("build_universal_arc: side must be 1 or 2");

    UniversalArc ua;
    ua.side = side;
    ua.epsilon = epsilon;
    ua.data_curve = representative_cap_curve(epsilon);
    cplx c_l = ua.data_curve.start();
    double rv = opt.spine_radius;

    auto make_spine = [&](double r) {
        return build_spine(c_l, epsilon, rv, 1.7 * r + 4 * rv + 8, opt.resolution);
    };
    auto passes = [&](double r) -> bool {
        SpineBuild sb = make_spine(r);
        Curve par;
        try {
            par = parallel_extension(sb.spine, r);
        } catch (const std::domain_error&) {
            return false;
        }
        auto crossings = axis_crossings(par);
        if (crossings.size() != 2) return false;
        if (std::fabs(par.phi_at(crossings.front()) - PI / 2) > epsilon / 4) return false;
        double t_lo = std::max(0.0, crossings.front() - 0.25 * r);
        for (int i = 0; i < par.size(); ++i) {
            if (par.s[i] < t_lo || par.s[i] > crossings.back()) continue;
            if (std::abs(par.z[i]) < 2.2) return false;
        }
        return true;
    };
    double hi = 8.0;
    int guard = 0;
    while (!passes(hi)) {
        hi *= 2.0;
        if (++guard > 14) throw std::runtime_error("universal arc: offset search failed");
    }
    double lo = hi / 2;
    for (int it = 0; it < 16 && hi - lo > 0.02 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (passes(mid) ? hi : lo) = mid;
    }
    ua.r0 = 1.05 * hi;

    SpineBuild sb = make_spine(ua.r0);
    ua.spine = sb.spine;
    Curve par = parallel_extension(sb.spine, ua.r0);

    auto crossings = axis_crossings(par);
    double t_up = crossings.front(), t_down = crossings.back();
    double t_trim = rising_crossing_before(par, -epsilon / 2, t_up + 1e-9);
    Curve body = par.subcurve(t_trim, t_down);
    Curve arc = cap_end(body, true, PI / 2 + epsilon, -epsilon, std::min(0.02, 0.1 * body.length()));
    ua.curve = arc;
    ua.e_point = arc.start();
    ua.m_point = arc.end();

    ua.transfer_legs = {{1, ua.spine.phi.back() - ua.spine.phi.front()}, {2, 0.0}};

    if (side == 2) {
        ua.curve = ua.curve.mirrored_x().reversed();
        for (auto& a : ua.curve.phi) a -= TWO_PI;
        ua.data_curve = ua.data_curve.mirrored_x().reversed();
        for (auto& a : ua.data_curve.phi) a -= TWO_PI;
        ua.spine = ua.spine.mirrored_x();
        ua.e_point = cplx(-ua.e_point.real(), ua.e_point.imag());
        ua.m_point = cplx(-ua.m_point.real(), ua.m_point.imag());
        double data_turn = ua.data_curve.phi.back() - ua.data_curve.phi.front();
        double spine_turn = sb.spine.phi.back() - sb.spine.phi.front();
        ua.transfer_legs = {{1, data_turn}, {2, -spine_turn}, {1, 0.0}};
    }
    ua.angle_shift = legs_total(ua.transfer_legs);

    double theta_cl = (side == 1) ? epsilon : PI / 2 + epsilon;
    for (int m = 0; m < opt.transfer_samples; ++m) {
        double u = -3.0 + 6.0 * m / std::max(1, opt.transfer_samples - 1);
        InvariantPair rho{u, sys.solve_r2(u, theta_cl, 0.0)};
        InvariantPair img = ua.transfer(sys, rho);
        ua.sample_rho.push_back(rho);
        ua.sample_image.push_back(img);
        ua.b0 = std::max(ua.b0, norm(img - rho));
    }

    if (opt.validate) {
        auto rep = in_cap_family(ua.data_curve, epsilon);
        if (!rep.all()) throw std::runtime_error("universal arc: representative data curve invalid");
        double worst_up = 0.0;
        for (int i = 0; i + 1 < ua.curve.size(); ++i)
            worst_up = std::max(worst_up, (ua.curve.phi[i + 1] - ua.curve.phi[i]) /
                                              (ua.curve.s[i + 1] - ua.curve.s[i]));
        if (worst_up > 1e-9) throw std::runtime_error("universal arc: tangent not monotone");
        if (std::fabs(ua.e_point.imag() + epsilon) > 1e-6)
            throw std::runtime_error("universal arc: cap endpoint height off");
        if (std::fabs(ua.m_point.imag()) > 1e-6)
            throw std::runtime_error("universal arc: axis endpoint height off");
    }
    return ua;
}

// ------------------------------------------------------------------- strips

namespace {

// Split an arc at turn quantiles so every piece turns at most max_turn.
std::vector<Curve> split_by_turn(const Curve& c, double max_turn) {
    double total = std::fabs(c.phi.back() - c.phi.front());
    int pieces = std::max(1, static_cast<int>(std::ceil(total / max_turn)));
    std::vector<Curve> out;
    double t0 = c.s.front();
    for (int p = 0; p < pieces; ++p) {
        double want = c.phi.front() + (c.phi.back() - c.phi.front()) * (p + 1.0) / pieces;
        double t1 = c.s.back();
        if (p + 1 < pieces) {
            for (int i = 0; i + 1 < c.size(); ++i) {
                bool crossed = (c.phi[i] - want) * (c.phi[i + 1] - want) <= 0.0;
                if (crossed && c.s[i + 1] > t0) {
                    t1 = std::max(c.s[i + 1], t0 + 1e-12);
                    break;
                }
            }
        }
        if (t1 > t0 + 1e-12) out.push_back(c.subcurve(t0, t1));
        t0 = t1;
    }
    return out;
}

// Goursat solves between the data curve and the spine, subdivided in both
// directions so every sub-rectangle turns at most delta0/2 per side.  The
// transverse edges contract as the data curve turns and focus at a caustic
// whose distance scales with the spine radius; growing the region past it
// fold-free needs arcs whose size compounds like e^{(data turn)x(spine turn)},
// far beyond desk scale.  Each chain therefore stops while the contracted
// edge is still resolvable, and the grids cover the data-adjacent sliver.
std::vector<CharGrid> growth_strips(const NormalSystem& sys, int side, const Curve& data,
                                    const Curve& spine, double arc_len, InvariantPair corner_rho,
                                    double delta0, int max_axis) {
    std::vector<CharGrid> best;
    for (int attempt = 0; attempt < 3; ++attempt, delta0 *= 0.5) {
        std::vector<CharGrid> grids;
        bool folded = false;
        Curve edge2 = resample_for_grid(side == 1 ? data : data.reversed(), max_axis);
        InvariantPair corner = corner_rho;
        double total_turn = std::fabs(spine.phi_at(arc_len) - spine.phi.front());
        int pieces = std::max(1, static_cast<int>(std::ceil(total_turn / (delta0 / 2))));
        double t0 = 0.0;
        for (int p = 0; p < pieces && !folded; ++p) {
            double t1 = arc_len * (p + 1.0) / pieces;
            Curve lead1 = resample_for_grid(spine.subcurve(t0, t1), max_axis);
            lead1 = lead1.translated(edge2.start() - lead1.start());
            double lead_len0 = lead1.length();
            auto segs = split_by_turn(edge2, delta0 / 2);
            Curve next_edge2;
            InvariantPair next_corner{};
            InvariantPair seg_corner = corner;
            bool first = true;
            double consumed = 0.0;
            for (auto& seg : segs) {
                // stop before the contraction approaches the caustic
                if (lead1.length() < 0.18 * lead_len0) break;
                Curve seg_g = resample_for_grid(seg, max_axis);
                seg_g = seg_g.translated(lead1.start() - seg_g.start());
                double ds2 = seg_g.length() / (seg_g.size() - 1);
                double lead_ds = std::max(lead1.length() / (max_axis - 1), 0.4 * ds2);
                if (lead1.length() / (lead1.size() - 1) < lead_ds)
                    lead1 = lead1.resampled(lead_ds);
                CharGrid g = (side == 1) ? solve_goursat(sys, lead1, seg_g, seg_corner)
                                         : solve_goursat(sys, seg_g, lead1, seg_corner);
                if (g.folds > 0) {
                    folded = true;
                    break;
                }
                Curve far2, far1;
                if (side == 1) {
                    far2 = grid_char_curve(g, 2, g.n1() - 1);
                    far1 = grid_char_curve(g, 1, g.n2() - 1);
                    if (first) next_corner = g.invariants(g.n1() - 1, 0);
                    seg_corner = g.invariants(0, g.n2() - 1);
                } else {
                    far2 = grid_char_curve(g, 1, g.n2() - 1);
                    far1 = grid_char_curve(g, 2, g.n1() - 1);
                    if (first) next_corner = g.invariants(0, g.n2() - 1);
                    seg_corner = g.invariants(g.n1() - 1, 0);
                }
                grids.push_back(std::move(g));
                next_edge2 = first ? far2 : concat(next_edge2, far2);
                lead1 = far1;
                first = false;
                consumed += seg.length();
            }
            if (folded) break;
            if (first) break;  // nothing advanced; stop growing
            if (consumed < edge2.length() - 1e-9) {
                // carry the unreached data tail forward; the skipped sliver is
                // exponentially thin against the lead scale
                Curve tail = edge2.subcurve(edge2.s.front() + consumed, edge2.s.back());
                double lift = TWO_PI * std::round((next_edge2.phi.back() - tail.phi.front()) / TWO_PI);
                for (auto& a : tail.phi) a += lift;
                next_edge2 = concat(next_edge2, tail);
            }
            edge2 = resample_for_grid(next_edge2, max_axis);
            corner = next_corner;
            t0 = t1;
        }
        if (!folded) return grids;
        if (grids.size() > best.size()) best = std::move(grids);
    }
    if (best.empty()) throw std::runtime_error("construction: growth strips keep folding");
    return best;
}

// ------------------------------------------------------------- child build

ChildBuild build_child_curve(const NormalSystem& sys, const TentGeometry& tg, InvariantPair rho_ref,
                             const ConstructionOptions& opt) {
    double eps = tg.epsilon;
    int axis = static_cast<int>(opt.max_grid_axis * opt.resolution);
    ChildBuild cb;
    cb.side = 2;

    // Extended characteristic initial value problem over the tent: the second
    // initial arc continues past e'2 around a small circle, which drives the
    // far 2-side over the top and down the right flank.
    Curve c1 = resample_for_grid(tg.arm1.reversed(), axis);
    Curve arm2g = resample_for_grid(tg.arm2, axis);
    double dF = eps / 2;
    // anchor the angle line of the adjoined circle so the ramp stays monotone
    double kraw = -10.0 / eps;
    double tau_ext = arm2g.phi.back() + (dF / 3.0) * kraw;
    Curve ext = adjoin_smooth_tail(arm2g, arm2g.length() - dF, dF, kraw, tau_ext);
    double extra_turn = 3 * PI - (4.0 / 3.0) * dF * (10.0 / eps);
    if (extra_turn > 0) {
        double len = extra_turn * eps / 10.0;
        ext = concat(ext, arc_piece({0, 0}, ext.phi.back(), kraw, len,
                                    0.03 * eps / 10.0 / opt.resolution));
    }
    CharGrid big = solve_goursat(sys, c1, ext, rho_ref);
    if (big.st(big.n1() - 1, big.n2() - 1) != NodeStatus::Valid)
        throw std::runtime_error("child build: extended solve folded before the far corner");
    Curve t_full = grid_char_curve(big, 2, big.n1() - 1);

    // cut where the tangent has dropped past -(pi/2 + eps) and the curve is
    // back below -eps/2
    double t_cut = -1.0;
    for (int i = 0; i < t_full.size(); ++i) {
        if (t_full.phi[i] <= -(PI / 2 + eps) - 0.05 && t_full.z[i].imag() <= -eps / 2) {
            t_cut = t_full.s[i];
            break;
        }
    }
    if (t_cut <= 0) throw std::runtime_error("child build: far side never turns down");
    Curve t_cutc = t_full.subcurve(0.0, t_cut);
    double dT = std::min(0.5, 0.05 * t_cutc.length());
    Curve t2 = adjoin_smooth_tail(t_cutc, t_cutc.length() - dT, dT, 0.0,
                                  t_cutc.phi.back() - 0.01);
    double diam_t = 0.0;
    for (const auto& p : t2.z) diam_t = std::max(diam_t, std::abs(p));
    t2 = concat(t2, arc_piece({0, 0}, t2.phi.back(), 0.0, 5.0 * diam_t, diam_t / 16));
    cb.t_curve = t2;

    double r_tent = 0.0;
    for (const auto& p : tg.arm1.z) r_tent = std::max(r_tent, std::abs(p));
    for (const auto& p : tg.arm2.z) r_tent = std::max(r_tent, std::abs(p));

    auto passes = [&](double r) -> bool {
        Curve s;
        try {
            s = parallel_extension(t2, r);
        } catch (const std::domain_error&) {
            return false;
        }
        auto cr = axis_crossings(s);
        if (cr.size() != 2) return false;
        if (std::fabs(s.phi_at(cr.front()) - PI / 2) > eps / 2) return false;
        if (std::fabs(s.phi_at(cr.back()) + PI / 2) > eps / 2) return false;
        for (int i = 0; i < s.size(); ++i)
            if (s.z[i].imag() > 0 && std::abs(s.z[i]) < 1.15 * r_tent) return false;
        return true;
    };
    double hi = 2.0 * r_tent;
    int guard = 0;
    while (!passes(hi)) {
        hi *= 2.0;
        if (++guard > 14) throw std::runtime_error("child build: enclosing offset search failed");
    }
    double lo = hi / 2;
    for (int it = 0; it < 14 && hi - lo > 0.02 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (passes(mid) ? hi : lo) = mid;
    }
    cb.s_r0 = 1.05 * hi;
    Curve s = parallel_extension(t2, cb.s_r0);

    auto cr = axis_crossings(s);
    double cross_l = cr.front(), cross_r = cr.back();
    cb.center = 0.5 * (s.point_at(cross_l).real() + s.point_at(cross_r).real());
    double M = 0.0;
    for (int i = 0; i < s.size(); ++i)
        if (s.z[i].imag() >= 0)
            M = std::max(M, std::abs(s.z[i] - cplx(cb.center, 0.0)));
    cb.xi = 1.0 / M;
    double d_pre = eps / cb.xi;

    // trim just below the axis on both sides
    double trim_l = rising_crossing_before(s, -d_pre / 2, cross_l + 1e-9);
    double trim_r = falling_crossing_after(s, -d_pre / 2, cross_r - 1e-9);
    Curve body = s.subcurve(trim_l, trim_r);
    double dc = 0.02 * M;
    Curve capped = cap_end(body, true, PI / 2 + eps, -d_pre, dc);
    capped = cap_end(capped, false, -(PI / 2 + eps), -d_pre, dc);
    Curve x2 = capped.translated(cplx(-cb.center, 0.0)).scaled(cb.xi);
    x2 = x2.resampled(default_ds(x2.length()) / opt.resolution);
    cb.x_curve = x2;

    if (opt.validate) {
        auto rep = in_cap_family(x2, eps, 1e-6, opt.cap_fraction);
        if (!rep.all()) {
            char msg[256];
            std::snprintf(msg, sizeof(msg),
                          "child build: cap family violated (h=%d a=%d m=%d c=%d s=%d, "
                          "worst %.2e %.2e %.2e %.2e %.2e)",
                          rep.ends_at_height, rep.end_angles, rep.monotone, rep.contained,
                          rep.straight_caps, rep.worst_height, rep.worst_angle, rep.worst_monotone,
                          rep.worst_distance, rep.worst_cap_kappa);
            throw std::runtime_error(msg);
        }
    }

    // transport path corner -> left endpoint of the child curve
    Curve arm1rev = tg.arm1.reversed();
    cb.legs = {{1, arm1rev.phi.back() - arm1rev.phi.front()},
               {1, 0.0},
               {2, (PI / 2 + eps) - t2.phi.front()}};
    cb.shift_total = legs_total(cb.legs);
    cb.alpha = (-1.0 - tg.half_width) - x2.start().real();
    return cb;
}

}  // namespace

// --------------------------------------------------------------------- tent

TentGeometry build_tent(const NormalSystem& sys, double epsilon, const ConstructionOptions& opt) {
    TentGeometry tg;
    tg.epsilon = epsilon;
    tg.ua1 = build_universal_arc(sys, epsilon, 1, opt);
    tg.ua2 = build_universal_arc(sys, epsilon, 2, opt);
    tg.half_width = tg.ua1.m_point.real();
    tg.arm1 = tg.ua1.curve.translated(-tg.ua1.m_point);
    tg.arm2 = tg.ua2.curve.translated(-tg.ua2.m_point);

    auto cr1 = axis_crossings(tg.arm1);
    auto cr2 = axis_crossings(tg.arm2);
    if (cr1.empty() || cr2.empty()) throw std::runtime_error("tent: arms never cross the axis");
    tg.foot.a = tg.arm1.point_at(cr1.front()).real();
    tg.foot.b = tg.arm2.point_at(cr2.back()).real();

    tg.rho_ref = {0.0, sys.solve_r2(0.0, -PI / 4, 0.0)};

    tg.child_left = build_child_curve(sys, tg, tg.rho_ref, opt);

    tg.child_right.side = 1;
    tg.child_right.x_curve = tg.child_left.x_curve.mirrored_x().reversed();
    for (auto& a : tg.child_right.x_curve.phi) a -= TWO_PI;
    tg.child_right.xi = tg.child_left.xi;
    tg.child_right.center = -tg.child_left.center;
    tg.child_right.s_r0 = tg.child_left.s_r0;
    tg.child_right.t_curve = tg.child_left.t_curve.mirrored_x();
    tg.child_right.legs = {{2, tg.arm2.phi.back() - tg.arm2.phi.front()},
                           {2, 0.0},
                           {1, (PI / 2 + epsilon) + tg.child_left.t_curve.phi.front()}};
    tg.child_right.shift_total = legs_total(tg.child_right.legs);
    tg.child_right.alpha = -tg.child_left.alpha;

    tg.xi = tg.child_left.xi;
    tg.shift_left = tg.child_left.alpha - tg.xi * tg.child_left.center;
    tg.shift_right = -tg.shift_left;

    tg.composed_left = cat_legs(tg.child_left.legs, tg.ua1.transfer_legs);
    tg.composed_right = cat_legs(tg.child_right.legs, tg.ua2.transfer_legs);
    return tg;
}

// -------------------------------------------------------------- fixed point

InvariantPair solve_corner_fixed_point(const NormalSystem& sys, InvariantPair rho0,
                                       const std::function<InvariantPair(InvariantPair)>& composed,
                                       double window) {
    // the composed transfer shifts theta by +-pi; the fixed point sits on the
    // level curve that the shift maps exactly onto theta(rho0)
    double shift = sys.theta(composed(rho0)) - sys.theta(rho0);
    double level = sys.theta(rho0) - shift;
    auto on_curve = [&](double u) { return InvariantPair{u, sys.solve_r2(u, level, 0.0)}; };
    auto defect = [&](double u) { return composed(on_curve(u)).r1 - rho0.r1; };

    double w = window > 0 ? window : 2.0 * PI / sys.lower_bound_A();
    double a = rho0.r1 - w, b = rho0.r1 + w;
    double fa = defect(a), fb = defect(b);
    int guard = 0;
    while ((fa < 0) == (fb < 0)) {
        w *= 2.0;
        a = rho0.r1 - w;
        b = rho0.r1 + w;
        fa = defect(a);
        fb = defect(b);
        if (++guard > 8)
            throw std::runtime_error("solve_corner_fixed_point: root not bracketed, window too small");
    }
    for (int it = 0; it < 200 && b - a > 1e-13 * (1 + std::fabs(a)); ++it) {
        double m = 0.5 * (a + b);
        double fm = defect(m);
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    InvariantPair rho = on_curve(0.5 * (a + b));
    if (norm(composed(rho) - rho0) > 1e-8)
        throw std::runtime_error("solve_corner_fixed_point: residual too large");
    return rho;
}

// ---------------------------------------------------------------- oscillation

double sector_oscillation(const NormalSystem& sys, const TentGeometry& geom,
                          const TentInstance& tent, double radius_factor, double delta1) {
    (void)sys;
    (void)tent;  // oscillation is measured in the unit frame; similarity preserves it
    double mid = geom.foot.mid();
    double radius = radius_factor * geom.foot.length();
    double lo = 1e300, hi = -1e300;
    auto visit = [&](const Curve& armco, double theta_offset) {
        for (int i = 0; i < armco.size(); ++i) {
            cplx d = armco.z[i] - cplx(mid, 0.0);
            double r = std::abs(d);
            if (r >= radius || r <= 0) continue;
            double ang = std::arg(d);
            if (ang <= delta1 || ang >= PI - delta1) continue;
            double th = armco.phi[i] + theta_offset;
            lo = std::min(lo, th);
            hi = std::max(hi, th);
        }
    };
    visit(geom.arm1, 0.0);
    visit(geom.arm2, -PI / 2);
    if (hi < lo) return 0.0;
    return hi - lo;
}

// ---------------------------------------------------------------- recursion

SingularSolution build_singular_solution(const NormalSystem& sys, double epsilon, int depth,
                                         const ConstructionOptions& opt) {
    if (depth < 1 || depth > 5)
        throw std::invalid_argument("build_singular_solution: depth must lie in [1, 5]");
    if (!sys.is_linear_kind() && depth > 1)
        throw std::invalid_argument(
            "build_singular_solution: recursion past depth 1 relies on similarity reuse and is "
            "only exact when theta is linear in the invariants");

    SingularSolution sol;
    sol.geom = build_tent(sys, epsilon, opt);
    const TentGeometry& tg = sol.geom;

    auto fixed_left = [&](InvariantPair rho_parent) {
        return solve_corner_fixed_point(sys, rho_parent, [&](InvariantPair r) {
            return transport_path(sys, r, tg.composed_left);
        });
    };
    auto fixed_right = [&](InvariantPair rho_parent) {
        return solve_corner_fixed_point(sys, rho_parent, [&](InvariantPair r) {
            return transport_path(sys, r, tg.composed_right);
        });
    };

    sol.tents.push_back({1.0, 0.0, tg.rho_ref, 0, -1});
    for (size_t i = 0; i < sol.tents.size(); ++i) {
        TentInstance t = sol.tents[i];
        if (t.level >= depth) continue;
        sol.tents.push_back({t.scale * tg.xi, t.shift + t.scale * tg.shift_left, fixed_left(t.rho),
                             t.level + 1, static_cast<int>(i)});
        sol.tents.push_back({t.scale * tg.xi, t.shift + t.scale * tg.shift_right, fixed_right(t.rho),
                             t.level + 1, static_cast<int>(i)});
    }

    // interval hierarchy
    sol.tree.levels.assign(depth + 1, {});
    sol.tree.level_length.assign(depth + 1, 0.0);
    for (const auto& t : sol.tents) {
        sol.tree.levels[t.level].push_back(
            {t.shift + t.scale * tg.foot.a, t.shift + t.scale * tg.foot.b});
        sol.tree.level_length[t.level] = t.scale * tg.foot.length();
    }
    for (auto& lvl : sol.tree.levels)
        std::sort(lvl.begin(), lvl.end(), [](const Interval& a, const Interval& b) { return a.a < b.a; });

    // Separation ratio valid for every level of the self-similar
    // continuation: the measured per-level ratios (gap_n / root)^{1/n}
    // decrease toward the child scale, which is therefore the infimum.
    // Deep gaps sit below the resolution of absolute coordinates, so every
    // adjacent pair is measured in the unit frame of its lowest common
    // ancestor: E[k]/F[k] are the extreme subtree edges k levels down.
    double root_len = sol.tree.levels[0][0].length();
    std::vector<double> E(depth + 1), F(depth + 1);
    E[0] = tg.foot.b;
    F[0] = tg.foot.a;
    for (int k = 1; k <= depth; ++k) {
        E[k] = tg.shift_right + tg.xi * E[k - 1];
        F[k] = tg.shift_left + tg.xi * F[k - 1];
    }
    auto pair_gap = [&](const TentInstance* a, const TentInstance* b) {
        // walk to the lowest common ancestor
        const TentInstance *pa = a, *pb = b;
        while (pa->parent != pb->parent) {
            pa = &sol.tents[pa->parent];
            pb = &sol.tents[pb->parent];
        }
        int j = a->level - pa->level;  // levels below the common ancestor's children
        double lca_scale = sol.tents[pa->parent].scale;
        return lca_scale * ((tg.shift_right + tg.xi * F[j]) - (tg.shift_left + tg.xi * E[j]));
    };
    double gamma = tg.xi;
    for (int n = 1; n <= depth; ++n) {
        std::vector<const TentInstance*> row;
        for (const auto& t : sol.tents)
            if (t.level == n) row.push_back(&t);
        std::sort(row.begin(), row.end(),
                  [](const TentInstance* a, const TentInstance* b) { return a->shift < b->shift; });
        double min_gap = 1e300;
        for (size_t k = 0; k + 1 < row.size(); ++k)
            min_gap = std::min(min_gap, pair_gap(row[k], row[k + 1]));
        if (min_gap <= 0) throw std::runtime_error("construction: intervals overlap");
        gamma = std::min(gamma, std::pow(min_gap / root_len, 1.0 / n));
    }
    sol.tree.gamma = gamma;
    sol.tree.tau = std::log(2.0) / std::log(1.0 / gamma);
    sol.tree.r1 = tg.xi;
    double d2 = 1e300;
    for (const auto& t : sol.tents) d2 = std::min(d2, sector_oscillation(sys, tg, t, 0.45));
    sol.tree.delta2 = d2;

    // ------------------------------------------------------------- patches
    auto field = std::make_shared<PatchworkField>();
    std::vector<std::shared_ptr<const SolutionField>> unit_patches;
    double worst_seam = 0.0;

    if (sys.is_linear_kind()) {
        // reference child corner values and data-curve corner values
        InvariantPair rho_cl = fixed_left(tg.rho_ref);
        InvariantPair rho_cr = fixed_right(tg.rho_ref);
        InvariantPair data_l = transport_path(sys, rho_cl, tg.child_left.legs);
        InvariantPair data_r = transport_path(sys, rho_cr, tg.child_right.legs);

        // left side: placed child curve, strips against the spine, ray regions
        Curve y2 = place_family_member(tg.child_left.x_curve,
                                       {tg.epsilon, 1.0, tg.child_left.alpha});
        Curve spine_l = tg.ua1.spine.translated(-tg.ua1.m_point);
        double arc_len_l = 0.0;
        {  // curved part of the spine = everything before the exact ray angle
            const Curve& sp = spine_l;
            for (int i = 0; i < sp.size(); ++i)
                if (std::fabs(sp.phi[i] + PI / 4) > 1e-9) arc_len_l = sp.s[i];
        }
        if (opt.validate) {
            auto grids = growth_strips(sys, 1, y2, spine_l, arc_len_l, data_l, opt.delta0,
                                       opt.max_grid_axis);
            for (auto& g : grids) {
                sol.patch_grids.push_back(g);
                unit_patches.push_back(std::make_shared<GridField>(sys, std::move(g)));
            }
        }
        auto ray_l = std::make_shared<RayRegionField>(
            sys, spine_l, profile_pairs(sys, spine_l, data_l, 1), 1.02 * tg.ua1.r0, +1);
        unit_patches.push_back(ray_l);
        InvariantPair at_e1 = sys.transport(tg.rho_ref, 1, tg.arm1.reversed().phi.back() -
                                                              tg.arm1.reversed().phi.front());
        auto sray_l = std::make_shared<RayRegionField>(
            sys, tg.child_left.t_curve, profile_pairs(sys, tg.child_left.t_curve, at_e1, 2),
            1.02 * tg.child_left.s_r0, +1);
        unit_patches.push_back(sray_l);

        // right side, mirrored roles
        Curve y1 = place_family_member(tg.child_right.x_curve,
                                       {tg.epsilon, 1.0, tg.child_right.alpha});
        Curve spine_r = tg.ua2.spine.translated(-tg.ua2.m_point);
        InvariantPair corner_r = transport_path(
            sys, data_r, {{1, tg.child_right.x_curve.phi.back() - tg.child_right.x_curve.phi.front()}});
        double arc_len_r = 0.0;
        {
            const Curve& sp = spine_r;  // mirrored ray angle is pi - (-pi/4) = 5 pi/4
            for (int i = 0; i < sp.size(); ++i)
                if (std::fabs(sp.phi[i] - 5 * PI / 4) > 1e-9) arc_len_r = sp.s[i];
        }
        if (opt.validate) {
            auto grids = growth_strips(sys, 2, y1, spine_r, arc_len_r, corner_r, opt.delta0,
                                       opt.max_grid_axis);
            for (auto& g : grids) {
                sol.patch_grids.push_back(g);
                unit_patches.push_back(std::make_shared<GridField>(sys, std::move(g)));
            }
        }
        unit_patches.push_back(std::make_shared<RayRegionField>(
            sys, spine_r, profile_pairs(sys, spine_r, corner_r, 2), 1.02 * tg.ua2.r0, -1));
        InvariantPair at_e2 =
            sys.transport(tg.rho_ref, 2, tg.arm2.phi.back() - tg.arm2.phi.front());
        unit_patches.push_back(std::make_shared<RayRegionField>(
            sys, tg.child_right.t_curve,
            profile_pairs(sys, tg.child_right.t_curve, at_e2, 1), 1.02 * tg.child_right.s_r0, -1));

        // top quadrilateral over the tent
        Curve c1 = resample_for_grid(tg.arm1.reversed(), opt.max_grid_axis);
        Curve c2 = resample_for_grid(tg.arm2, opt.max_grid_axis);
        CharGrid top_grid = solve_goursat(sys, c1, c2, tg.rho_ref);
        sol.patch_grids.push_back(top_grid);
        auto top = std::make_shared<GridField>(sys, std::move(top_grid));

        // thin profile fields along the arms
        double capture = 2.0 * tg.arm1.length() / tg.arm1.size();
        auto arm1_thin = std::make_shared<CurveProfileField>(
            sys, tg.arm1, profile_pairs(sys, tg.arm1, at_e1, 1), capture);
        auto arm2_thin = std::make_shared<CurveProfileField>(
            sys, tg.arm2, profile_pairs(sys, tg.arm2, tg.rho_ref, 2), capture);

        // deepest tents first so leaf-scale queries hit leaf patches
        std::vector<const TentInstance*> order;
        for (const auto& t : sol.tents) order.push_back(&t);
        std::sort(order.begin(), order.end(),
                  [](const TentInstance* a, const TentInstance* b) { return a->level > b->level; });
        for (const TentInstance* t : order) {
            InvariantPair off = t->rho - tg.rho_ref;
            cplx shift(t->shift, 0.0);
            field->add(std::make_shared<FramedField>(sys, arm1_thin, t->scale, shift, off));
            field->add(std::make_shared<FramedField>(sys, arm2_thin, t->scale, shift, off));
            for (const auto& up : unit_patches)
                field->add(std::make_shared<FramedField>(sys, up, t->scale, shift, off));
            field->add(std::make_shared<FramedField>(sys, top, t->scale, shift, off));
        }

        // seam audit: the ray region and the top grid meet along the left arm,
        // and the enclosing-arc region meets the child data curve; on both the
        // invariants must agree, which is exactly fixed-point consistency.
        int seam_hits = 0;
        for (int m = 2; m < 22; ++m) {
            double at = tg.arm1.s.front() + tg.arm1.length() * m / 24.0;
            cplx p = tg.arm1.point_at(at);
            auto a = ray_l->sample(p);
            auto b = top->sample(p);
            if (a && b) {
                ++seam_hits;
                worst_seam = std::max({worst_seam, std::fabs(a->R.r1 - b->R.r1),
                                       std::fabs(a->R.r2 - b->R.r2)});
            }
        }
        auto y2_prof = profile_pairs(sys, y2, data_l, 2);
        for (int m = 2; m < 22; ++m) {
            int idx = (y2.size() - 1) * m / 24;
            auto a = sray_l->sample(y2.z[idx]);
            if (!a) continue;
            ++seam_hits;
            worst_seam = std::max({worst_seam, std::fabs(a->R.r1 - y2_prof[idx].r1),
                                   std::fabs(a->R.r2 - y2_prof[idx].r2)});
        }
        if (seam_hits == 0) worst_seam = 1e300;  // nothing matched: report loudly
    } else {
        // general systems: thin arm fields only (see README for the scope note)
        InvariantPair at_e1 = sys.transport(tg.rho_ref, 1, tg.arm1.reversed().phi.back() -
                                                              tg.arm1.reversed().phi.front());
        double capture = 2.0 * tg.arm1.length() / tg.arm1.size();
        field->add(std::make_shared<CurveProfileField>(
            sys, tg.arm1, profile_pairs(sys, tg.arm1, at_e1, 1), capture));
        field->add(std::make_shared<CurveProfileField>(
            sys, tg.arm2, profile_pairs(sys, tg.arm2, tg.rho_ref, 2), capture));
    }

    sol.field = field;
    sol.seam_worst = worst_seam;
    return sol;
}

// ------------------------------------------------------------------- covers

double min_cover_sum(const NestedIntervalTree& tree,
                     const std::vector<std::vector<CoverPiece>>& covers) {
    if (tree.levels.empty() || tree.levels.back().empty())
        throw std::invalid_argument("min_cover_sum: empty tree");
    int depth = static_cast<int>(tree.levels.size()) - 1;
    int leaves = static_cast<int>(tree.levels.back().size());
    double norm_len = tree.length_at(0);
    double best = 1e300;
    for (const auto& cover : covers) {
        std::vector<bool> covered(leaves, false);
        double sum = 0.0;
        for (const auto& piece : cover) {
            if (piece.level < 0 || piece.level > depth || piece.index < 0 ||
                piece.index >= static_cast<int>(tree.levels[piece.level].size()))
                throw std::invalid_argument("min_cover_sum: cover piece outside the tree");
            int span = 1 << (depth - piece.level);
            for (int k = piece.index * span; k < (piece.index + 1) * span; ++k) covered[k] = true;
            sum += std::pow(tree.length_at(piece.level) / norm_len, tree.tau);
        }
        for (bool c : covered)
            if (!c) throw std::invalid_argument("min_cover_sum: not a cover of the deepest level");
        best = std::min(best, sum);
    }
    return best;
}

double min_cover_sum(const NestedIntervalTree& tree,
                     const std::vector<std::vector<Interval>>& covers) {
    if (tree.levels.empty() || tree.levels.back().empty())
        throw std::invalid_argument("min_cover_sum: empty tree");
    const auto& leaves = tree.levels.back();
    double norm_len = tree.levels.front().front().length();
    double best = 1e300;
    for (const auto& cover : covers) {
        std::vector<Interval> merged = cover;
        std::sort(merged.begin(), merged.end(),
                  [](const Interval& a, const Interval& b) { return a.a < b.a; });
        std::vector<Interval> un;
        for (const auto& I : merged) {
            if (!un.empty() && I.a <= un.back().b + 1e-12 * norm_len)
                un.back().b = std::max(un.back().b, I.b);
            else
                un.push_back(I);
        }
        for (const auto& leaf : leaves) {
            bool covered = false;
            for (const auto& I : un)
                if (I.a <= leaf.a + 1e-12 * norm_len && I.b >= leaf.b - 1e-12 * norm_len) {
                    covered = true;
                    break;
                }
            if (!covered) throw std::invalid_argument("min_cover_sum: not a cover of the deepest level");
        }
        double sum = 0.0;
        for (const auto& I : cover) sum += std::pow(I.length() / norm_len, tree.tau);
        best = std::min(best, sum);
    }
    return best;
}

}  // namespace hpnet

#include "hpnet/net_analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace hpnet {

Domain Domain::upper_half_plane(double diameter_hint) {
    Domain d;
    d.fn_ = [](cplx z) { return z.imag() > 0.0; };
    d.diam_ = diameter_hint;
    d.center_ = {0.0, 0.25 * diameter_hint};
    return d;
}

Domain Domain::disk(cplx c, double R) {
    Domain d;
    d.fn_ = [c, R](cplx z) { return std::abs(z - c) < R; };
    d.diam_ = 2 * R;
    d.center_ = c;
    return d;
}

Domain Domain::annulus(cplx c, double r, double R) {
    Domain d;
    d.fn_ = [c, r, R](cplx z) {
        double a = std::abs(z - c);
        return a > r && a < R;
    };
    d.diam_ = 2 * R;
    d.center_ = c;
    return d;
}

Domain Domain::annulus_sector(cplx c, double r, double R, double psi0, double psi1) {
    if (!(psi1 > psi0) || psi1 - psi0 >= TWO_PI)
        throw std::invalid_argument("annulus_sector: need 0 < psi1 - psi0 < 2*pi");
    Domain d;
    double mid = 0.5 * (psi0 + psi1);
    d.fn_ = [c, r, R, psi0, psi1, mid](cplx z) {
        double a = std::abs(z - c);
        if (!(a > r && a < R)) return false;
        double ang = mid + wrap_pi(std::arg(z - c) - mid);
        return ang > psi0 && ang < psi1;
    };
    d.diam_ = 2 * R;
    d.center_ = c + 0.5 * (r + R) * unit_dir(mid);
    return d;
}

Domain Domain::rect(double x0, double x1, double y0, double y1) {
    Domain d;
    d.fn_ = [=](cplx z) {
        return z.real() > x0 && z.real() < x1 && z.imag() > y0 && z.imag() < y1;
    };
    d.diam_ = std::hypot(x1 - x0, y1 - y0);
    d.center_ = {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
    return d;
}

namespace {

// Direction of the k-family at z, or nothing outside the field.
std::optional<cplx> family_dir(const SolutionField& f, cplx z, int k, int direction) {
    auto s = f.sample(z);
    if (!s) return std::nullopt;
    cplx e = unit_dir(s->theta);
    if (k == 2) e *= cplx(0, 1);
    return double(direction) * e;
}

// One RK4 step; nullopt if any stage leaves the field.
std::optional<cplx> rk4_step(const SolutionField& f, cplx z, int k, int direction, double h) {
    auto k1 = family_dir(f, z, k, direction);
    if (!k1) return std::nullopt;
    auto k2 = family_dir(f, z + 0.5 * h * *k1, k, direction);
    if (!k2) return std::nullopt;
    auto k3 = family_dir(f, z + 0.5 * h * *k2, k, direction);
    if (!k3) return std::nullopt;
    auto k4 = family_dir(f, z + h * *k3, k, direction);
    if (!k4) return std::nullopt;
    return z + (h / 6.0) * (*k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);
}

}  // namespace

TraceResult trace(const SolutionField& f, cplx z0, int k, int direction, const Domain& dom,
                  const TraceOptions& opt) {
    if (k != 1 && k != 2) throw std::invalid_argument("trace: family index must be 1 or 2");
    double max_len = opt.max_len > 0 ? opt.max_len : 10.0 * dom.diameter();
    TraceResult res;
    Curve& c = res.curve;

    auto s0 = f.sample(z0);
    if (!dom.contains(z0) || !s0) throw std::invalid_argument("trace: start point not in the field");
    double off = (k == 2 ? PI / 2 : 0.0) + (direction < 0 ? PI : 0.0);
    c.s.push_back(0.0);
    c.z.push_back(z0);
    c.phi.push_back(s0->theta + off);

    double h = opt.step;
    while (c.s.back() < max_len) {
        double step = std::min(h, max_len - c.s.back());
        cplx z = c.z.back();
        auto znext = rk4_step(f, z, k, direction, step);
        bool ok = znext && dom.contains(*znext) && f.sample(*znext).has_value();
        if (ok) {
            auto sn = f.sample(*znext);
            c.s.push_back(c.s.back() + step);
            c.z.push_back(*znext);
            c.phi.push_back(lift_near(sn->theta + off, c.phi.back()));
            if (c.s.back() >= max_len - 1e-15) {
                res.end = (opt.max_len > 0) ? TraceEnd::TargetLength : TraceEnd::MaxLength;
                return res;
            }
            continue;
        }
        // Bisect the step onto the boundary (or the field edge).
        double lo = 0.0, hi = step;
        cplx zlo = z;
        bool gap = false;
        for (int it = 0; it < 90 && (hi - lo) > 1e-13; ++it) {
            double mid = 0.5 * (lo + hi);
            auto zm = rk4_step(f, z, k, direction, mid);
            if (zm && dom.contains(*zm) && f.sample(*zm).has_value()) {
                lo = mid;
                zlo = *zm;
            } else {
                hi = mid;
                gap = zm && !f.sample(*zm).has_value() && dom.contains(*zm);
            }
        }
        if (lo > 0) {
            auto sl = f.sample(zlo);
            c.s.push_back(c.s.back() + lo);
            c.z.push_back(zlo);
            c.phi.push_back(lift_near((sl ? sl->theta : c.phi.back() - off) + off, c.phi.back()));
        }
        res.end = gap ? TraceEnd::FieldGap : TraceEnd::Boundary;
        return res;
    }
    res.end = (opt.max_len > 0) ? TraceEnd::TargetLength : TraceEnd::MaxLength;
    return res;
}

namespace {

// First crossing of two polylines in the order of the first one; returns the
// parameters on both curves.
std::optional<std::array<double, 2>> first_crossing(const Curve& p, const Curve& q) {
    for (int i = 0; i + 1 < p.size(); ++i) {
        cplx p1 = p.z[i], p2 = p.z[i + 1];
        for (int j = 0; j + 1 < q.size(); ++j) {
            cplx q1 = q.z[j], q2 = q.z[j + 1];
            double d1 = cross(p2 - p1, q1 - p1), d2 = cross(p2 - p1, q2 - p1);
            if ((d1 > 0) == (d2 > 0)) continue;
            double e1 = cross(q2 - q1, p1 - q1), e2 = cross(q2 - q1, p2 - q1);
            if ((e1 > 0) == (e2 > 0)) continue;
            double tq = d1 / (d1 - d2);
            double tp = e1 / (e1 - e2);
            return std::array<double, 2>{p.s[i] + tp * (p.s[i + 1] - p.s[i]),
                                         q.s[j] + tq * (q.s[j + 1] - q.s[j])};
        }
    }
    return std::nullopt;
}

}  // namespace

CharQuad extract_quad(const SolutionField& f, cplx z0, int i_index, double l, double eps,
                      const Domain& dom, double step) {
    CharQuad q;
    q.i_index = i_index;
    int j_index = 3 - i_index;
    TraceOptions o;
    o.step = step;

    o.max_len = l;
    auto ab = trace(f, z0, i_index, +1, dom, o);
    if (ab.end != TraceEnd::TargetLength) throw std::runtime_error("extract_quad: i-arc left the domain");
    q.ab = ab.curve;
    q.a = z0;
    q.b = ab.curve.end();

    o.max_len = eps;
    auto ac = trace(f, q.a, j_index, +1, dom, o);
    if (ac.end != TraceEnd::TargetLength)
        throw std::runtime_error("extract_quad: j-arc left the domain");
    q.ac = ac.curve;
    q.c = ac.curve.end();
    cplx d_equal_length;
    {
        auto bd_eps = trace(f, q.b, j_index, +1, dom, o);
        if (bd_eps.end != TraceEnd::TargetLength)
            throw std::runtime_error("extract_quad: j-arc left the domain");
        d_equal_length = bd_eps.curve.end();
    }

    // fourth side from c; the quad corner d is its crossing with the
    // j-characteristic through b
    o.max_len = 1.5 * l + 4 * eps;
    auto cd = trace(f, q.c, i_index, +1, dom, o);
    o.max_len = 3 * eps + 0.1 * l;
    auto bd = trace(f, q.b, j_index, +1, dom, o);
    auto hit = first_crossing(cd.curve, bd.curve);
    if (!hit) throw std::runtime_error("extract_quad: fourth side misses the j-arc through b");
    q.cd = cd.curve.subcurve(0.0, std::max((*hit)[0], cd.curve.s[1]));
    q.bd = bd.curve.subcurve(0.0, std::max((*hit)[1], bd.curve.s[1]));
    q.d = q.cd.end();

    // consistency of the equal-parameter corner with the traced quad
    double best = 1e300;
    for (int i = 0; i < q.cd.size(); ++i) best = std::min(best, std::abs(q.cd.z[i] - d_equal_length));
    q.closure_gap = best;
    if (best > 0.05 * eps) throw std::runtime_error("extract_quad: fourth side misses d");
    q.positively_oriented = cross(q.b - q.a, q.c - q.a) > 0;
    return q;
}

RatioReport quasi_hp_ratio(const CharQuad& q) {
    RatioReport r;
    r.dtheta_ac = q.ac.phi.back() - q.ac.phi.front();
    r.dtheta_bd = q.bd.phi.back() - q.bd.phi.front();
    const double zero = 1e-10;
    double na = std::fabs(r.dtheta_ac), nb = std::fabs(r.dtheta_bd);
    if (na < zero && nb < zero) {
        r.kind = RatioReport::Kind::BothZero;
        return r;
    }
    if (na < zero || nb < zero) {
        r.kind = RatioReport::Kind::OneZero;
        r.signs_agree = false;
        return r;
    }
    r.kind = RatioReport::Kind::Ratio;
    r.ratio = nb / na;
    r.signs_agree = (r.dtheta_ac > 0) == (r.dtheta_bd > 0);
    return r;
}

std::pair<double, double> blowup_residual(const SolutionField& f, cplx z, double h) {
    auto th = [&](cplx w, double ref) -> double {
        auto s = f.sample(w);
        if (!s) throw std::domain_error("blowup_residual: stencil left the field");
        return lift_near(s->theta, ref);
    };
    double th0 = th(z, 0.0);
    auto D = [&](cplx w, int k) -> double {
        double thw = th(w, th0);
        cplx dir = unit_dir(thw);
        if (k == 2) dir *= cplx(0, 1);
        return (th(w + h * dir, thw) - th(w - h * dir, thw)) / (2 * h);
    };
    double d1 = D(z, 1), d2 = D(z, 2);
    cplx e1 = unit_dir(th0), e2 = cplx(0, 1) * e1;
    double d2d1 = (D(z + h * e2, 1) - D(z - h * e2, 1)) / (2 * h);
    double d1d2 = (D(z + h * e1, 2) - D(z - h * e1, 2)) / (2 * h);
    return {d2d1 - d1 * d1, d1d2 + d2 * d2};
}

BoundAuditReport bound_audit(const std::vector<TaggedCurve>& net, double K, const SolutionField& f,
                             const Domain& dom, const BoundAuditOptions& opt) {
    BoundAuditReport rep;
    std::mt19937 rng(opt.seed);

    double area_union = 0.0, eta_den = 0.0, eta_prime_den = 0.0;

    for (const auto& tc : net) {
        const Curve& c = tc.curve;
        if (c.length() <= 0) continue;

        // (a)/(b): curvature times orthogonal half-characteristic length;
        // sample points are independent.
        int checked = 0, failed = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : checked, failed)
        for (int m = 1; m <= opt.samples_per_curve; ++m) {
            double at = c.length() * m / (opt.samples_per_curve + 1);
            auto ks = curvature_at(c, c.s.front() + at);
            if (ks.one_sided || std::fabs(ks.kappa) < opt.kappa_min) continue;
            cplx p = c.point_at(c.s.front() + at);
            if (!dom.contains(p)) continue;
            cplx concave_normal = cplx(0, 1) * unit_dir(c.phi_at(c.s.front() + at));
            if (ks.kappa < 0) concave_normal = -concave_normal;
            int j = 3 - tc.k;
            auto dplus = family_dir(f, p, j, +1);
            if (!dplus) continue;
            int direction = dot(*dplus, concave_normal) >= 0 ? +1 : -1;
            TraceOptions to;
            to.step = opt.trace_step;
            auto half = trace(f, p, j, direction, dom, to);
            if (half.end != TraceEnd::Boundary) continue;  // unbounded or gap: vacuous
            double product = std::fabs(ks.kappa) * half.curve.length();
            ++checked;
#pragma omp critical(bound_audit_worst)
            if (product > rep.worst_product) {
                rep.worst_product = product;
                rep.worst_product_at = p;
            }
            if (product > K * (1.0 + opt.tol_rel)) ++failed;
        }
        rep.product_checked += checked;
        rep.product_failed += failed;

        // (c): diameter of closed subarcs vs chord length.
        std::uniform_real_distribution<double> U(0.05, 0.95);
        for (int t = 0; t < opt.diam_subarcs; ++t) {
            double u1 = U(rng) * c.length(), u2 = U(rng) * c.length();
            if (std::fabs(u1 - u2) < 0.05 * c.length()) continue;
            double sa = c.s.front() + std::min(u1, u2), sb = c.s.front() + std::max(u1, u2);
            cplx A = c.point_at(sa), B = c.point_at(sb);
            double chord = std::abs(B - A);
            if (chord < 1e-12) continue;
            // hypothesis filter: chord inside the domain, no interior crossing
            bool ok = true;
            for (int q = 1; q < 24 && ok; ++q) {
                cplx pt = A + (double(q) / 24) * (B - A);
                if (!dom.contains(pt)) ok = false;
            }
            if (ok) {
                int crossings = 0;
                for (int i = 0; i + 1 < c.size() && crossings == 0; ++i) {
                    if (c.s[i + 1] < sa + 1e-9 || c.s[i] > sb - 1e-9) continue;
                    cplx p1 = c.z[i] - A, p2 = c.z[i + 1] - A, dr = B - A;
                    double c1 = cross(dr, p1), c2 = cross(dr, p2);
                    if ((c1 > 0) != (c2 > 0)) {
                        double tt = c1 / (c1 - c2);
                        double proj = dot(p1 + tt * (p2 - p1), dr) / dot(dr, dr);
                        if (proj > 1e-3 && proj < 1.0 - 1e-3 && c.s[i] > sa + 0.02 * (sb - sa) &&
                            c.s[i] < sb - 0.02 * (sb - sa))
                            ++crossings;
                    }
                }
                if (crossings > 0) ok = false;
            }
            if (!ok) continue;
            double diam = 0.0;
            const int sub = 64;
            std::vector<cplx> pts(sub);
            for (int q = 0; q < sub; ++q) pts[q] = c.point_at(sa + (sb - sa) * q / (sub - 1.0));
            for (int q = 0; q < sub; ++q)
                for (int w = q + 1; w < sub; ++w) diam = std::max(diam, std::abs(pts[q] - pts[w]));
            ++rep.diam_checked;
            double ratio = diam / chord;
            rep.worst_diam_ratio = std::max(rep.worst_diam_ratio, ratio);
            if (diam > 5.0 * chord * 1.01) ++rep.diam_failed;
        }

        // (d): measured area of a union of orthogonal arcs through the curve.
        if (tc.k == 1 && c.length() > 0) {
            double lam_j = 0.25 * c.length();
            double cell = std::max(1e-6, lam_j / 24.0);
            std::set<std::pair<long, long>> boxes;
            int nsamp = 60;
            for (int m = 0; m < nsamp; ++m) {
                double at = c.s.front() + c.length() * (m + 0.5) / nsamp;
                cplx p = c.point_at(at);
                if (!dom.contains(p)) continue;
                for (int direction : {+1, -1}) {
                    TraceOptions to;
                    to.step = opt.trace_step;
                    to.max_len = 0.5 * lam_j;
                    auto arm = trace(f, p, 3 - tc.k, direction, dom, to);
                    for (const auto& zpt : arm.curve.z)
                        boxes.insert({long(std::floor(zpt.real() / cell)),
                                      long(std::floor(zpt.imag() / cell))});
                }
            }
            area_union += double(boxes.size()) * cell * cell;
            eta_den += c.length() * lam_j;
            eta_prime_den += lam_j * lam_j * std::fabs(c.phi.back() - c.phi.front());
        }
    }
    rep.eta_measured = eta_den > 0 ? area_union / eta_den : 0.0;
    rep.eta_prime_measured = eta_prime_den > 0 ? area_union / eta_prime_den : 0.0;
    return rep;
}

std::vector<double> default_sector_scales(double r0) {
    std::vector<double> s(6);
    for (int i = 0; i < 6; ++i, r0 *= 0.5) s[i] = r0;
    return s;
}

BoundaryClassification classify_boundary_point(const SolutionField& f, cplx p,
                                               const std::vector<double>& scales, double delta1,
                                               double reg_tol) {
    if (scales.size() < 3)
        throw std::invalid_argument("classify_boundary_point: need at least 3 scales");
    BoundaryClassification out;
    std::vector<double> sorted = scales;
    std::sort(sorted.rbegin(), sorted.rend());

    for (double r : sorted) {
        double lo = 1e300, hi = -1e300;
        double ref = 0.0;
        bool have_ref = false;
        const int na = 24, nr = 10;
        for (int ia = 0; ia < na; ++ia) {
            double ang = delta1 + (PI - 2 * delta1) * (ia + 0.5) / na;
            for (int ir = 0; ir < nr; ++ir) {
                double rad = r * std::pow(0.5, double(ir) / 2.0);
                auto s = f.sample(p + rad * unit_dir(ang));
                if (!s) continue;
                double th = have_ref ? lift_near(s->theta, ref) : s->theta;
                ref = th;
                have_ref = true;
                lo = std::min(lo, th);
                hi = std::max(hi, th);
            }
        }
        out.oscillation.push_back(have_ref ? hi - lo : 0.0);
    }
    out.final_oscillation = out.oscillation.back();
    if (out.final_oscillation < reg_tol) {
        out.label = BoundaryLabel::Regular;
        return out;
    }

    // Singular: probe whether a characteristic of each family reaches p.
    double r_probe = sorted.back();
    Domain local = Domain::disk(p, 4 * r_probe);
    bool reaches[3] = {false, false, false};
    double tail_osc[3] = {0, 0, 0};
    for (int k : {1, 2}) {
        for (int m = 1; m <= 6 && !reaches[k]; ++m) {
            cplx seed = p + r_probe * unit_dir(delta1 + (PI - 2 * delta1) * m / 7.0);
            if (!f.sample(seed)) continue;
            for (int direction : {+1, -1}) {
                TraceOptions to;
                to.step = r_probe / 200.0;
                auto tr = trace(f, seed, k, direction, local, to);
                if (tr.end != TraceEnd::Boundary && tr.end != TraceEnd::FieldGap) continue;
                if (std::abs(tr.curve.end() - p) < 0.05 * r_probe) {
                    reaches[k] = true;
                    double L = tr.curve.length();
                    if (L > 0) {
                        double a0 = tr.curve.phi_at(tr.curve.s.front() + 0.9 * L);
                        double mn = a0, mx = a0;
                        for (int q = 0; q < 16; ++q) {
                            double v = tr.curve.phi_at(tr.curve.s.front() + L * (0.9 + 0.1 * q / 15.0));
                            mn = std::min(mn, v);
                            mx = std::max(mx, v);
                        }
                        tail_osc[k] = mx - mn;
                    }
                    break;
                }
            }
        }
    }
    if (!reaches[1])
        out.label = BoundaryLabel::ISingularity1;
    else if (!reaches[2])
        out.label = BoundaryLabel::ISingularity2;
    else
        out.label = (std::max(tail_osc[1], tail_osc[2]) < reg_tol) ? BoundaryLabel::Type0
                                                                   : BoundaryLabel::Type1;
    return out;
}

GridField::GridField(const NormalSystem& sys, CharGrid grid) : sys_(sys), grid_(std::move(grid)) {
    // Bin size: a few median cell diagonals.
    std::vector<double> diags;
    int n1 = grid_.n1(), n2 = grid_.n2();
    for (int i = 0; i + 1 < n1; i += std::max(1, n1 / 50))
        for (int j = 0; j + 1 < n2; j += std::max(1, n2 / 50))
            if (grid_.st(i, j) == NodeStatus::Valid && grid_.st(i + 1, j + 1) == NodeStatus::Valid)
                diags.push_back(std::abs(grid_.at(i + 1, j + 1) - grid_.at(i, j)));
    if (diags.empty()) throw std::invalid_argument("GridField: grid has no valid cells");
    std::nth_element(diags.begin(), diags.begin() + diags.size() / 2, diags.end());
    bin_ = 2.0 * diags[diags.size() / 2];
    for (int i = 0; i + 1 < n1; ++i)
        for (int j = 0; j + 1 < n2; ++j) {
            if (grid_.st(i, j) != NodeStatus::Valid || grid_.st(i + 1, j) != NodeStatus::Valid ||
                grid_.st(i, j + 1) != NodeStatus::Valid || grid_.st(i + 1, j + 1) != NodeStatus::Valid)
                continue;
            insert_cell(i * (n2 - 1) + j);
        }
}

void GridField::insert_cell(int ci) {
    int n2 = grid_.n2();
    int i = ci / (n2 - 1), j = ci % (n2 - 1);
    cplx p[4] = {grid_.at(i, j), grid_.at(i + 1, j), grid_.at(i, j + 1), grid_.at(i + 1, j + 1)};
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (auto& q : p) {
        x0 = std::min(x0, q.real());
        x1 = std::max(x1, q.real());
        y0 = std::min(y0, q.imag());
        y1 = std::max(y1, q.imag());
    }
    for (long bx = long(std::floor(x0 / bin_)); bx <= long(std::floor(x1 / bin_)); ++bx)
        for (long by = long(std::floor(y0 / bin_)); by <= long(std::floor(y1 / bin_)); ++by)
            bins_[(bx << 24) ^ (by & 0xffffff)].push_back(ci);
}

std::optional<FieldSample> GridField::sample(cplx z) const {
    long bx = long(std::floor(z.real() / bin_)), by = long(std::floor(z.imag() / bin_));
    auto it = bins_.find((bx << 24) ^ (by & 0xffffff));
    if (it == bins_.end()) return std::nullopt;
    int n2 = grid_.n2();
    for (int ci : it->second) {
        int i = ci / (n2 - 1), j = ci % (n2 - 1);
        cplx z00 = grid_.at(i, j), z10 = grid_.at(i + 1, j), z01 = grid_.at(i, j + 1),
             z11 = grid_.at(i + 1, j + 1);
        // invert z(u,w) = (1-u)(1-w)z00 + u(1-w)z10 + (1-u)w z01 + uw z11
        double u = 0.5, w = 0.5;
        bool good = false;
        for (int iter = 0; iter < 20; ++iter) {
            cplx F = (1 - u) * (1 - w) * z00 + u * (1 - w) * z10 + (1 - u) * w * z01 + u * w * z11 - z;
            if (std::abs(F) < 1e-12 * (1 + std::abs(z))) {
                good = true;
                break;
            }
            cplx Fu = -(1 - w) * z00 + (1 - w) * z10 - w * z01 + w * z11;
            cplx Fw = -(1 - u) * z00 - u * z10 + (1 - u) * z01 + u * z11;
            double det = cross(Fu, Fw);
            if (std::fabs(det) < 1e-30) break;
            double du = -cross(F, Fw) / det;
            double dw = -cross(Fu, F) / det;
            u += du;
            w += dw;
            if (u < -0.5 || u > 1.5 || w < -0.5 || w > 1.5) break;
            if (std::fabs(du) + std::fabs(dw) < 1e-14) {
                good = true;
                break;
            }
        }
        const double slack = 1e-9;
        if (!good || u < -slack || u > 1 + slack || w < -slack || w > 1 + slack) continue;
        double uu = std::clamp(u, 0.0, 1.0), ww = std::clamp(w, 0.0, 1.0);
        InvariantPair R{grid_.r1_of_t2[j] * (1 - ww) + grid_.r1_of_t2[j + 1] * ww,
                        grid_.r2_of_t1[i] * (1 - uu) + grid_.r2_of_t1[i + 1] * uu};
        return FieldSample{R, sys_.theta(R)};
    }
    return std::nullopt;
}

CurveProfileField::CurveProfileField(const NormalSystem& sys, Curve c,
                                     std::vector<InvariantPair> profile, double capture)
    : sys_(sys), c_(std::move(c)), profile_(std::move(profile)), capture_(capture) {
    if (static_cast<int>(profile_.size()) != c_.size())
        throw std::invalid_argument("CurveProfileField: profile size mismatch");
    bin_ = 4 * capture_;
    for (int i = 0; i < c_.size(); ++i) {
        long bx = long(std::floor(c_.z[i].real() / bin_)), by = long(std::floor(c_.z[i].imag() / bin_));
        bins_[(bx << 24) ^ (by & 0xffffff)].push_back(i);
    }
}

std::optional<FieldSample> CurveProfileField::sample(cplx z) const {
    long bx = long(std::floor(z.real() / bin_)), by = long(std::floor(z.imag() / bin_));
    int best = -1;
    double bd = capture_;
    for (long dx = -1; dx <= 1; ++dx)
        for (long dy = -1; dy <= 1; ++dy) {
            auto it = bins_.find(((bx + dx) << 24) ^ ((by + dy) & 0xffffff));
            if (it == bins_.end()) continue;
            for (int i : it->second) {
                double d = std::abs(c_.z[i] - z);
                if (d < bd) {
                    bd = d;
                    best = i;
                }
            }
        }
    if (best < 0) return std::nullopt;
    return FieldSample{profile_[best], sys_.theta(profile_[best])};
}

}  // namespace hpnet

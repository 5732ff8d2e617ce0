#include "hpnet/goursat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpnet {

namespace {

// Snap offset = phi(0) - theta(corner) to the nearest admissible multiple.
// For a 1-arc the tangent is +-e^{i theta} (offset multiple of pi); for a
// 2-arc +-i e^{i theta} (offset odd multiple of pi/2).  Returns the snapped
// offset; defect must stay below 1e-8.
double snap_offset(double raw, int fixed_index) {
    double grid = PI;
    double base = (fixed_index == 1) ? 0.0 : PI / 2;
    double k = std::round((raw - base) / grid);
    double snapped = base + k * grid;
    if (std::fabs(raw - snapped) > 1e-8)
        throw std::domain_error("corner value not admissible: tangent/inclination mismatch");
    return snapped;
}

}  // namespace

std::vector<double> edge_invariant_profile(const NormalSystem& sys, const Curve& c,
                                           InvariantPair corner, int fixed_index) {
    if (fixed_index != 1 && fixed_index != 2)
        throw std::invalid_argument("edge_invariant_profile: fixed_index must be 1 or 2");
    double theta_c = sys.theta(corner);
    double off = snap_offset(c.phi.front() - theta_c, fixed_index);
    double jump_cap = (PI / 2) / sys.lower_bound_A();
    std::vector<double> out(c.size());
    out[0] = (fixed_index == 1) ? corner.r2 : corner.r1;
    double prev = out[0];
    for (int i = 1; i < c.size(); ++i) {
        double target = c.phi[i] - off;
        double v = (fixed_index == 1) ? sys.solve_r2(corner.r1, target, prev)
                                      : sys.solve_r1(target, corner.r2, prev);
        if (std::fabs(v - prev) > jump_cap)
            throw std::runtime_error("edge_invariant_profile: branch jump, sampling too coarse");
        out[i] = v;
        prev = v;
    }
    return out;
}

namespace {

CharGrid solve_impl(const NormalSystem& sys, const Curve& c1, const Curve& c2, InvariantPair corner,
                    const GoursatOptions& opts, bool parallel) {
    if (std::abs(c1.start() - c2.start()) > 1e-9)
        throw std::invalid_argument("solve_goursat: initial curves must share their start point");
    double ortho = wrap_pi(c2.phi.front() - c1.phi.front());
    double defect = std::fmod(std::fabs(ortho), PI) - PI / 2;
    if (std::fabs(defect) > 1e-6)
        throw std::invalid_argument("solve_goursat: initial tangents not orthogonal at the corner");

    double theta_c = sys.theta(corner);
    double off1 = snap_offset(c1.phi.front() - theta_c, 1);
    double off2 = snap_offset(c2.phi.front() - theta_c, 2);
    int sign1 = (wrap_pi(off1) > -PI / 2 && wrap_pi(off1) <= PI / 2) ? 1 : -1;  // e^{i off1} = +-1
    int sign2 = (wrap_pi(off2) > 0) ? 1 : -1;                                   // e^{i off2} = +-i

    Curve a1 = c1, a2 = c2;
    if (opts.t1_cap > 0 && opts.t1_cap < a1.length()) a1 = a1.subcurve(0.0, opts.t1_cap);
    if (opts.t2_cap > 0 && opts.t2_cap < a2.length()) a2 = a2.subcurve(0.0, opts.t2_cap);

    CharGrid g;
    g.sign1 = sign1;
    g.sign2 = sign2;
    g.t1 = a1.s;
    g.t2 = a2.s;
    for (auto& v : g.t1) v -= a1.s.front();
    for (auto& v : g.t2) v -= a2.s.front();
    int n1 = g.n1(), n2 = g.n2();
    g.r2_of_t1 = edge_invariant_profile(sys, a1, corner, 1);
    g.r1_of_t2 = edge_invariant_profile(sys, a2, corner, 2);

    g.zeta.assign(size_t(n1) * n2, cplx(0, 0));
    g.status.assign(size_t(n1) * n2, NodeStatus::Unreached);
    g.thetabar.resize(size_t(n1) * n2);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            g.thetabar[i * n2 + j] = sys.theta({g.r1_of_t2[j], g.r2_of_t1[i]});

    for (int i = 0; i < n1; ++i) {
        g.zeta[i * n2 + 0] = a1.z[i];
        g.status[i * n2 + 0] = NodeStatus::Valid;
    }
    for (int j = 0; j < n2; ++j) {
        g.zeta[0 * n2 + j] = a2.z[j];
        g.status[0 * n2 + j] = NodeStatus::Valid;
    }

    // Fold tolerance from the median initial cell area.
    auto median_step = [](const std::vector<double>& t) {
        std::vector<double> d(t.size() - 1);
        for (size_t i = 0; i + 1 < t.size(); ++i) d[i] = t[i + 1] - t[i];
        std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
        return d[d.size() / 2];
    };
    double fold_tol = opts.fold_tol_rel * median_step(g.t1) * median_step(g.t2);

    // Per-node update.  Each node depends only on its west and south
    // neighbors, so any sweep that respects those two edges gives the same
    // bits; the parallel path runs a block wavefront over row-major tiles.
    int folds = 0;
    bool degenerate = false;
    auto update_node = [&](int i, int j, int& local_folds) {
        cplx zA1 = g.zeta[(i - 1) * n2 + j];
        cplx zA2 = g.zeta[i * n2 + (j - 1)];
        NodeStatus s1 = g.status[(i - 1) * n2 + j];
        NodeStatus s2 = g.status[i * n2 + (j - 1)];
        if (s1 != NodeStatus::Valid || s2 != NodeStatus::Valid) return;
        double thX = g.thetabar[i * n2 + j];
        cplx u = double(sign1) * unit_dir(0.5 * (g.thetabar[(i - 1) * n2 + j] + thX));
        cplx v = double(sign2) * (cplx(0, 1) * unit_dir(0.5 * (g.thetabar[i * n2 + (j - 1)] + thX)));
        cplx rhs = zA2 - zA1;
        double det = -u.real() * v.imag() + v.real() * u.imag();
        if (std::fabs(det) < 1e-12) {
#pragma omp atomic write
            degenerate = true;
            return;
        }
        double a = (-rhs.real() * v.imag() + v.real() * rhs.imag()) / det;
        double b = (u.real() * rhs.imag() - u.imag() * rhs.real()) / det;
        cplx X = zA1 + a * u;
        double area = cross(X - zA1, X - zA2) * sign1 * sign2;
        if (a <= 0 || b <= 0 || area <= fold_tol) {
            g.status[i * n2 + j] = NodeStatus::Folded;
            ++local_folds;
        } else {
            g.status[i * n2 + j] = NodeStatus::Valid;
        }
        g.zeta[i * n2 + j] = X;
    };

    if (!parallel) {
        int local = 0;
        for (int i = 1; i < n1; ++i)
            for (int j = 1; j < n2; ++j) update_node(i, j, local);
        folds = local;
    } else {
        const int B = 128;
        int nb1 = (n1 - 2) / B + 1, nb2 = (n2 - 2) / B + 1;
        for (int bd = 0; bd <= (nb1 - 1) + (nb2 - 1); ++bd) {
            int blo = std::max(0, bd - (nb2 - 1));
            int bhi = std::min(nb1 - 1, bd);
            int local = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : local)
            for (int bi = blo; bi <= bhi; ++bi) {
                int bj = bd - bi;
                int i1 = 1 + bi * B, i2 = std::min(n1, i1 + B);
                int j1 = 1 + bj * B, j2 = std::min(n2, j1 + B);
                for (int i = i1; i < i2; ++i)
                    for (int j = j1; j < j2; ++j) update_node(i, j, local);
            }
            folds += local;
        }
    }
    if (degenerate)
        throw std::runtime_error("solve_goursat: degenerate cell (inclination data corrupt)");
    g.folds = folds;
    return g;
}

}  // namespace

CharGrid solve_goursat(const NormalSystem& sys, const Curve& c1, const Curve& c2,
                       InvariantPair corner, const GoursatOptions& opts) {
    return solve_impl(sys, c1, c2, corner, opts, opts.parallel);
}

CharGrid solve_goursat_serial(const NormalSystem& sys, const Curve& c1, const Curve& c2,
                              InvariantPair corner, const GoursatOptions& opts) {
    return solve_impl(sys, c1, c2, corner, opts, false);
}

Curve parallel_extension(const Curve& c, double r) {
    Curve out;
    int n = c.size();
    out.s.resize(n);
    out.z.resize(n);
    out.phi.resize(n);
    out.s[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        out.z[i] = c.z[i] + r * cplx(0, 1) * unit_dir(c.phi[i]);
        out.phi[i] = c.phi[i];
    }
    for (int i = 0; i + 1 < n; ++i) {
        double ds = c.s[i + 1] - c.s[i];
        double kappa = (c.phi[i + 1] - c.phi[i]) / ds;
        double speed = 1.0 - r * kappa;
        if (speed <= 1e-12)
            throw std::domain_error("parallel_extension: fold (offset reaches the center of curvature)");
        out.s[i + 1] = out.s[i] + speed * ds;
    }
    return out;
}

double grid_min_jacobian(const CharGrid& g) {
    int n1 = g.n1(), n2 = g.n2();
    if (n1 < 2 || n2 < 2) throw std::invalid_argument("grid_min_jacobian: no interior cell");
    double mn = 1e300;
    for (int i = 0; i + 1 < n1; ++i)
        for (int j = 0; j + 1 < n2; ++j) {
            if (g.st(i, j) != NodeStatus::Valid || g.st(i + 1, j) != NodeStatus::Valid ||
                g.st(i, j + 1) != NodeStatus::Valid || g.st(i + 1, j + 1) != NodeStatus::Valid)
                continue;
            double area = cross(g.at(i + 1, j) - g.at(i, j), g.at(i, j + 1) - g.at(i, j)) *
                          g.sign1 * g.sign2;
            mn = std::min(mn, area);
        }
    return mn;
}

Curve grid_char_curve(const CharGrid& g, int family, int index) {
    Curve c;
    auto push = [&](cplx z, double th) {
        if (c.z.empty()) {
            c.s.push_back(0.0);
        } else {
            double d = std::abs(z - c.z.back());
            if (d <= 0) return;
            c.s.push_back(c.s.back() + d);
        }
        c.z.push_back(z);
        c.phi.push_back(th);
    };
    if (family == 1) {
        int j = index;
        for (int i = 0; i < g.n1(); ++i) {
            if (g.st(i, j) != NodeStatus::Valid) break;
            push(g.at(i, j), g.theta_at(i, j) + (g.sign1 > 0 ? 0.0 : PI));
        }
    } else {
        int i = index;
        for (int j = 0; j < g.n2(); ++j) {
            if (g.st(i, j) != NodeStatus::Valid) break;
            push(g.at(i, j), g.theta_at(i, j) + (g.sign2 > 0 ? PI / 2 : -PI / 2));
        }
    }
    if (c.size() < 2) throw std::runtime_error("grid_char_curve: line has fewer than two valid nodes");
    return c;
}

}  // namespace hpnet

#include "doctest.h"
#include "hpnet/goursat.hpp"
#include "hpnet/net_analysis.hpp"
#include "hpnet/oracles.hpp"

using namespace hpnet;

namespace {

struct SpiralFixture {
    SpiralField field{SpiralParams::from_asymmetry(1.5)};
    NormalSystem sys = NormalSystem::cps(2.0, 0.5);
    double L1 = 1.0, L2 = 0.8;

    Curve c1(double ds) const { return field.characteristic(1.0, 0.0, 1, L1, ds); }
    Curve c2(double ds) const { return field.characteristic(1.0, 0.0, 2, L2, ds); }
    InvariantPair corner() const { return field.invariants({1.0, 0.0}); }

    // exact node of the characteristic net at parameters (t1, t2)
    cplx oracle_node(double t1, double t2) const {
        const auto& p = field.params();
        double rq = 1.0 + t1 * std::cos(p.alpha);
        double psiq = p.m2 * std::log(rq);
        double rp = 1.0 - t2 * std::sin(p.alpha);
        double psip = -p.m1 * std::log(rp);
        auto [r, psi] = field.node_polar(rp, psip, rq, psiq);
        return r * unit_dir(psi);
    }
};

}  // namespace

TEST_CASE("edge profiles: straight data gives a constant profile") {
    auto sys = NormalSystem::cps(2.0, 1.0);
    Curve seg = arc_piece({0, 0}, 0.25, 0.0, 1.0, 1e-3);
    InvariantPair corner{0.4, sys.solve_r2(0.4, 0.25, 0.0)};
    auto prof = edge_invariant_profile(sys, seg, corner, 1);
    for (double v : prof) CHECK(v == doctest::Approx(corner.r2).epsilon(1e-12));
}

TEST_CASE("edge profiles: circular data gives the closed-form slope") {
    auto sys = NormalSystem::cps(2.0, 1.0);
    double r = 2.0;
    Curve arc = arc_piece({0, 0}, 0.1, 1.0 / r, 1.5, 1e-3);
    InvariantPair corner{0.0, sys.solve_r2(0.0, 0.1, 0.0)};
    auto prof = edge_invariant_profile(sys, arc, corner, 1);
    double slope = (prof.back() - prof.front()) / arc.length();
    CHECK(slope == doctest::Approx(-3.0 / r).epsilon(1e-10));
}

TEST_CASE("edge profiles: corner mismatch is rejected") {
    auto sys = NormalSystem::cps(2.0, 1.0);
    Curve seg = arc_piece({0, 0}, 0.25, 0.0, 1.0, 1e-3);
    InvariantPair wrong{0.4, sys.solve_r2(0.4, 0.7, 0.0)};
    CHECK_THROWS_AS((void)edge_invariant_profile(sys, seg, wrong, 1), std::domain_error);
}

TEST_CASE("constant solution reproduces the translated rectangle exactly") {
    auto sys = NormalSystem::cps(2.0, 1.0);
    double th = 0.3;
    cplx z0{0.2, -0.1};
    Curve c1 = arc_piece(z0, th, 0.0, 1.0, 1.0 / 60);
    Curve c2 = arc_piece(z0, th + PI / 2, 0.0, 0.8, 0.8 / 50);
    InvariantPair corner{0.0, sys.solve_r2(0.0, th, 0.0)};
    CharGrid g = solve_goursat(sys, c1, c2, corner);
    CHECK(g.folds == 0);
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j) {
            cplx want = c1.z[i] + c2.z[j] - z0;
            CHECK(std::abs(g.at(i, j) - want) < 1e-12);
        }
    CHECK(grid_min_jacobian(g) ==
          doctest::Approx((1.0 / 60) * (0.8 / 50)).epsilon(1e-9));
}

TEST_CASE("spiral solve converges at second order") {
    SpiralFixture fx;
    std::vector<double> errs;
    for (double ds : {fx.L1 / 24, fx.L1 / 48, fx.L1 / 96}) {
        Curve c1 = fx.c1(ds), c2 = fx.c2(ds * fx.L2 / fx.L1);
        CharGrid g = solve_goursat(fx.sys, c1, c2, fx.corner());
        REQUIRE(g.folds == 0);
        CHECK(grid_min_jacobian(g) > 0.0);
        double err = 0.0;
        for (int i = 0; i < g.n1(); ++i)
            for (int j = 0; j < g.n2(); ++j)
                err = std::max(err, std::abs(g.at(i, j) - fx.oracle_node(g.t1[i], g.t2[j])));
        errs.push_back(err);
    }
    double s1 = std::log2(errs[0] / errs[1]);
    double s2 = std::log2(errs[1] / errs[2]);
    CHECK(s1 > 1.7);
    CHECK(s1 < 2.3);
    CHECK(s2 > 1.7);
    CHECK(s2 < 2.3);
}

TEST_CASE("grid invariants depend only on the correct coordinate") {
    SpiralFixture fx;
    Curve c1 = fx.c1(0.01), c2 = fx.c2(0.01);
    CharGrid g = solve_goursat(fx.sys, c1, c2, fx.corner());
    // stored once per row/column by construction; spot-check against the oracle
    for (int j = 0; j < g.n2(); j += 10) {
        InvariantPair want = fx.field.invariants(g.at(0, j));
        CHECK(g.r1_of_t2[j] == doctest::Approx(want.r1).epsilon(1e-7));
    }
    for (int i = 0; i < g.n1(); i += 10) {
        InvariantPair want = fx.field.invariants(g.at(i, 0));
        CHECK(g.r2_of_t1[i] == doctest::Approx(want.r2).epsilon(1e-7));
    }
}

TEST_CASE("grid edge directions and orthogonality") {
    SpiralFixture fx;
    Curve c1 = fx.c1(0.01), c2 = fx.c2(0.01);
    CharGrid g = solve_goursat(fx.sys, c1, c2, fx.corner());
    for (int i = 1; i + 1 < g.n1(); i += 7)
        for (int j = 1; j + 1 < g.n2(); j += 7) {
            cplx e1 = g.at(i + 1, j) - g.at(i, j);
            cplx e2 = g.at(i, j + 1) - g.at(i, j);
            double want1 = 0.5 * (g.theta_at(i, j) + g.theta_at(i + 1, j));
            CHECK(std::fabs(wrap_pi(std::arg(e1) - want1)) < 0.01);
            double ang = std::fabs(wrap_pi(std::arg(e2) - std::arg(e1)));
            CHECK(ang == doctest::Approx(PI / 2).epsilon(0.02 / (PI / 2)));
        }
}

TEST_CASE("curvature blow-up folds the grid at the expected depth") {
    auto sys = NormalSystem::cps(2.0, 1.0);  // K = 2
    double kappa = 1.0;
    Curve c1 = arc_piece({0, 0}, 0.0, kappa, 1.0, 1.0 / 80);
    Curve c2 = arc_piece({0, 0}, PI / 2, 0.0, 1.5 * 2.0 / kappa, 3.0 / 150);
    InvariantPair corner{0.0, sys.solve_r2(0.0, 0.0, 0.0)};
    CharGrid g = solve_goursat(sys, c1, c2, corner);
    CHECK(g.folds > 0);
    double first_fold_t2 = 1e300;
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j)
            if (g.st(i, j) == NodeStatus::Folded) {
                first_fold_t2 = std::min(first_fold_t2, g.t2[j]);
                break;
            }
    CHECK(first_fold_t2 <= 1.1 * 2.0 / kappa);   // within the length bound
    CHECK(first_fold_t2 >= 0.8 / kappa);         // not spuriously early
    CHECK(grid_min_jacobian(g) > 0.0);
}

TEST_CASE("parallel extension of circles and segments") {
    Curve ccw = arc_piece({3, 0}, PI / 2, 1.0 / 3.0, 4.0, 1e-3);  // radius 3 about origin
    Curve grown = parallel_extension(ccw, -1.0);
    for (int i = 0; i < grown.size(); i += 100) CHECK(std::abs(grown.z[i]) == doctest::Approx(4.0));
    CHECK(grown.length() == doctest::Approx(4.0 * 4.0 / 3.0).epsilon(1e-9));
    CHECK_THROWS_AS((void)parallel_extension(ccw, 3.0), std::domain_error);

    Curve seg = arc_piece({0, 0}, 0.4, 0.0, 2.0, 1e-3);
    Curve shifted = parallel_extension(seg, 0.7);
    CHECK(std::abs(shifted.start() - (seg.start() + 0.7 * cplx(0, 1) * unit_dir(0.4))) < 1e-12);
    CHECK(shifted.length() == doctest::Approx(2.0));
}

TEST_CASE("parallel sweep equals the serial reference bit for bit") {
    SpiralFixture fx;
    Curve c1 = fx.c1(0.004), c2 = fx.c2(0.004);
    GoursatOptions opts;
    opts.parallel = true;
    CharGrid a = solve_goursat(fx.sys, c1, c2, fx.corner(), opts);
    CharGrid b = solve_goursat_serial(fx.sys, c1, c2, fx.corner(), opts);
    REQUIRE(a.zeta.size() == b.zeta.size());
    for (size_t i = 0; i < a.zeta.size(); ++i) {
        CHECK(a.zeta[i].real() == b.zeta[i].real());
        CHECK(a.zeta[i].imag() == b.zeta[i].imag());
    }
}

TEST_CASE("length change estimate on fine-grid quadrilaterals") {
    SpiralFixture fx;
    Curve c1 = fx.c1(0.004), c2 = fx.c2(0.004);
    CharGrid g = solve_goursat(fx.sys, c1, c2, fx.corner());
    // |d - c| = |b - a| - eps * dtheta(ab) + E, with E shrinking at the
    // combined order when the quad is scaled down dyadically
    int i0 = 40, j0 = 30;
    std::vector<double> E;
    for (int scale : {32, 16, 8}) {
        int p = scale, q = scale;
        cplx a = g.at(i0, j0), b = g.at(i0 + p, j0), c = g.at(i0, j0 + q), d = g.at(i0 + p, j0 + q);
        double l = std::abs(b - a), eps = std::abs(c - a);
        double dtheta = g.theta_at(i0 + p, j0) - g.theta_at(i0, j0);
        E.push_back(std::fabs(std::abs(d - c) - (l - eps * dtheta)));
    }
    double s1 = std::log2(E[0] / E[1]), s2 = std::log2(E[1] / E[2]);
    // e ~ l here, so the bound C*(eps^2 + l^3) behaves like l^2
    CHECK(s1 > 1.6);
    CHECK(s2 > 1.6);
    CHECK(E[2] < 1e-5);
}

TEST_CASE("length monotonicity away from the concave side") {
    auto sys = NormalSystem::cps(2.0, 1.0);
    // 1-side curves away from the sweep direction: translated edges must not shrink
    Curve c1 = arc_piece({0, 0}, 0.0, -0.5, 1.0, 1.0 / 120);
    Curve c2 = arc_piece({0, 0}, PI / 2, 0.0, 1.2, 1.2 / 100);
    InvariantPair corner{0.0, sys.solve_r2(0.0, 0.0, 0.0)};
    CharGrid g = solve_goursat(sys, c1, c2, corner);
    REQUIRE(g.folds == 0);
    double prev = 0.0;
    for (int j = 0; j < g.n2(); j += 5) {
        double len = 0.0;
        for (int i = 0; i + 1 < g.n1(); ++i) len += std::abs(g.at(i + 1, j) - g.at(i, j));
        if (j > 0) CHECK(len >= prev * (1.0 - 1e-3));
        prev = len;
    }
}

TEST_CASE("blow-up stencil outside the backing grid is rejected") {
    SpiralFixture fx;
    Curve c1 = fx.c1(0.01), c2 = fx.c2(0.01);
    GridField gf(fx.sys, solve_goursat(fx.sys, c1, c2, fx.corner()));
    cplx near_edge = gf.grid().at(1, 1);
    CHECK_THROWS_AS((void)blowup_residual(gf, near_edge, 0.5), std::domain_error);
}

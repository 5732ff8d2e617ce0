#include "doctest.h"
#include "hpnet/curves.hpp"

using namespace hpnet;

namespace {

Curve cap_fixture(double eps) {
    const double rc = 0.55, lcap = 0.12;
    double ds = default_ds(2 * lcap + rc * (PI + 2 * eps));
    Curve r = concat(concat(arc_piece({0, 0}, PI / 2 + eps, 0.0, lcap, ds),
                            arc_piece({0, 0}, PI / 2 + eps, -1.0 / rc, rc * (PI + 2 * eps), ds)),
                     arc_piece({0, 0}, -(PI / 2 + eps), 0.0, lcap, ds));
    double xs = rc * std::cos(eps) - lcap * std::sin(eps);
    return r.translated(cplx(-xs, -eps) - r.start());
}

}  // namespace

TEST_CASE("mollifier integrates to one") {
    CHECK(std::fabs(mollifier_integral_check() - 1.0) < 1e-10);
    CHECK(mollifier(0.99) > 0);
    CHECK(mollifier(1.01) == 0.0);
    CHECK(mollifier(-1.0) == 0.0);
}

TEST_CASE("curve health of a built arc") {
    Curve c = arc_piece({1, 2}, 0.3, 0.7, 2.0, 1e-3);
    auto h = curve_health(c);
    CHECK(h.worst_speed > 0.999);
    CHECK(h.worst_lift_step < PI / 2);
    CHECK(h.reintegrate_error < 1e-6 * c.length());
}

TEST_CASE("tail adjunction keeps a straight line straight") {
    Curve z = arc_piece({0, 0}, 0.0, 0.0, 1.2, 1e-3);
    Curve w = adjoin_smooth_tail(z, 0.6, 0.2, 0.0, 0.0);
    CHECK(w.length() == doctest::Approx(1.0));
    for (int i = 0; i < w.size(); ++i) {
        CHECK(std::fabs(w.phi[i]) < 1e-12);
        CHECK(std::fabs(w.z[i].imag()) < 1e-12);
    }
    CHECK(w.end().real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tail adjunction hits the target angle exactly beyond the blend") {
    Curve z = arc_piece({0, 0}, 0.0, 1.0, 1.0, 1e-3);  // quarter-circle-ish
    double l = 0.6, delta = 0.25, kappa0 = 0.7, tau = 0.3;
    Curve w = adjoin_smooth_tail(z, l, delta, kappa0, tau);
    double s = l + 1.5 * delta;
    CHECK(w.phi_at(s) == doctest::Approx((s - l - delta) * kappa0 + tau).epsilon(1e-12));
    // property (i): unchanged below l
    for (int i = 0; i < w.size() && w.s[i] <= l; ++i)
        CHECK(std::abs(w.z[i] - z.point_at(w.s[i])) < 1e-9);
}

TEST_CASE("blended curvature stays within the endpoint range") {
    double l = 0.8, delta = 0.3;
    Curve z = arc_piece({0, 0}, 0.0, 1.0, l + delta, 1e-3);
    // same curvature, continuous angle: the blend must not disturb the circle
    Curve w = adjoin_smooth_tail(z, l, delta, 1.0, l + delta);
    for (double s = 0.01; s < w.length() - 0.01; s += 0.01) {
        double k = curvature_at(w, s).kappa;
        CHECK(k > 0.95 - 0.05);
        CHECK(k < 1.05 + 0.05);
    }
    // smaller tail curvature with the ramp slope matched between the two rates
    double kappa0 = 0.5;
    double a = l + delta / 3;
    double tau = a + kappa0 * (2 * delta / 3);  // target line meets beta(a) at slope kappa0
    Curve w2 = adjoin_smooth_tail(z, l, delta, kappa0, tau);
    for (double s = 0.01; s < w2.length() - 0.01; s += 0.01) {
        double k = curvature_at(w2, s).kappa;
        CHECK(k > 0.5 * 0.95 - 0.05);
        CHECK(k < 1.0 * 1.05 + 0.05);
    }
}

TEST_CASE("tail adjunction is idempotent on its own output") {
    Curve z = arc_piece({0, 0}, 0.2, 0.9, 1.3, 1e-3);
    Curve w1 = adjoin_smooth_tail(z, 0.8, 0.2, 0.4, 1.0);
    Curve w2 = adjoin_smooth_tail(w1, 1.05, 0.07, 0.4, 1.0 + (1.05 + 0.07 - 0.8 - 0.2) * 0.4);
    for (double s = 1.05; s < w2.length(); s += 0.01)
        CHECK(std::fabs(w2.phi_at(s) - w1.phi_at(s)) < 1e-9);
}

TEST_CASE("curvature of circles, segments, and reversals") {
    Curve circ = arc_piece({2, 0}, PI / 2, 0.5, 2.0, 1e-3);  // radius 2, counterclockwise
    CHECK(curvature_at(circ, 1.0).kappa == doctest::Approx(0.5).epsilon(1e-9));
    Curve seg = arc_piece({0, 0}, 0.7, 0.0, 1.0, 1e-3);
    CHECK(curvature_at(seg, 0.5).kappa == doctest::Approx(0.0));
    Curve rev = circ.reversed();
    CHECK(curvature_at(rev, rev.length() - 1.0).kappa == doctest::Approx(-0.5).epsilon(1e-8));
    CHECK(curvature_at(circ, 1e-5).one_sided);
}

TEST_CASE("cap family membership") {
    double eps = 0.02;
    Curve good = cap_fixture(eps);
    auto rep = in_cap_family(good, eps);
    CHECK(rep.ends_at_height);
    CHECK(rep.end_angles);
    CHECK(rep.monotone);
    CHECK(rep.contained);
    CHECK(rep.straight_caps);
    CHECK(rep.all());

    Curve flat = arc_piece({-1, -eps}, 0.0, 0.0, 2.0, 1e-3);
    auto bad = in_cap_family(flat, eps);
    CHECK(bad.ends_at_height);
    CHECK(!bad.end_angles);

    Curve convex = arc_piece({-1, -eps}, PI / 2 + eps, +0.5, 2.0, 1e-3);
    CHECK(!in_cap_family(convex, eps).monotone);
}

TEST_CASE("subcurve, scaling, mirroring") {
    Curve c = arc_piece({0, 1}, 0.4, 0.6, 2.0, 1e-3);
    Curve sub = c.subcurve(0.5, 1.5);
    CHECK(sub.length() == doctest::Approx(1.0));
    CHECK(std::abs(sub.start() - c.point_at(0.5)) < 1e-12);
    Curve sc = c.scaled(2.0);
    CHECK(sc.length() == doctest::Approx(2 * c.length()));
    CHECK(curvature_at(sc, 1.0).kappa == doctest::Approx(0.3).epsilon(1e-8));
    Curve mir = c.mirrored_x();
    CHECK(mir.z[10].real() == doctest::Approx(-c.z[10].real()));
    CHECK(wrap_pi(mir.phi[10] - (PI - c.phi[10])) == doctest::Approx(0.0));
}

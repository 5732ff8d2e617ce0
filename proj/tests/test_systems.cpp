#include <random>

#include "doctest.h"
#include "hpnet/systems.hpp"

using namespace hpnet;

namespace {

NormalSystem synthetic_table(double c1, double c2, double wiggle, int n = 81, double span = 8.0) {
    NormalSystem::Tabulated t;
    t.r1_min = -span;
    t.r1_max = span;
    t.r2_min = -span;
    t.r2_max = span;
    t.n1 = n;
    t.n2 = n;
    t.values.resize(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double r1 = t.r1_min + 2 * span * i / (n - 1);
            double r2 = t.r2_min + 2 * span * j / (n - 1);
            t.values[i * n + j] = c1 * r1 + c2 * r2 + wiggle * std::sin(r1) * std::cos(r2);
        }
    return NormalSystem::tabulated(std::move(t));
}

}  // namespace

TEST_CASE("cps inclination values") {
    auto s = NormalSystem::cps(2.0, 1.0);
    CHECK(s.theta({0.5, 0.1}) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(s.theta({0.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-14));
    auto [g1, g2] = s.theta_gradient({3.7, -1.2});
    CHECK(g1 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(g2 == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("cps round trip through the invariants") {
    double m1 = 2.0, m2 = 0.5;
    auto s = NormalSystem::cps(m1, m2);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-5, 5);
    for (int i = 0; i < 200; ++i) {
        double th = U(rng), ph = U(rng);
        InvariantPair r{m1 * th - m2 * ph, m2 * th - m1 * ph};
        CHECK(s.theta(r) == doctest::Approx(th).epsilon(1e-12));
    }
}

TEST_CASE("linear system gradient and degenerate bound") {
    auto s = NormalSystem::linear(0.5, -0.25, 0.0);
    auto [g1, g2] = s.theta_gradient({1.0, 1.0});
    CHECK(g1 == doctest::Approx(0.5));
    CHECK(g2 == doctest::Approx(-0.25));
    CHECK(NormalSystem::linear(0.5, 0.5, 1.0).quasi_hp_constant() == doctest::Approx(1.0));
}

TEST_CASE("tabulated interpolation hits grid nodes exactly and recovers gradients") {
    NormalSystem::Tabulated t;
    t.r1_min = 0;
    t.r1_max = 2;
    t.r2_min = 0;
    t.r2_max = 2;
    t.n1 = 5;
    t.n2 = 5;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) t.values.push_back(0.5 * i + 0.11 * j + 0.037 * i * j);
    auto s = NormalSystem::tabulated(std::move(t));
    CHECK(s.theta({1.0, 1.5}) == doctest::Approx(0.5 * 2 + 0.11 * 3 + 0.037 * 2 * 3).epsilon(1e-14));
    CHECK_THROWS_AS((void)s.theta({3.0, 0.0}), std::out_of_range);

    auto lin = synthetic_table(1.0, 0.4, 0.0);
    auto [g1, g2] = lin.theta_gradient({0.3, -0.7});
    CHECK(g1 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(g2 == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("derivative bounds hold on random probes") {
    auto s = synthetic_table(0.8, -0.8, 0.15);
    double A = s.lower_bound_A(), B = s.upper_bound_B();
    CHECK(A > 0);
    CHECK(B > A);
    CHECK(s.quasi_hp_constant() < 2.0);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(-7, 7);
    for (int i = 0; i < 300; ++i) {
        auto [g1, g2] = s.theta_gradient({U(rng), U(rng)});
        CHECK(std::fabs(g1) >= A - 1e-12);
        CHECK(std::fabs(g1) <= B + 1e-12);
        CHECK(std::fabs(g2) >= A - 1e-12);
        CHECK(std::fabs(g2) <= B + 1e-12);
    }
}

TEST_CASE("quasi-hp constant") {
    CHECK(NormalSystem::cps(2, 1).quasi_hp_constant() == doctest::Approx(2.0));
    CHECK(NormalSystem::cps(2, 0.5).quasi_hp_constant() == doctest::Approx(4.0));
    CHECK(NormalSystem::cps(2, 1).quasi_hp_constant() ==
          doctest::Approx(NormalSystem::cps(1, 2).quasi_hp_constant()));
}

TEST_CASE("admissible corner values") {
    auto s = NormalSystem::cps(2.0, 1.0);
    auto roots = s.admissible_corner_values(0.5, 0.3, {-10, 10});
    REQUIRE(roots.size() == 1);
    CHECK(roots[0] == doctest::Approx(0.1).epsilon(1e-10));

    auto wide = s.admissible_corner_values(0.5, 0.3, {-30, 30});
    REQUIRE(wide.size() == 3);
    CHECK(wide[0] == doctest::Approx(0.1 - 6 * PI).epsilon(1e-9));
    CHECK(wide[1] == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(wide[2] == doctest::Approx(0.1 + 6 * PI).epsilon(1e-9));
    for (size_t i = 0; i + 1 < wide.size(); ++i)
        CHECK(wide[i + 1] - wide[i] >= 2 * PI / s.upper_bound_B() - 1e-9);

    auto zero = s.admissible_corner_values(0.0, 0.0, {-1, 1});
    REQUIRE(zero.size() == 1);
    CHECK(zero[0] == doctest::Approx(0.0));

    CHECK(s.admissible_corner_values(0.0, 0.5, {-0.1, 0.1}).empty());
}

TEST_CASE("admissible values on a table match an independent bisection") {
    auto s = synthetic_table(0.7, -0.55, 0.05);
    double rho1 = 0.4, target = -0.2;
    auto roots = s.admissible_corner_values(rho1, target, {-6, 6});
    REQUIRE(!roots.empty());
    // independent bisection on the interpolant for the root nearest zero
    double best = 1e300;
    for (double r : roots)
        if (std::fabs(r) < std::fabs(best)) best = r;
    double lo = best - 0.5, hi = best + 0.5;
    auto f = [&](double r2) { return wrap_pi(s.theta({rho1, r2}) - target); };
    double flo = f(lo);
    REQUIRE(((flo < 0) != (f(hi) < 0)));
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if ((f(mid) < 0) == (flo < 0)) {
            lo = mid;
            flo = f(mid);
        } else {
            hi = mid;
        }
    }
    CHECK(best == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
    for (double r : roots) CHECK(std::fabs(wrap_pi(s.theta({rho1, r}) - target)) < 1e-9);
}

TEST_CASE("transport moves the right invariant") {
    auto s = NormalSystem::cps(2.0, 1.0);
    InvariantPair r{0.7, -0.4};
    auto a = s.transport(r, 1, 0.25);
    CHECK(a.r1 == doctest::Approx(0.7));
    CHECK(a.r2 == doctest::Approx(-0.4 - 3 * 0.25).epsilon(1e-12));
    CHECK(s.theta(a) == doctest::Approx(s.theta(r) + 0.25).epsilon(1e-12));
    auto b = s.transport(r, 2, -0.8);
    CHECK(b.r2 == doctest::Approx(-0.4));
    CHECK(b.r1 == doctest::Approx(0.7 + 1.5 * (-0.8)).epsilon(1e-12));

    auto tab = synthetic_table(0.8, -0.8, 0.15);
    InvariantPair q{0.3, 0.2};
    auto c = tab.transport(q, 1, 0.4);
    CHECK(c.r1 == doctest::Approx(0.3));
    CHECK(tab.theta(c) == doctest::Approx(tab.theta(q) + 0.4).epsilon(1e-10));
}

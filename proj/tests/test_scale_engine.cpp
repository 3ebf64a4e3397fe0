#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "divcap/quadrature.hpp"
#include "divcap/scale_engine.hpp"
#include "test_models.hpp"

using namespace divcap;
using namespace divcap::testing;

TEST_CASE("roots of psi = q, unit model") {
    // theta^2 - q theta - q = 0, roots (q +- sqrt(q^2+4q))/2; q=1 gives
    // the golden ratio pair
    const auto e = ScaleEngine::build(unit_model(), 1.0);
    REQUIRE(e.roots().size() == 2);
    std::vector<double> r{e.roots()[0].real(), e.roots()[1].real()};
    std::sort(r.begin(), r.end());
    CHECK(r[0] == doctest::Approx((1.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    CHECK(r[1] == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    CHECK(e.phi() == doctest::Approx(r[1]).epsilon(1e-12));
}

TEST_CASE("root count equals rational degree") {
    CHECK(ScaleEngine::build(unit_model(), 0.7).roots().size() == 2);
    CHECK(ScaleEngine::build(canonical_model(), 0.5).roots().size() == 3);
    CHECK(ScaleEngine::build(mixed_model(), 0.5).roots().size() == 4);
    CHECK(ScaleEngine::build(brownian_model(), 2.0).roots().size() == 2);
}

TEST_CASE("Brownian scale function, hand-derived") {
    // psi(theta)=theta+theta^2, q=2: roots 1 and -2,
    // W_2(x) = (e^x - e^{-2x})/3
    const auto e = ScaleEngine::build(brownian_model(), 2.0);
    for (double x : {0.2, 1.0, 3.0})
        CHECK(e.W(x) == doctest::Approx((std::exp(x) - std::exp(-2.0 * x)) /
                                        3.0)
                            .epsilon(1e-12));
    CHECK(e.W_prime_plus(1.0) ==
          doctest::Approx((std::exp(1.0) + 2.0 * std::exp(-2.0)) / 3.0)
              .epsilon(1e-12));
    // unbounded variation: W(0+) = 0
    CHECK(e.W(1e-12) < 1e-6);
    CHECK(e.W0_plus() == 0.0);
}

TEST_CASE("W conventions and dichotomy") {
    const auto e = ScaleEngine::build(unit_model(), 0.7);
    CHECK(e.W(-1.0) == 0.0);
    // bounded variation: W(0+) = 1/c with the folded drift
    CHECK(e.W0_plus() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.W(1e-12) == doctest::Approx(1.0).epsilon(1e-6));

    const auto ec = ScaleEngine::build(canonical_model(), 0.5);
    CHECK(ec.W0_plus() == doctest::Approx(1.0 / 1.5).epsilon(1e-12));
}

TEST_CASE("W_prime matches finite differences and W increases") {
    for (const auto& m : {canonical_model(), mixed_model()}) {
        const auto e = ScaleEngine::build(m, 0.5);
        double prev = 0.0;
        for (double x = 0.1; x <= 10.0; x += 0.3) {
            const double h = 1e-6 * std::max(1.0, x);
            const double fd = (e.W(x + h) - e.W(x - h)) / (2.0 * h);
            CHECK(e.W_prime_plus(x) == doctest::Approx(fd).epsilon(1e-6));
            CHECK(e.W_prime_plus(x) > 0.0);
            CHECK(e.W(x) > prev);
            prev = e.W(x);
        }
    }
    CHECK_THROWS_AS((void)ScaleEngine::build(unit_model(), 1.0).W_prime_plus(
                        -1.0),
                    std::domain_error);
}

TEST_CASE("Laplace round trip") {
    for (const auto& m : {unit_model(), canonical_model(), mixed_model()}) {
        for (double q : {0.5, 1.0}) {
            const auto e = ScaleEngine::build(m, q);
            for (double ds : {0.5, 1.0, 2.0}) {
                const double s = e.phi() + ds;
                const double xmax = 45.0 / ds;
                const double lhs = integrate(
                    [&](double x) { return std::exp(-s * x) * e.W(x); }, 0.0,
                    xmax, 1e-12);
                const double rhs = 1.0 / (laplace_exponent(m, s) - q);
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("Z and Zbar definitions") {
    const auto e = ScaleEngine::build(canonical_model(), 0.5);
    CHECK(e.Z(-3.0) == 1.0);
    CHECK(e.Zbar(-3.0) == -3.0);
    for (double x : {0.5, 1.0, 5.0}) {
        const double zi =
            1.0 + 0.5 * integrate([&](double y) { return e.W(y); }, 0.0, x,
                                  1e-12);
        CHECK(e.Z(x) == doctest::Approx(zi).epsilon(1e-8));
        const double zb =
            integrate([&](double y) { return e.Z(y); }, 0.0, x, 1e-12);
        CHECK(e.Zbar(x) == doctest::Approx(zb).epsilon(1e-8));
        CHECK(e.Z(x) >= 1.0);
    }
    // Z non-decreasing
    double prev = 1.0;
    for (double x = 0.0; x < 6.0; x += 0.25) {
        CHECK(e.Z(x) >= prev - 1e-12);
        prev = e.Z(x);
    }
}

TEST_CASE("second scale function forms") {
    const auto m = canonical_model();
    const double q = 0.5, gamma = 1.0;
    const auto e = ScaleEngine::build(m, q);
    const auto eg = ScaleEngine::build(m, q + gamma);

    for (double x : {0.7, 2.0})
        CHECK(e.Z2(x, 0.0) == doctest::Approx(e.Z(x)).epsilon(1e-12));
    const double s = 0.8;
    CHECK(e.Z2(-2.0, s) == doctest::Approx(std::exp(-2.0 * s)).epsilon(1e-12));

    // for s = Phi_{q+gamma} > Phi_q the tail form
    //   (psi(s)-q) int_0^inf e^{-sy} W_q(x+y) dy
    // must agree with the defining form
    const double sg = eg.phi();
    REQUIRE(sg > e.phi());
    for (double x : {0.5, 2.0}) {
        const double tail =
            (laplace_exponent(m, sg) - q) *
            integrate([&](double y) { return std::exp(-sg * y) * e.W(x + y); },
                      0.0, 60.0 / (sg - e.phi()), 1e-12);
        CHECK(e.Z2(x, sg) == doctest::Approx(tail).epsilon(1e-8));
    }
}

TEST_CASE("convolution kernel and identity (3.17)") {
    const auto m = canonical_model();
    const double p = 0.5, q = 1.5;
    const auto ep = ScaleEngine::build(m, p);
    const auto eq = ScaleEngine::build(m, q);

    CHECK(conv_W(ep, eq, 1.0, 0.0) == 0.0);

    // direct quadrature oracle
    for (double x : {0.0, 0.8}) {
        for (double y : {0.5, 2.0}) {
            const double direct = integrate(
                [&](double z) { return ep.W(x + y - z) * eq.W(z); }, 0.0, y,
                1e-12);
            CHECK(conv_W(ep, eq, x, y) ==
                  doctest::Approx(direct).epsilon(1e-9));
        }
    }

    // W_q(x+y) - (q-p) int_0^x W_q(z+y) W_p(x-z) dz
    //   = W_p(x+y) + (q-p) int_0^y W_p(x+y-z) W_q(z) dz
    for (double x : {0.2, 0.6, 1.0, 1.5, 2.0}) {
        for (double y : {0.1, 0.5, 1.0, 2.0, 3.0}) {
            const double lhs =
                eq.W(x + y) -
                (q - p) * integrate(
                              [&](double z) {
                                  return eq.W(z + y) * ep.W(x - z);
                              },
                              0.0, x, 1e-12);
            const double rhs = ep.W(x + y) + (q - p) * conv_W(ep, eq, x, y);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
        }
    }

    // p = q collapse
    CHECK(eq.W(1.0 + 0.7) ==
          doctest::Approx(eq.W(1.7) + 0.0 * conv_W(eq, eq, 1.0, 0.7))
              .epsilon(1e-12));
}

TEST_CASE("W_{q+gamma}/W_q ratio near zero") {
    const auto m = canonical_model();
    const auto e = ScaleEngine::build(m, 0.5);
    const auto eg = ScaleEngine::build(m, 1.5);
    CHECK(eg.W(1e-6) / e.W(1e-6) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("repeated rates rejected") {
    SpectrallyPositiveModel m{1.0, 0.0,
                              Hyperexponential{1.0, {0.5, 0.5}, {2.0, 2.0}}};
    CHECK_THROWS_AS((void)ScaleEngine::build(m, 1.0), std::invalid_argument);
}

TEST_CASE("inversion backend agrees with exact backend") {
    // same hyperexponential model, inversion forced: isolates the Talbot
    // error from the tabulated-psi error
    const auto m = canonical_model();
    const auto ex = ScaleEngine::build(m, 0.5, ScaleBackend::Exact);
    const auto in = ScaleEngine::build(m, 0.5, ScaleBackend::Inversion);
    CHECK_FALSE(in.exact());
    for (double x : {0.3, 1.0, 2.0, 5.0}) {
        CHECK(in.W(x) == doctest::Approx(ex.W(x)).epsilon(1e-9));
        CHECK(in.W_prime_plus(x) ==
              doctest::Approx(ex.W_prime_plus(x)).epsilon(1e-5));
        CHECK(in.Z(x) == doctest::Approx(ex.Z(x)).epsilon(1e-8));
        CHECK(in.Zbar(x) == doctest::Approx(ex.Zbar(x)).epsilon(1e-8));
        CHECK(in.Z2(x, 1.3) == doctest::Approx(ex.Z2(x, 1.3)).epsilon(1e-8));
    }
    CHECK(in.W(-1.0) == 0.0);
    CHECK(in.W0_plus() == doctest::Approx(ex.W0_plus()).epsilon(1e-12));
}

TEST_CASE("tabulated model round trip through inversion") {
    const auto m = tabulated_model();
    const double q = 0.5;
    const auto e = ScaleEngine::build(m, q);
    CHECK_FALSE(e.exact());
    for (double ds : {0.5, 1.0}) {
        const double s = e.phi() + ds;
        const double lhs = integrate(
            [&](double x) { return std::exp(-s * x) * e.W(x); }, 0.0,
            45.0 / ds, 1e-10);
        CHECK(lhs == doctest::Approx(1.0 / (laplace_exponent(m, s) - q))
                         .epsilon(1e-6));
    }
    // monotone, nonnegative
    double prev = 0.0;
    for (double x = 0.2; x < 6.0; x += 0.4) {
        CHECK(e.W(x) > prev);
        prev = e.W(x);
    }
}

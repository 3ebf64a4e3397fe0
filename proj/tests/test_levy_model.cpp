#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "divcap/levy_model.hpp"
#include "divcap/quadrature.hpp"
#include "test_models.hpp"

using namespace divcap;
using namespace divcap::testing;

// brute-force quadrature of the jump integrand, independent of the
// closed-form path
static double psi_by_quadrature(const SpectrallyPositiveModel& m,
                                double theta) {
    const auto& hx = std::get<Hyperexponential>(m.jumps);
    double jump = 0.0;
    if (!hx.weights.empty()) {
        jump = integrate(
            [&](double z) {
                double nu = 0.0;
                for (std::size_t k = 0; k < hx.weights.size(); ++k)
                    nu += hx.arrival_rate * hx.weights[k] * hx.rates[k] *
                          std::exp(-hx.rates[k] * z);
                return (std::exp(-theta * z) - 1.0) * nu;
            },
            0.0, 200.0);
    }
    return m.drift_c * theta + 0.5 * m.sigma * m.sigma * theta * theta + jump;
}

TEST_CASE("laplace exponent closed form") {
    const auto m = unit_model();
    CHECK(laplace_exponent(m, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
    // psi(theta) = theta^2/(1+theta); psi(2) = 4/3
    CHECK(laplace_exponent(m, 2.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
    CHECK(laplace_exponent(m, 2.0) ==
          doctest::Approx(psi_by_quadrature(m, 2.0)).epsilon(1e-9));

    // c=1, sigma=1, no jumps: c theta + sigma^2 theta^2 / 2
    SpectrallyPositiveModel bm{1.0, 1.0, Hyperexponential{0.0, {}, {}}};
    CHECK(laplace_exponent(bm, 2.0) == doctest::Approx(4.0).epsilon(1e-14));

    CHECK_THROWS_AS((void)laplace_exponent(m, -0.1), std::domain_error);
}

TEST_CASE("psi_prime_at_zero against finite differences") {
    // E[X_1] = -psi'(0+); for unit model c=1, a/eta=1 -> 0
    auto m = unit_model();
    CHECK(psi_prime_at_zero(m) == doctest::Approx(0.0).epsilon(1e-13));
    m.drift_c = 2.0;
    CHECK(psi_prime_at_zero(m) == doctest::Approx(1.0).epsilon(1e-13));

    SpectrallyPositiveModel pure{1.0, 3.0, Hyperexponential{0.0, {}, {}}};
    CHECK(psi_prime_at_zero(pure) == doctest::Approx(1.0).epsilon(1e-13));

    // first-order finite-difference convergence at rate O(h)
    const auto cm = canonical_model();
    const double d = psi_prime_at_zero(cm);
    double prev_err = 1e300;
    for (double h : {1e-3, 1e-4, 1e-5}) {
        const double fd = (laplace_exponent(cm, h) - 0.0) / h;
        const double err = std::abs(fd - d);
        CHECK(err < 0.6 * prev_err + 1e-12);
        prev_err = err;
    }
}

TEST_CASE("phi_q solves psi = q") {
    const auto m = unit_model();
    // psi(theta) = theta^2/(1+theta) = 1  <=>  theta^2 - theta - 1 = 0
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    CHECK(phi_q(m, 1.0) == doctest::Approx(golden).epsilon(1e-12));

    // independent bisection oracle
    auto bisect = [&](double q) {
        double lo = 0.0, hi = 64.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (laplace_exponent(m, mid) > q ? hi : lo) = mid;
        }
        return 0.5 * (lo + hi);
    };
    CHECK(phi_q(m, 1.0) == doctest::Approx(bisect(1.0)).epsilon(1e-12));

    for (const auto& mm : {unit_model(), canonical_model(), brownian_model(),
                           mixed_model()}) {
        for (double q : {0.01, 0.1, 1.0, 10.0}) {
            const double p = phi_q(mm, q);
            CHECK(laplace_exponent(mm, p) ==
                  doctest::Approx(q).epsilon(1e-10));
        }
    }
    // psi'(0+) >= 0 => Phi_q -> 0 as q -> 0+ (unit model has psi'(0+)=0)
    CHECK(phi_q(m, 1e-10) < 1e-4);
    CHECK_THROWS_AS((void)phi_q(m, 0.0), std::domain_error);
}

TEST_CASE("psi convexity on a grid") {
    for (const auto& m : {unit_model(), canonical_model(), mixed_model()}) {
        for (double t1 = 0.0; t1 < 4.0; t1 += 0.5)
            for (double t3 = t1 + 1.0; t3 < 8.0; t3 += 1.0) {
                const double t2 = 0.5 * (t1 + t3);
                const double chord = 0.5 * (laplace_exponent(m, t1) +
                                            laplace_exponent(m, t3));
                CHECK(laplace_exponent(m, t2) <= chord + 1e-10);
            }
    }
}

TEST_CASE("bounded variation dichotomy") {
    CHECK(is_bounded_variation(unit_model()));
    CHECK_FALSE(is_bounded_variation(mixed_model()));
    CHECK(is_bounded_variation(tabulated_model(200, 10.0)));
}

TEST_CASE("model validation") {
    SpectrallyPositiveModel bad = unit_model();
    bad.drift_c = 0.0;  // subordinator-direction violation
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = unit_model();
    std::get<Hyperexponential>(bad.jumps).weights = {0.5, 0.6};
    std::get<Hyperexponential>(bad.jumps).rates = {1.0, 2.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = unit_model();
    std::get<Hyperexponential>(bad.jumps).weights = {0.5, 0.5};
    std::get<Hyperexponential>(bad.jumps).rates = {2.0, 2.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("tabulated density matches closed form psi") {
    // same Exp(1) jump law, tabulated on a fine grid
    const auto tab = tabulated_model();
    SpectrallyPositiveModel exact{1.5, 0.0,
                                  Hyperexponential{1.0, {1.0}, {1.0}}};
    // the tabulated measure misses the mass below the first grid point and
    // beyond z_max; with n=2000, z_max=25 this is ~1e-4 relative
    for (double th : {0.3, 1.0, 2.5}) {
        CHECK(laplace_exponent(tab, th) ==
              doctest::Approx(laplace_exponent(exact, th)).epsilon(2e-4));
    }
    CHECK(psi_prime_at_zero(tab) ==
          doctest::Approx(psi_prime_at_zero(exact)).epsilon(2e-3));
}

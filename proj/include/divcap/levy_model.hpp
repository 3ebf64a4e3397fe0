#pragma once

#include <complex>
#include <variant>
#include <vector>

namespace divcap {

// Spectrally positive Levy surplus process
//
//   X_t = -c t + sigma B_t + (upward jumps),
//
// parameterised through its Laplace exponent
//
//   psi(theta) = c theta + sigma^2 theta^2 / 2
//              + int_(0,inf) (e^{-theta z} - 1) nu(dz),
//
// where the small-jump compensator has been folded into the drift: all
// supported jump families have finite activity and finite mean, so the
// compensated Levy-Khintchine form collapses to the expression above with
// c equal to the bounded-variation drift c-bar (= c + int_(0,1) z nu(dz)
// of the compensated parameterisation).

// Compound Poisson jumps with hyperexponential density
//   nu(dz) = arrival_rate * sum_k weight_k * rate_k * exp(-rate_k z) dz.
// Rates must be distinct; weights sum to 1.
struct Hyperexponential {
    double arrival_rate = 0.0;
    std::vector<double> weights;
    std::vector<double> rates;
};

// Finite-activity jump density tabulated on an increasing grid over
// (0, z_max]; evaluated by trapezoid quadrature and linearly interpolated
// when sampled. Second-class family: scale functions go through numeric
// Laplace inversion.
struct TabulatedDensity {
    std::vector<double> z;        // strictly increasing, z.front() > 0
    std::vector<double> density;  // nu(z_i) >= 0
};

using JumpSpec = std::variant<Hyperexponential, TabulatedDensity>;

struct SpectrallyPositiveModel {
    double drift_c = 0.0;  // c in psi above (per unit time)
    double sigma = 0.0;    // Gaussian coefficient, >= 0
    JumpSpec jumps = Hyperexponential{0.0, {}, {}};

    // throws std::invalid_argument on violated invariants
    void validate() const;

    bool has_jumps() const;
    double jump_arrival_rate() const;  // total mass of nu
    double jump_mean() const;          // int z nu(dz) / nu-mass (0 if no jumps)
};

// psi(theta) for theta >= 0; domain error for theta < 0.
double laplace_exponent(const SpectrallyPositiveModel& model, double theta);

// Analytic continuation of psi to complex arguments (rational for
// hyperexponential jumps, quadrature for tabulated ones). Used by the
// scale-function backends.
std::complex<double> laplace_exponent(const SpectrallyPositiveModel& model,
                                      std::complex<double> theta);

// First derivative of psi; psi'(0+) = -E[X_1].
double laplace_exponent_derivative(const SpectrallyPositiveModel& model,
                                   double theta);
std::complex<double> laplace_exponent_derivative(
    const SpectrallyPositiveModel& model, std::complex<double> theta);

double psi_prime_at_zero(const SpectrallyPositiveModel& model);

// Unique positive root of psi(s) = q, q > 0 (bracketed Newton/bisection,
// relative tolerance 1e-12).
double phi_q(const SpectrallyPositiveModel& model, double q);

bool is_bounded_variation(const SpectrallyPositiveModel& model);

}  // namespace divcap

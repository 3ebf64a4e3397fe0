#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "divcap/exp_sum.hpp"
#include "divcap/levy_model.hpp"

namespace divcap {

// Per-(model, q) evaluator of the scale functions
//
//   W_q  with Laplace transform 1/(psi(s) - q) on (Phi_q, infty),
//   Z_q(x)      = 1 + q int_0^x W_q,
//   Zbar_q(x)   = int_0^x Z_q,
//   Z_q(x, s)   = e^{sx} (1 - (psi(s)-q) int_0^x e^{-sy} W_q(y) dy),
//
// with the conventions W_q = 0 on (-inf,0), Z_q = 1 and Z_q(x,s) = e^{sx}
// on x < 0.
//
// Two backends:
//  * Exact: psi rational (hyperexponential jumps). All roots zeta_j of
//    psi(s) = q are found (one positive real root Phi_q, the rest with
//    negative real part) and W_q(x) = sum_j e^{zeta_j x}/psi'(zeta_j).
//  * Inversion: fixed-Talbot numerical inversion with 64 nodes of the
//    Esscher-shifted transform 1/(psi(s+Phi_q)-q), so the integrand has
//    no singularity right of the contour. Deterministic for given inputs.
enum class ScaleBackend { Auto, Exact, Inversion };

class ScaleEngine {
  public:
    // q > 0. Throws std::invalid_argument for repeated psi(s)=q roots
    // (non-distinct hyperexponential rates: perturb them).
    static ScaleEngine build(const SpectrallyPositiveModel& model, double q,
                             ScaleBackend backend = ScaleBackend::Auto);

    double q() const { return q_; }
    double phi() const { return phi_q_; }
    const SpectrallyPositiveModel& model() const { return model_; }
    bool exact() const { return exact_; }

    double W(double x) const;
    double W0_plus() const;
    // right derivative, x > 0
    double W_prime_plus(double x) const;
    double Z(double x) const;
    double Zbar(double x) const;
    // second scale function, s >= 0
    double Z2(double x, double s) const;
    // analytic continuation in s (entire for fixed x); used by the
    // exponential-sum kernel machinery
    std::complex<double> Z2c(double x, std::complex<double> s) const;

    // Exact backend only: roots zeta_j of psi=q and coefficients
    // D_j = 1/psi'(zeta_j); empty for the inversion backend.
    const std::vector<std::complex<double>>& roots() const { return roots_; }
    const std::vector<std::complex<double>>& coeffs() const { return coeffs_; }

    // W_q restricted to [0,inf) as an exponential sum (exact backend only)
    const ExpSum& w_sum() const;

  private:
    ScaleEngine() = default;

    double talbot_tilted(double x) const;  // e^{-Phi_q x} W_q(x), x > 0
    double tilted_cached(double x) const;

    SpectrallyPositiveModel model_;
    double q_ = 0.0;
    double phi_q_ = 0.0;
    double w0_ = 0.0;
    bool exact_ = true;
    std::vector<std::complex<double>> roots_, coeffs_;
    ExpSum wsum_;

    // inversion backend: uniform-grid cache of the tilted inverse,
    // extended on demand behind a mutex (evaluation is logically const)
    struct TiltCache;
    std::shared_ptr<TiltCache> tilt_;
};

// int_0^y W_p(x + y - z) W_q(z) dz for x, y >= 0; engines must share the
// model. Closed form when both engines are exact, adaptive quadrature
// otherwise.
double conv_W(const ScaleEngine& ep, const ScaleEngine& eq, double x,
              double y);

}  // namespace divcap

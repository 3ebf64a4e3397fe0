#pragma once

#include <functional>
#include <memory>

#include "divcap/exp_sum.hpp"
#include "divcap/scale_engine.hpp"

namespace divcap {

// Engine pair for one barrier problem: scale functions at the discount
// rate q and at q+gamma (gamma the Poisson observation intensity), plus
// the dividend barrier b > 0. All closed-form exit and first-passage
// transforms below are evaluated from this pair.
struct KernelParams {
    const ScaleEngine* eq = nullptr;   // rate q
    const ScaleEngine* eqg = nullptr;  // rate q + gamma
    double b = 0.0;

    static KernelParams make(const ScaleEngine& eq, const ScaleEngine& eqg,
                             double b);

    double q() const { return eq->q(); }
    double gamma() const { return eqg->q() - eq->q(); }
    double phi_qg() const { return eqg->phi(); }
    // x-derivative of the second scale function at the barrier:
    // Z_q'(b, Phi_{q+gamma}) = Phi_{q+gamma} Z_q(b,.) - gamma W_q(b)
    double z2_prime_b() const;
};

// ---------------------------------------------------------------------
// compound kernels (identity-extended to v < 0 via the Z/W conventions)
//   conv_w_kernel(v,y)  = W_q(v+y) + gamma int_0^y W_q(v+y-z) W_{q+g}(z) dz
//   conv_z_kernel(v,y)  = Z_q(v+y) + gamma int_0^y Z_q(v+y-z) W_{q+g}(z) dz
//   conv_w_kernel_dv    = d/dv of conv_w_kernel, v > 0
// ---------------------------------------------------------------------
double conv_w_kernel(const KernelParams& p, double v, double y);
double conv_w_kernel_dv(const KernelParams& p, double v, double y);
double conv_z_kernel(const KernelParams& p, double v, double y);

// ---------------------------------------------------------------------
// two-sided exit of the uncontrolled process, 0 <= x <= b
// ---------------------------------------------------------------------
double exit_down(const KernelParams& p, double x);
double exit_up(const KernelParams& p, double x);

// ---------------------------------------------------------------------
// Poisson-observed passage over b of the 0-reflected process Ytilde
// ---------------------------------------------------------------------
// E_x[e^{-q T_b^+}]
double observed_passage_lt(const KernelParams& p, double x);
// E_x[int_0^{T_b^+} e^{-qt} dR_t]
double injection_until_observed(const KernelParams& p, double x);
// E_x[e^{-q T_b^+ + theta (b - Ytilde(T_b^+))}]
double joint_observed_transform(const KernelParams& p, double x,
                                double theta);
// E_x[e^{-q T_b^+} (b - Ytilde(T_b^+))]  (non-positive: Ytilde > b there)
double observed_overshoot_lt(const KernelParams& p, double x);

// ---------------------------------------------------------------------
// continuous first passage over b of the 0-reflected process
// ---------------------------------------------------------------------
// E_x[e^{-q sigma_b^+} e^{Phi_{q+g}(b - Ytilde(sigma_b^+))}]
double reflected_passage_exp_transform(const KernelParams& p, double x);
// E_x[e^{-q sigma_b^+} W_{q+g}(b - Ytilde(sigma_b^+) + y)]
double reflected_scale_at_passage(const KernelParams& p, double x, double y);

// ---------------------------------------------------------------------
// exponentially decaying tail kernels on [0, inf)
//
// The valuation formulas integrate piecewise-constant payoff slopes
// against brackets of the form H(b,y) - C * K(v,y) whose leading
// e^{Phi_{q+gamma} y} growth cancels identically. Exact engines expose
// the decayed exponential sum (the Phi term removed analytically);
// inversion engines evaluate the difference directly and integrate by
// window-doubling quadrature.
// ---------------------------------------------------------------------
class TailKernel {
  public:
    virtual ~TailKernel() = default;
    virtual double eval(double u) const = 0;
    virtual double integral(double a, double b) const = 0;
    virtual double tail(double a) const = 0;  // int_a^inf
};

// K_V(y;x)  = H(b,y) - C_x G(b-x,y),
//   C_x = Phi_{q+g} Z_q(b,Phi) / (q Z_q(b-x,Phi) + gamma Z_q(b-x))
std::unique_ptr<TailKernel> make_value_tail(const KernelParams& p, double x);
// K_V'(y;x) = H(b,y) - (Z_q(b,Phi)/Z_q(b-x,Phi)) H(b-x,y), x <= b
std::unique_ptr<TailKernel> make_deriv_tail_lower(const KernelParams& p,
                                                  double x);
// upper branch: H(b,y) - Z_q(b,Phi) e^{Phi(x-b)} W_{q+g}(y-(x-b)), x >= b
std::unique_ptr<TailKernel> make_deriv_tail_upper(const KernelParams& p,
                                                  double x);
// single-barrier potential density on (b,inf), u = y - b
std::unique_ptr<TailKernel> make_single_density_tail(const KernelParams& p,
                                                     double x);
// double-barrier potential density on (b,inf), u = y - b
std::unique_ptr<TailKernel> make_double_density_tail(const KernelParams& p,
                                                     double x);

// E_x[e^{-q kappabar_0^-}] for the single-barrier dividend process; the
// building block shared by the tails above (Lemma-level transform; the
// valuation module re-exports it as an operation)
double killed_passage_lt_kernel(const KernelParams& p, double x);

}  // namespace divcap

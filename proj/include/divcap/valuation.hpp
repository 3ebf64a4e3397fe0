#pragma once

#include <memory>

#include "divcap/fluctuation.hpp"
#include "divcap/payoff.hpp"

namespace divcap {

// Auxiliary control problem data: discounting delta >= 0, exponential
// horizon rate lambda > 0 (so q = delta + lambda), observation intensity
// gamma > 0, injection cost phi > 1, terminal payoff omega.
struct AuxProblem {
    SpectrallyPositiveModel model;
    double delta = 0.0;
    double lambda = 0.0;
    double gamma = 0.0;
    double phi = 0.0;
    PayoffFunction omega;

    double q() const { return delta + lambda; }
    void validate() const;
};

// AuxProblem plus a dividend barrier b, with the two scale engines built
// once and shared across barrier changes.
class ValuationContext {
  public:
    static ValuationContext make(AuxProblem aux, double b,
                                 ScaleBackend backend = ScaleBackend::Auto);
    ValuationContext with_barrier(double b) const;

    const AuxProblem& aux() const { return aux_; }
    const KernelParams& params() const { return params_; }
    double b() const { return params_.b; }
    double q() const { return aux_.q(); }

  private:
    ValuationContext() = default;
    AuxProblem aux_;
    std::shared_ptr<const ScaleEngine> eq_, eqg_;
    KernelParams params_;
};

// expected discounted dividends minus phi * injections under the (0,b)
// strategy; defined for x >= 0 (the x < 0 convention lives in
// value_double_barrier)
double net_dividend_value(const ValuationContext& ctx, double x);
// the first-passage decomposition form valid on [b, inf); must agree
// with net_dividend_value there
double net_dividend_value_upper(const ValuationContext& ctx, double x);

// V^omega_{0,b}(x); phi x + V(0) for x < 0
double value_double_barrier(const ValuationContext& ctx, double x);

// V^omega'_{0,b}(x); branch dispatch at x = b
double value_derivative(const ValuationContext& ctx, double x);
// evaluate one branch form explicitly (both are defined at x = b, where
// they agree only through the scale-function convolution identity)
enum class DerivBranch { Lower, Upper };
double value_derivative_branch(const ValuationContext& ctx, double x,
                               DerivBranch side);

// E_x[e^{-q kappabar_0^-}] for the single-barrier process
double killed_passage_lt(const ValuationContext& ctx, double x);

// density of P_x(U^b_{e_q} in dy; e_q < kappabar_0^-); y = b refused
double single_barrier_potential(const ValuationContext& ctx, double x,
                                double y);

// atom at 0 and density of P_x(U^{0,b}_{e_q} in dy); y = b refused
struct PotentialDensity {
    double atom_at_zero = 0.0;
    double density = 0.0;
};
PotentialDensity potential_density_double(const ValuationContext& ctx,
                                          double x, double y);

// V'(b) through the Laplace-transform/potential-measure route
double derivative_at_barrier(const ValuationContext& ctx);

// residual of the variational inequality at x (x != b): the generator
// part (A - q)V + lambda omega + gamma max-term, the obstacle V' - phi,
// and the argmax of the max-term over [0, x]
struct HjbResidual {
    double generator = 0.0;
    double obstacle = 0.0;
    double argmax_z = 0.0;
};
HjbResidual hjb_residual(const ValuationContext& ctx, double x);

}  // namespace divcap

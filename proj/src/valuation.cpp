#include "divcap/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "divcap/quadrature.hpp"

namespace divcap {

namespace {

// int_0^b omega(y) W_q(y - x) dy, split at the payoff knots and at x
double int_omega_w(const ValuationContext& ctx, double x) {
    const auto& p = ctx.params();
    const auto& om = ctx.aux().omega;
    if (x >= p.b) return 0.0;
    std::vector<double> cuts{std::max(x, 0.0), p.b};
    for (double k : om.knots())
        if (k > cuts.front() && k < p.b) cuts.push_back(k);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        acc += integrate(
            [&](double y) { return om.value(y) * p.eq->W(y - x); }, cuts[i],
            cuts[i + 1]);
    return acc;
}

// int_0^b omega'_+(y) W_q(y) dy
double int_omegap_w(const ValuationContext& ctx) {
    const auto& p = ctx.params();
    const auto& om = ctx.aux().omega;
    std::vector<double> cuts{0.0, p.b};
    for (double k : om.knots())
        if (k > 0.0 && k < p.b) cuts.push_back(k);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double s = om.right_slope(0.5 * (cuts[i] + cuts[i + 1]));
        if (s != 0.0)
            acc += s * integrate([&](double y) { return p.eq->W(y); },
                                 cuts[i], cuts[i + 1]);
    }
    return acc;
}

// int_0^inf omega'_+(b + u) K(u) du for piecewise-constant omega'_+:
// knot-interval integrals weighted by (slope - terminal) plus the
// analytic terminal tail
double integrate_slopes(const PayoffFunction& om, double b,
                        const TailKernel& k) {
    const double ts = om.terminal_slope();
    std::vector<double> ys{0.0};
    for (double kn : om.knots())
        if (kn > b) ys.push_back(kn - b);
    std::sort(ys.begin(), ys.end());
    double acc = (ts != 0.0) ? ts * k.tail(0.0) : 0.0;
    for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
        const double s = om.right_slope(b + 0.5 * (ys[i] + ys[i + 1]));
        if (s != ts) acc += (s - ts) * k.integral(ys[i], ys[i + 1]);
    }
    // slope on [last knot, inf) equals ts by construction
    return acc;
}

double nu_density(const SpectrallyPositiveModel& m, double z) {
    if (const auto* hx = std::get_if<Hyperexponential>(&m.jumps)) {
        double v = 0.0;
        for (std::size_t k = 0; k < hx->weights.size(); ++k)
            v += hx->arrival_rate * hx->weights[k] * hx->rates[k] *
                 std::exp(-hx->rates[k] * z);
        return v;
    }
    const auto& tab = std::get<TabulatedDensity>(m.jumps);
    if (z <= tab.z.front() || z >= tab.z.back()) return 0.0;
    const auto it = std::upper_bound(tab.z.begin(), tab.z.end(), z);
    const std::size_t i = static_cast<std::size_t>(it - tab.z.begin()) - 1;
    const double t = (z - tab.z[i]) / (tab.z[i + 1] - tab.z[i]);
    return tab.density[i] + t * (tab.density[i + 1] - tab.density[i]);
}

double jump_upper_cut(const SpectrallyPositiveModel& m) {
    if (const auto* hx = std::get_if<Hyperexponential>(&m.jumps)) {
        double eta_min = 1e300;
        for (double e : hx->rates) eta_min = std::min(eta_min, e);
        return hx->weights.empty() ? 0.0 : 40.0 / eta_min;
    }
    return std::get<TabulatedDensity>(m.jumps).z.back();
}

}  // namespace

void AuxProblem::validate() const {
    model.validate();
    if (delta < 0.0)
        throw std::invalid_argument("aux: delta must be >= 0");
    if (lambda <= 0.0)
        throw std::invalid_argument("aux: lambda must be > 0");
    if (gamma <= 0.0) throw std::invalid_argument("aux: gamma must be > 0");
    if (phi <= 1.0) throw std::invalid_argument("aux: phi must be > 1");
    omega.validate(phi);
}

ValuationContext ValuationContext::make(AuxProblem aux, double b,
                                        ScaleBackend backend) {
    aux.validate();
    if (!(b > 0.0))
        throw std::domain_error("ValuationContext: b must be > 0");
    ValuationContext ctx;
    ctx.eq_ = std::make_shared<ScaleEngine>(
        ScaleEngine::build(aux.model, aux.q(), backend));
    ctx.eqg_ = std::make_shared<ScaleEngine>(
        ScaleEngine::build(aux.model, aux.q() + aux.gamma, backend));
    ctx.aux_ = std::move(aux);
    ctx.params_ = KernelParams::make(*ctx.eq_, *ctx.eqg_, b);
    return ctx;
}

ValuationContext ValuationContext::with_barrier(double b) const {
    if (!(b > 0.0))
        throw std::domain_error("ValuationContext: b must be > 0");
    ValuationContext ctx(*this);
    ctx.params_.b = b;
    return ctx;
}

double net_dividend_value(const ValuationContext& ctx, double x) {
    if (x < 0.0)
        throw std::domain_error("net_dividend_value: x must be >= 0");
    const auto& p = ctx.params();
    const double q = p.q(), g = p.gamma(), phig = p.phi_qg();
    const double phi = ctx.aux().phi;
    const double psi0 = psi_prime_at_zero(ctx.aux().model);
    const double v = p.b - x;
    return -g / (q + g) * (p.eq->Zbar(v) + psi0 / q) +
           (g * p.eq->Z(p.b) - phi * (q + g)) *
               (p.eq->Z2(v, phig) + g / q * p.eq->Z(v)) /
               ((q + g) * phig * p.eq->Z2(p.b, phig));
}

double net_dividend_value_upper(const ValuationContext& ctx, double x) {
    if (x < ctx.b())
        throw std::domain_error("net_dividend_value_upper: x >= b");
    const auto& p = ctx.params();
    const double q = p.q(), g = p.gamma(), phig = p.phi_qg();
    const double phi = ctx.aux().phi;
    const double psi0 = psi_prime_at_zero(ctx.aux().model);
    const double fb = (g * p.eq->Z(p.b) - phi * (q + g)) /
                          (q * phig * p.eq->Z2(p.b, phig)) -
                      g * psi0 / (q * (q + g));
    const double e = std::exp(-phig * (x - p.b));
    return g / (q + g) * (x - p.b - psi0 / (q + g) * (1.0 - e)) +
           (g + q * e) / (q + g) * fb;
}

double value_double_barrier(const ValuationContext& ctx, double x) {
    if (x < 0.0)
        return ctx.aux().phi * x + value_double_barrier(ctx, 0.0);
    const auto& p = ctx.params();
    const auto& om = ctx.aux().omega;
    const double f = net_dividend_value(ctx, x);
    if (om.is_zero()) return f;
    const double q = p.q(), g = p.gamma(), phig = p.phi_qg();
    const double lam = ctx.aux().lambda;
    const double v = p.b - x;
    const double coef = (q * p.eq->Z2(v, phig) + g * p.eq->Z(v)) /
                        (q * phig * p.eq->Z2(p.b, phig));
    const auto tail = make_value_tail(p, x);
    return f + lam * om.value(p.b) / q * p.eq->Z(v) -
           lam * int_omega_w(ctx, x) -
           coef * lam * (int_omegap_w(ctx) + integrate_slopes(om, p.b, *tail));
}

double value_derivative_branch(const ValuationContext& ctx, double x,
                               DerivBranch side) {
    const auto& p = ctx.params();
    const auto& om = ctx.aux().omega;
    const double q = p.q(), g = p.gamma(), phig = p.phi_qg();
    const double lam = ctx.aux().lambda, phi = ctx.aux().phi;
    const double z2b = p.eq->Z2(p.b, phig);
    const double corner = (g * p.eq->Z(p.b) - phi * (q + g)) / ((q + g) * z2b);
    if (side == DerivBranch::Lower) {
        if (x < 0.0 || x > p.b)
            throw std::domain_error("value_derivative: lower branch x in "
                                    "[0, b]");
        const double v = p.b - x;
        const double z2v = p.eq->Z2(v, phig);
        double acc = g / (q + g) * p.eq->Z(v) - corner * z2v;
        if (!om.is_zero()) {
            // -lambda int_x^b W_q(y-x) omega'_+(y) dy
            std::vector<double> cuts{x, p.b};
            for (double k : om.knots())
                if (k > x && k < p.b) cuts.push_back(k);
            std::sort(cuts.begin(), cuts.end());
            double iw = 0.0;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                const double s =
                    om.right_slope(0.5 * (cuts[i] + cuts[i + 1]));
                if (s != 0.0)
                    iw += s * integrate(
                                  [&](double y) { return p.eq->W(y - x); },
                                  cuts[i], cuts[i + 1]);
            }
            const auto tail = make_deriv_tail_lower(p, x);
            acc += -lam * iw +
                   z2v / z2b * lam *
                       (int_omegap_w(ctx) + integrate_slopes(om, p.b, *tail));
        }
        return acc;
    }
    if (x < p.b)
        throw std::domain_error("value_derivative: upper branch x >= b");
    const double e = std::exp(-phig * (x - p.b));
    double acc = g / (q + g) - corner * e;
    if (!om.is_zero()) {
        const auto tail = make_deriv_tail_upper(p, x);
        acc += e / z2b * lam *
               (int_omegap_w(ctx) + integrate_slopes(om, p.b, *tail));
    }
    return acc;
}

double value_derivative(const ValuationContext& ctx, double x) {
    if (x < 0.0) return ctx.aux().phi;
    return value_derivative_branch(
        ctx, x, x <= ctx.b() ? DerivBranch::Lower : DerivBranch::Upper);
}

double killed_passage_lt(const ValuationContext& ctx, double x) {
    return killed_passage_lt_kernel(ctx.params(), x);
}

double single_barrier_potential(const ValuationContext& ctx, double x,
                                double y) {
    const auto& p = ctx.params();
    if (x <= 0.0 || y < 0.0)
        throw std::domain_error("single_barrier_potential: x > 0, y >= 0");
    if (y == p.b)
        throw std::domain_error(
            "single_barrier_potential: y = b is a non-smooth point");
    const double q = p.q();
    if (y < p.b)
        return killed_passage_lt_kernel(p, x) * q * p.eq->W(y) -
               q * p.eq->W(y - x);
    return make_single_density_tail(p, x)->eval(y - p.b);
}

PotentialDensity potential_density_double(const ValuationContext& ctx,
                                          double x, double y) {
    const auto& p = ctx.params();
    if (x < 0.0 || y < 0.0)
        throw std::domain_error("potential_density_double: x, y >= 0");
    if (y == p.b)
        throw std::domain_error(
            "potential_density_double: y = b is a non-smooth point");
    const double q = p.q(), g = p.gamma(), phig = p.phi_qg();
    const double v = p.b - x;
    const double a_coef = (q * p.eq->Z2(v, phig) + g * p.eq->Z(v)) /
                          (phig * p.eq->Z2(p.b, phig));
    PotentialDensity out;
    out.atom_at_zero = a_coef * p.eq->W0_plus();
    if (y == 0.0) return out;
    if (y < p.b)
        out.density = a_coef * p.eq->W_prime_plus(y) - q * p.eq->W(y - x);
    else
        out.density = make_double_density_tail(p, x)->eval(y - p.b);
    return out;
}

double derivative_at_barrier(const ValuationContext& ctx) {
    const auto& p = ctx.params();
    const auto& om = ctx.aux().omega;
    const double q = p.q(), phi = ctx.aux().phi, lam = ctx.aux().lambda;
    const double lt = killed_passage_lt_kernel(p, p.b);
    // E_b[int_0^{kappabar} e^{-qt}(q phi - lambda omega'_+(U_t)) dt]
    double expected = phi * (1.0 - lt);
    if (!om.is_zero()) {
        const double on_0b = lt * q * int_omegap_w(ctx);
        const auto tail = make_single_density_tail(p, p.b);
        expected -= lam / q * (on_0b + integrate_slopes(om, p.b, *tail));
    }
    return (phi - 1.0 - expected) / (lt * p.eq->Z2(p.b, p.phi_qg())) + 1.0;
}

HjbResidual hjb_residual(const ValuationContext& ctx, double x) {
    const auto& p = ctx.params();
    const auto& m = ctx.aux().model;
    if (x <= 0.0) throw std::domain_error("hjb_residual: x must be > 0");
    // both supported jump families are finite-activity, so the generator
    // integral below is a proper integral
    const double q = p.q(), g = p.gamma(), lam = ctx.aux().lambda;

    const auto V = [&](double y) { return value_double_barrier(ctx, y); };
    const double vx = V(x);

    // five-point first derivative
    const double h = 1e-4 * std::max(1.0, x);
    const double vp = (-V(x + 2 * h) + 8 * V(x + h) - 8 * V(x - h) +
                       V(x - 2 * h)) /
                      (12 * h);
    double gen = -m.drift_c * vp - q * vx + lam * ctx.aux().omega.value(x);
    if (m.sigma > 0.0) {
        const double h2 = 1e-5 * std::max(1.0, x);
        const double vpp = (value_derivative(ctx, x + h2) -
                            value_derivative(ctx, x - h2)) /
                           (2 * h2);
        gen += 0.5 * m.sigma * m.sigma * vpp;
    }
    // jump integral int (V(x+z) - V(x)) nu(dz)
    const double zcut = jump_upper_cut(m);
    if (zcut > 0.0)
        gen += integrate(
            [&](double z) { return (V(x + z) - vx) * nu_density(m, z); },
            0.0, zcut, 1e-9);

    // gamma max_{0 <= z <= x} (z + V(x-z) - V(x))
    HjbResidual out;
    double best = 0.0;  // z = 0 candidate
    out.argmax_z = 0.0;
    const int n = 256;
    for (int i = 1; i <= n; ++i) {
        const double z = x * static_cast<double>(i) / n;
        const double cand = z + V(x - z) - vx;
        if (cand > best) {
            best = cand;
            out.argmax_z = z;
        }
    }
    if (x > p.b) {
        const double cand = (x - p.b) + V(p.b) - vx;
        if (cand > best) {
            best = cand;
            out.argmax_z = x - p.b;
        }
    }
    out.generator = gen + g * best;
    out.obstacle = vp - ctx.aux().phi;
    return out;
}

}  // namespace divcap

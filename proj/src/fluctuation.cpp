#include "divcap/fluctuation.hpp"

#include <cmath>
#include <stdexcept>

#include "divcap/quadrature.hpp"

namespace divcap {

namespace {

using cplx = std::complex<double>;

bool same_model(const SpectrallyPositiveModel& a,
                const SpectrallyPositiveModel& b) {
    if (a.drift_c != b.drift_c || a.sigma != b.sigma) return false;
    if (a.jumps.index() != b.jumps.index()) return false;
    if (const auto* ha = std::get_if<Hyperexponential>(&a.jumps)) {
        const auto& hb = std::get<Hyperexponential>(b.jumps);
        return ha->arrival_rate == hb.arrival_rate &&
               ha->weights == hb.weights && ha->rates == hb.rates;
    }
    const auto& ta = std::get<TabulatedDensity>(a.jumps);
    const auto& tb = std::get<TabulatedDensity>(b.jumps);
    return ta.z == tb.z && ta.density == tb.density;
}

void check_domain(const KernelParams& p, double x) {
    if (x < 0.0 || x > p.b)
        throw std::domain_error("kernel: x must lie in [0, b]");
}

bool is_phi_root(const KernelParams& p, cplx xi) {
    return xi.imag() == 0.0 &&
           std::abs(xi.real() - p.phi_qg()) <
               1e-10 * (1.0 + p.phi_qg());
}

// sum over the psi = q+gamma roots, one representative per conjugate
// pair; coef receives (xi_k, E_k) and returns the full term coefficient
template <class CoefFn>
ExpSum root_sum(const KernelParams& p, const CoefFn& coef, bool skip_phi) {
    ExpSum s;
    const auto& roots = p.eqg->roots();
    const auto& cs = p.eqg->coeffs();
    for (std::size_t k = 0; k < roots.size(); ++k) {
        if (roots[k].imag() < 0.0) continue;  // conjugate handled at +Im
        if (skip_phi && is_phi_root(p, roots[k])) continue;
        s.add(roots[k], coef(roots[k], cs[k]));
    }
    return s;
}

// ---------------------------------------------------------------------
// tail kernel implementations
// ---------------------------------------------------------------------

class ExpSumTail final : public TailKernel {
  public:
    explicit ExpSumTail(ExpSum s) : s_(std::move(s)) {}
    double eval(double u) const override { return s_.eval(u); }
    double integral(double a, double b) const override {
        return s_.integral(a, b);
    }
    double tail(double a) const override { return s_.integral_tail(a); }

  private:
    ExpSum s_;
};

// exponential sums on [0, split) and [split, inf), both in absolute
// coordinates
class PiecewiseTail final : public TailKernel {
  public:
    PiecewiseTail(double split, ExpSum left, ExpSum right)
        : split_(split), left_(std::move(left)), right_(std::move(right)) {}
    double eval(double u) const override {
        return u < split_ ? left_.eval(u) : right_.eval(u);
    }
    double integral(double a, double b) const override {
        if (b <= split_) return left_.integral(a, b);
        if (a >= split_) return right_.integral(a, b);
        return left_.integral(a, split_) + right_.integral(split_, b);
    }
    double tail(double a) const override {
        if (a >= split_) return right_.integral_tail(a);
        return left_.integral(a, split_) + right_.integral_tail(split_);
    }

  private:
    double split_;
    ExpSum left_, right_;
};

class QuadTail final : public TailKernel {
  public:
    QuadTail(std::function<double(double)> f, double hat0, bool has_hat0)
        : f_(std::move(f)), hat0_(hat0), has_hat0_(has_hat0) {}
    double eval(double u) const override { return f_(u); }
    double integral(double a, double b) const override {
        return integrate(f_, a, b, 1e-10);
    }
    double tail(double a) const override {
        if (has_hat0_) return hat0_ - integrate(f_, 0.0, a, 1e-10);
        // window doubling until a window stops contributing
        double acc = 0.0, lo = a, w = 5.0;
        for (int i = 0; i < 40; ++i) {
            const double seg = integrate(f_, lo, lo + w, 1e-10);
            acc += seg;
            if (std::abs(seg) < 1e-11 * (1.0 + std::abs(acc))) break;
            lo += w;
            w *= 1.5;
        }
        return acc;
    }

  private:
    std::function<double(double)> f_;
    double hat0_;
    bool has_hat0_;
};

}  // namespace

KernelParams KernelParams::make(const ScaleEngine& eq, const ScaleEngine& eqg,
                                double b) {
    if (!(b > 0.0)) throw std::domain_error("KernelParams: b must be > 0");
    if (!(eqg.q() > eq.q()))
        throw std::invalid_argument("KernelParams: need eqg.q > eq.q");
    if (!same_model(eq.model(), eqg.model()))
        throw std::invalid_argument("KernelParams: engines share one model");
    return {&eq, &eqg, b};
}

double KernelParams::z2_prime_b() const {
    return phi_qg() * eq->Z2(b, phi_qg()) - gamma() * eq->W(b);
}

double conv_w_kernel(const KernelParams& p, double v, double y) {
    if (y <= 0.0) return p.eq->W(v);
    if (v <= 0.0) return p.eqg->W(v + y);
    return p.eq->W(v + y) + p.gamma() * conv_W(*p.eq, *p.eqg, v, y);
}

double conv_w_kernel_dv(const KernelParams& p, double v, double y) {
    if (v <= 0.0)
        throw std::domain_error("conv_w_kernel_dv: v must be > 0");
    if (p.eq->exact() && p.eqg->exact()) {
        const auto& roots = p.eqg->roots();
        const auto& cs = p.eqg->coeffs();
        cplx acc = 0.0;
        for (std::size_t k = 0; k < roots.size(); ++k)
            acc += cs[k] * std::exp(roots[k] * y) *
                   (roots[k] * p.eq->Z2c(v, roots[k]) -
                    p.gamma() * p.eq->W(v));
        return acc.real();
    }
    const double wp = p.eq->W_prime_plus(v + y);
    if (y <= 0.0) return wp;
    return wp + p.gamma() * integrate(
                    [&](double z) {
                        return p.eq->W_prime_plus(v + y - z) * p.eqg->W(z);
                    },
                    0.0, y);
}

double conv_z_kernel(const KernelParams& p, double v, double y) {
    if (y <= 0.0) return p.eq->Z(v);
    return p.eq->Z(v + y) +
           p.gamma() * integrate(
                           [&](double z) {
                               return p.eq->Z(v + y - z) * p.eqg->W(z);
                           },
                           0.0, y);
}

double exit_down(const KernelParams& p, double x) {
    check_domain(p, x);
    return p.eq->W(p.b - x) / p.eq->W(p.b);
}

double exit_up(const KernelParams& p, double x) {
    check_domain(p, x);
    return p.eq->Z(p.b - x) -
           p.eq->Z(p.b) / p.eq->W(p.b) * p.eq->W(p.b - x);
}

double observed_passage_lt(const KernelParams& p, double x) {
    check_domain(p, x);
    const double q = p.q(), g = p.gamma();
    return g / (g + q) *
           (p.eq->Z(p.b - x) -
            q * p.eq->W(p.b) * p.eq->Z2(p.b - x, p.phi_qg()) /
                p.z2_prime_b());
}

double injection_until_observed(const KernelParams& p, double x) {
    check_domain(p, x);
    return p.eq->Z2(p.b - x, p.phi_qg()) / p.z2_prime_b();
}

double joint_observed_transform(const KernelParams& p, double x,
                                double theta) {
    check_domain(p, x);
    if (theta < 0.0)
        throw std::domain_error("joint_observed_transform: theta >= 0");
    const double q = p.q(), g = p.gamma();
    const double psi_t = laplace_exponent(p.eq->model(), theta);
    const double denom = q + g - psi_t;
    if (std::abs(denom) < 1e-10 * (q + g))
        throw std::domain_error(
            "joint_observed_transform: psi(theta) = q + gamma pole; "
            "perturb theta");
    const double z2bx_phi = p.eq->Z2(p.b - x, p.phi_qg());
    const double num =
        p.eq->Z2(p.b - x, theta) +
        z2bx_phi *
            (p.eq->W(p.b) * (psi_t - q) - theta * p.eq->Z2(p.b, theta)) /
            p.z2_prime_b();
    return g * num / denom;
}

double observed_overshoot_lt(const KernelParams& p, double x) {
    check_domain(p, x);
    const double q = p.q(), g = p.gamma();
    const double psi0 = psi_prime_at_zero(p.eq->model());
    const double phig = p.phi_qg();
    const double z2p = p.z2_prime_b();
    const double zbx = p.eq->Z(p.b - x);
    const double z2bx = p.eq->Z2(p.b - x, phig);
    const double wbar = (zbx - 1.0) / q;  // int_0^{b-x} W_q
    return g * psi0 / ((q + g) * (q + g)) *
               (zbx - q * p.eq->W(p.b) * z2bx / z2p) +
           g / (q + g) *
               (p.eq->Zbar(p.b - x) - psi0 * wbar +
                z2bx * (p.eq->W(p.b) * psi0 - p.eq->Z(p.b)) / z2p);
}

double reflected_passage_exp_transform(const KernelParams& p, double x) {
    check_domain(p, x);
    return p.eq->Z2(p.b - x, p.phi_qg()) -
           p.eq->W(p.b - x) / p.eq->W_prime_plus(p.b) * p.z2_prime_b();
}

double reflected_scale_at_passage(const KernelParams& p, double x, double y) {
    if (x <= 0.0 || x >= p.b)
        throw std::domain_error("reflected_scale_at_passage: x in (0, b)");
    if (y <= 0.0)
        throw std::domain_error("reflected_scale_at_passage: y > 0");
    return conv_w_kernel(p, p.b - x, y) -
           p.eq->W(p.b - x) / p.eq->W_prime_plus(p.b) *
               conv_w_kernel_dv(p, p.b, y);
}

double killed_passage_lt_kernel(const KernelParams& p, double x) {
    if (x <= 0.0)
        throw std::domain_error("killed_passage_lt: x must be > 0");
    const double q = p.q(), g = p.gamma(), phig = p.phi_qg();
    return (g * p.eq->Z(p.b - x) + q * p.eq->Z2(p.b - x, phig)) /
           (g * p.eq->Z(p.b) + q * p.eq->Z2(p.b, phig));
}

// ---------------------------------------------------------------------
// tail kernel factories
// ---------------------------------------------------------------------

std::unique_ptr<TailKernel> make_value_tail(const KernelParams& p, double x) {
    const double q = p.q(), g = p.gamma(), phig = p.phi_qg();
    const double v = p.b - x;
    const double zv = p.eq->Z(v);
    const double cx = phig * p.eq->Z2(p.b, phig) /
                      (q * p.eq->Z2(v, phig) + g * zv);
    if (p.eq->exact() && p.eqg->exact()) {
        if (v >= 0.0) {
            auto coef = [&](cplx xi, cplx ek) {
                return ek * (p.eq->Z2c(p.b, xi) -
                             cx * (q * p.eq->Z2c(v, xi) + g * zv) / xi);
            };
            return std::make_unique<ExpSumTail>(root_sum(p, coef, true));
        }
        // x > b: for y < -v the payoff-side bracket reads
        // H(b,y) - C_x (1 + g (Z_{q+g}(y) - 1)/(q+g)); past -v the
        // e^{xi v} conventions kick in and the Phi term cancels
        ExpSum left = root_sum(
            p,
            [&](cplx xi, cplx ek) {
                return ek * (p.eq->Z2c(p.b, xi) - cx * g / xi);
            },
            false);
        left.add_real(0.0, -cx * q / (q + g));
        ExpSum right = root_sum(
            p,
            [&](cplx xi, cplx ek) {
                return ek * (p.eq->Z2c(p.b, xi) -
                             cx * (q * std::exp(xi * v) + g) / xi);
            },
            true);
        return std::make_unique<PiecewiseTail>(-v, std::move(left),
                                               std::move(right));
    }
    const bool closed_tail = v >= 0.0;
    const double hat0 =
        closed_tail
            ? (-p.eq->Z(p.b) +
               cx * (psi_prime_at_zero(p.eq->model()) + q * p.eq->Zbar(v))) /
                  (q + g)
            : 0.0;
    auto f = [p, v, cx](double u) {
        return conv_w_kernel(p, p.b, u) - cx * conv_z_kernel(p, v, u);
    };
    return std::make_unique<QuadTail>(f, hat0, closed_tail);
}

std::unique_ptr<TailKernel> make_deriv_tail_lower(const KernelParams& p,
                                                  double x) {
    check_domain(p, x);
    const double v = p.b - x, phig = p.phi_qg();
    const double cd = p.eq->Z2(p.b, phig) / p.eq->Z2(v, phig);
    if (p.eq->exact() && p.eqg->exact()) {
        auto coef = [&](cplx xi, cplx ek) {
            return ek * (p.eq->Z2c(p.b, xi) - cd * p.eq->Z2c(v, xi));
        };
        return std::make_unique<ExpSumTail>(root_sum(p, coef, true));
    }
    const double hat0 =
        (-p.eq->Z(p.b) + cd * p.eq->Z(v)) / (p.q() + p.gamma());
    auto f = [p, v, cd](double u) {
        return conv_w_kernel(p, p.b, u) - cd * conv_w_kernel(p, v, u);
    };
    return std::make_unique<QuadTail>(f, hat0, true);
}

std::unique_ptr<TailKernel> make_deriv_tail_upper(const KernelParams& p,
                                                  double x) {
    if (x < p.b)
        throw std::domain_error("make_deriv_tail_upper: x >= b");
    const double d = x - p.b, phig = p.phi_qg();
    const double cu = p.eq->Z2(p.b, phig) * std::exp(phig * d);
    if (p.eq->exact() && p.eqg->exact()) {
        ExpSum left = root_sum(
            p,
            [&](cplx xi, cplx ek) { return ek * p.eq->Z2c(p.b, xi); },
            false);
        ExpSum right = root_sum(
            p,
            [&](cplx xi, cplx ek) {
                return ek * (p.eq->Z2c(p.b, xi) - cu * std::exp(-xi * d));
            },
            true);
        return std::make_unique<PiecewiseTail>(d, std::move(left),
                                               std::move(right));
    }
    const double hat0 = (-p.eq->Z(p.b) + cu) / (p.q() + p.gamma());
    auto f = [p, d, cu](double u) {
        return conv_w_kernel(p, p.b, u) - cu * p.eqg->W(u - d);
    };
    return std::make_unique<QuadTail>(f, hat0, true);
}

std::unique_ptr<TailKernel> make_single_density_tail(const KernelParams& p,
                                                     double x) {
    if (x <= 0.0)
        throw std::domain_error("make_single_density_tail: x > 0");
    const double q = p.q(), g = p.gamma(), phig = p.phi_qg();
    const double v = p.b - x;
    const double lt = killed_passage_lt_kernel(p, x);
    const double z2v = p.eq->Z2(v, phig), z2b = p.eq->Z2(p.b, phig);
    if (p.eq->exact() && p.eqg->exact()) {
        auto coef = [&](cplx xi, cplx ek) {
            return ek * q *
                   ((z2v - p.eq->Z2c(v, xi)) +
                    lt * (p.eq->Z2c(p.b, xi) - z2b));
        };
        if (v >= 0.0)
            return std::make_unique<ExpSumTail>(root_sum(p, coef, true));
        ExpSum left = root_sum(
            p,
            [&](cplx xi, cplx ek) {
                return ek * q *
                       (z2v + lt * (p.eq->Z2c(p.b, xi) - z2b));
            },
            false);
        ExpSum right = root_sum(p, coef, true);
        return std::make_unique<PiecewiseTail>(-v, std::move(left),
                                               std::move(right));
    }
    const double hat0 =
        q / (q + g) * (p.eq->Z(v) - z2v + lt * (z2b - p.eq->Z(p.b)));
    auto f = [p, v, lt, z2v, z2b, q](double u) {
        return q * (z2v * p.eqg->W(u) - conv_w_kernel(p, v, u)) +
               q * lt * (conv_w_kernel(p, p.b, u) - z2b * p.eqg->W(u));
    };
    return std::make_unique<QuadTail>(f, hat0, true);
}

std::unique_ptr<TailKernel> make_double_density_tail(const KernelParams& p,
                                                     double x) {
    if (x < 0.0)
        throw std::domain_error("make_double_density_tail: x >= 0");
    const double q = p.q(), g = p.gamma(), phig = p.phi_qg();
    const double v = p.b - x;
    const double zv = p.eq->Z(v);
    const double a_coef = (q * p.eq->Z2(v, phig) + g * zv) /
                          (phig * p.eq->Z2(p.b, phig));
    if (p.eq->exact() && p.eqg->exact()) {
        auto coef = [&](cplx xi, cplx ek) {
            return ek * (a_coef * xi * p.eq->Z2c(p.b, xi) - g * zv -
                         q * p.eq->Z2c(v, xi));
        };
        if (v >= 0.0)
            return std::make_unique<ExpSumTail>(root_sum(p, coef, true));
        ExpSum left = root_sum(
            p,
            [&](cplx xi, cplx ek) {
                return ek * (a_coef * xi * p.eq->Z2c(p.b, xi) - g);
            },
            false);
        ExpSum right = root_sum(p, coef, true);
        return std::make_unique<PiecewiseTail>(-v, std::move(left),
                                               std::move(right));
    }
    const double hat0 = -a_coef * p.eq->W(p.b) + zv;
    const double wb = p.eq->W(p.b);
    auto f = [p, v, a_coef, wb, zv, g, q](double u) {
        return a_coef * (g * wb * p.eqg->W(u) + conv_w_kernel_dv(p, p.b, u)) -
               g * zv * p.eqg->W(u) - q * conv_w_kernel(p, v, u);
    };
    return std::make_unique<QuadTail>(f, hat0, true);
}

}  // namespace divcap

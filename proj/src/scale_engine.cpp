#include "divcap/scale_engine.hpp"

#include <algorithm>
#include <mutex>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "divcap/quadrature.hpp"

namespace divcap {

namespace {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------
// polynomial helpers (coefficients ascending in degree)
// ---------------------------------------------------------------------

std::vector<double> poly_mul(const std::vector<double>& a,
                             const std::vector<double>& b) {
    std::vector<double> r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

void poly_add(std::vector<double>& a, const std::vector<double>& b) {
    if (b.size() > a.size()) a.resize(b.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
}

cplx poly_eval(const std::vector<double>& a, cplx s) {
    cplx v = 0.0;
    for (std::size_t i = a.size(); i-- > 0;) v = v * s + a[i];
    return v;
}

// Durand-Kerner iteration; roots are simple for distinct hyperexponential
// rates, which the model validator enforces.
std::vector<cplx> poly_roots(std::vector<double> a) {
    while (!a.empty() && a.back() == 0.0) a.pop_back();
    const std::size_t n = a.size() - 1;
    const double lead = a.back();
    for (auto& c : a) c /= lead;
    std::vector<cplx> z(n);
    double radius = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        radius = std::max(radius, std::abs(a[i]));
    radius = 1.0 + radius;
    for (std::size_t i = 0; i < n; ++i) {
        const double ang =
            2.0 * std::numbers::pi * static_cast<double>(i) /
                static_cast<double>(n) +
            0.4;
        z[i] = radius * cplx(std::cos(ang), std::sin(ang));
    }
    for (int it = 0; it < 500; ++it) {
        double move = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cplx denom = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) denom *= (z[i] - z[j]);
            const cplx step = poly_eval(a, z[i]) / denom;
            z[i] -= step;
            move = std::max(move, std::abs(step));
        }
        if (move < 1e-14 * radius) break;
    }
    return z;
}

}  // namespace

struct ScaleEngine::TiltCache {
    std::mutex mu;
    double h = 1.0 / 256.0;
    std::vector<double> v;  // tilted values at i*h
};

ScaleEngine ScaleEngine::build(const SpectrallyPositiveModel& model, double q,
                               ScaleBackend backend) {
    if (q <= 0.0) throw std::domain_error("ScaleEngine: q must be > 0");
    model.validate();

    ScaleEngine e;
    e.model_ = model;
    e.q_ = q;
    e.phi_q_ = phi_q(model, q);
    e.w0_ = is_bounded_variation(model) ? 1.0 / model.drift_c : 0.0;

    const bool hyper = std::holds_alternative<Hyperexponential>(model.jumps);
    e.exact_ = (backend == ScaleBackend::Exact) ||
               (backend == ScaleBackend::Auto && hyper);
    if (e.exact_ && !hyper)
        throw std::invalid_argument(
            "ScaleEngine: exact backend needs hyperexponential jumps");
    if (!e.exact_) {
        e.tilt_ = std::make_shared<TiltCache>();
        return e;
    }

    // psi(s) - q = 0  <=>  P(s) = 0 with
    // P(s) = (c s + sigma^2 s^2/2 - (a+q)) prod_k (eta_k + s)
    //        + a sum_k p_k eta_k prod_{j != k} (eta_j + s).
    const auto& hx = std::get<Hyperexponential>(model.jumps);
    const double a = hx.weights.empty() ? 0.0 : hx.arrival_rate;
    std::vector<double> lin;
    if (model.sigma > 0.0)
        lin = {-(a + q), model.drift_c, 0.5 * model.sigma * model.sigma};
    else
        lin = {-(a + q), model.drift_c};
    std::vector<double> poly = lin;
    for (double eta : hx.rates) poly = poly_mul(poly, {eta, 1.0});
    for (std::size_t k = 0; k < hx.rates.size(); ++k) {
        std::vector<double> t = {a * hx.weights[k] * hx.rates[k]};
        for (std::size_t j = 0; j < hx.rates.size(); ++j)
            if (j != k) t = poly_mul(t, {hx.rates[j], 1.0});
        poly_add(poly, t);
    }

    auto roots = poly_roots(poly);
    // polish with Newton on psi - q itself
    for (auto& z : roots) {
        for (int it = 0; it < 60; ++it) {
            const cplx f = laplace_exponent(model, z) - q;
            const cplx df = laplace_exponent_derivative(model, z);
            const cplx step = f / df;
            z -= step;
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
        }
        if (std::abs(z.imag()) < 1e-10 * (1.0 + std::abs(z.real())))
            z = cplx(z.real(), 0.0);
    }
    for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j)
            if (std::abs(roots[i] - roots[j]) <
                1e-7 * (1.0 + std::abs(roots[i])))
                throw std::invalid_argument(
                    "ScaleEngine: repeated roots of psi(s)=q; perturb the "
                    "hyperexponential rates");

    // exactly one root in the right half plane: Phi_q (pin to the
    // bisection value so both code paths agree bit-for-bit)
    int pos = -1;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (roots[i].real() > 0.0) {
            if (pos >= 0)
                throw std::runtime_error(
                    "ScaleEngine: multiple roots with positive real part");
            pos = static_cast<int>(i);
        }
    }
    if (pos < 0) throw std::runtime_error("ScaleEngine: Phi_q root missing");
    roots[static_cast<std::size_t>(pos)] = e.phi_q_;

    e.roots_ = std::move(roots);
    e.coeffs_.reserve(e.roots_.size());
    for (const auto& z : e.roots_)
        e.coeffs_.push_back(1.0 / laplace_exponent_derivative(model, z));

    // keep only one member of each conjugate pair in the ExpSum
    std::vector<bool> used(e.roots_.size(), false);
    for (std::size_t i = 0; i < e.roots_.size(); ++i) {
        if (used[i]) continue;
        if (e.roots_[i].imag() == 0.0) {
            e.wsum_.add_real(e.roots_[i].real(), e.coeffs_[i].real());
            continue;
        }
        std::size_t mate = i;
        for (std::size_t j = i + 1; j < e.roots_.size(); ++j)
            if (!used[j] &&
                std::abs(e.roots_[j] - std::conj(e.roots_[i])) <
                    1e-9 * (1.0 + std::abs(e.roots_[i]))) {
                mate = j;
                break;
            }
        if (mate == i)
            throw std::runtime_error("ScaleEngine: unpaired complex root");
        used[mate] = true;
        const auto r = e.roots_[i].imag() > 0.0 ? e.roots_[i]
                                                : std::conj(e.roots_[i]);
        const auto c = e.roots_[i].imag() > 0.0 ? e.coeffs_[i]
                                                : std::conj(e.coeffs_[i]);
        e.wsum_.add_pair(r, c);
    }

    // build sanity: W(0+) from the coefficients matches the dichotomy
    const double w0 = e.wsum_.eval(0.0);
    if (std::abs(w0 - e.w0_) > 1e-8 * (1.0 + std::abs(e.w0_)))
        throw std::runtime_error("ScaleEngine: W(0+) check failed");
    return e;
}

const ExpSum& ScaleEngine::w_sum() const {
    if (!exact_)
        throw std::logic_error("ScaleEngine::w_sum: inversion backend");
    return wsum_;
}

double ScaleEngine::W0_plus() const { return w0_; }

// Euler-summed Bromwich-line rule (Abate-Whitt) with 64 fixed nodes,
// applied to the shifted transform F(s) = 1/(psi(s + Phi_q) - q). The
// line Re s = A/(2x) > 0 stays right of every singularity for any jump
// family; in particular it handles compact-support tabulated densities,
// whose psi(s) = q zero set has bounded real part but unbounded
// imaginary part and therefore defeats left-bending contours. A = 28
// puts the discretization error near 7e-13 and the roundoff floor near
// e^{A/2} eps ~ 1e-10; the binomial Euler weights sum the slowly
// alternating line series.
double ScaleEngine::talbot_tilted(double x) const {
    constexpr int kBurn = 40;   // plain partial sums
    constexpr int kEuler = 23;  // Euler-averaged tail terms
    constexpr double A = 28.0;  // 64 nodes total: kBurn + kEuler + 1
    const auto F = [&](cplx s) {
        return 1.0 / (laplace_exponent(model_, s + phi_q_) - q_);
    };
    const double re = A / (2.0 * x);
    const auto term = [&](int k) {
        const double s = (k % 2 == 0) ? 1.0 : -1.0;
        return s * F(cplx(re, k * std::numbers::pi / x)).real();
    };
    double partial = 0.5 * F(cplx(re, 0.0)).real();
    for (int k = 1; k <= kBurn; ++k) partial += term(k);
    // f ~ (e^{A/2}/x) sum_j 2^{-M} C(M,j) S_{N+j}
    double euler = 0.0, binom = std::pow(0.5, kEuler);
    for (int j = 0; j <= kEuler; ++j) {
        if (j > 0) {
            partial += term(kBurn + j);
            binom *= static_cast<double>(kEuler - j + 1) /
                     static_cast<double>(j);
        }
        euler += binom * partial;
    }
    return std::exp(0.5 * A) / x * euler;
}

// cubic interpolation on the uniform tilted-value grid; grid values are
// filled by fixed-Talbot runs and never change once written, so the
// cached evaluation is deterministic
double ScaleEngine::tilted_cached(double x) const {
    auto& c = *tilt_;
    std::lock_guard<std::mutex> lock(c.mu);
    const std::size_t need =
        static_cast<std::size_t>(std::floor(x / c.h)) + 3;
    if (c.v.size() <= need) {
        if (c.v.empty()) c.v.push_back(w0_);
        while (c.v.size() <= need)
            c.v.push_back(
                talbot_tilted(static_cast<double>(c.v.size()) * c.h));
    }
    std::size_t i = static_cast<std::size_t>(std::floor(x / c.h));
    if (i == 0) i = 1;
    if (i + 2 >= c.v.size()) i = c.v.size() - 3;
    const double t = x / c.h - static_cast<double>(i);
    const double f0 = c.v[i - 1], f1 = c.v[i], f2 = c.v[i + 1],
                 f3 = c.v[i + 2];
    return f1 + t * (0.5 * (f2 - f0) +
                     t * (f0 - 2.5 * f1 + 2.0 * f2 - 0.5 * f3 +
                          t * (0.5 * (f3 - f0) + 1.5 * (f1 - f2))));
}

double ScaleEngine::W(double x) const {
    if (x < 0.0) return 0.0;
    if (x == 0.0) return w0_;
    if (exact_) return wsum_.eval(x);
    if (x > 400.0) return std::exp(phi_q_ * x) * talbot_tilted(x);
    return std::exp(phi_q_ * x) * tilted_cached(x);
}

double ScaleEngine::W_prime_plus(double x) const {
    if (x <= 0.0)
        throw std::domain_error("W_prime_plus: x must be > 0");
    if (exact_) return wsum_.derivative().eval(x);
    const double h = 1e-6 * std::max(1.0, x);
    return (W(x + h) - W(x - h)) / (2.0 * h);
}

double ScaleEngine::Z(double x) const {
    if (x <= 0.0) return 1.0;
    if (exact_) {
        double s = 1.0;
        for (std::size_t i = 0; i < roots_.size(); ++i)
            s += (q_ * coeffs_[i] * (std::exp(roots_[i] * x) - 1.0) /
                  roots_[i])
                     .real();
        return s;
    }
    return 1.0 + q_ * integrate([&](double y) { return W(y); }, 0.0, x);
}

double ScaleEngine::Zbar(double x) const {
    if (x <= 0.0) return x;
    if (exact_) {
        double s = x;
        for (std::size_t i = 0; i < roots_.size(); ++i) {
            const cplx r = roots_[i];
            s += (q_ * coeffs_[i] *
                  ((std::exp(r * x) - 1.0) / r - x) / r)
                     .real();
        }
        return s;
    }
    // int_0^x Z = x + q int_0^x (x - y) W(y) dy
    return x + q_ * integrate([&](double y) { return (x - y) * W(y); }, 0.0,
                              x);
}

std::complex<double> ScaleEngine::Z2c(double x, cplx s) const {
    if (x < 0.0) return std::exp(s * x);
    if (x == 0.0) return 1.0;
    const cplx psi_s = laplace_exponent(model_, s);
    if (exact_) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < roots_.size(); ++i) {
            const cplx d = roots_[i] - s;
            if (std::abs(d) < 1e-12)
                acc += coeffs_[i] * x;
            else
                acc += coeffs_[i] * (std::exp(d * x) - 1.0) / d;
        }
        return std::exp(s * x) * (1.0 - (psi_s - q_) * acc);
    }
    // exp(s x) (1 - (psi(s)-q) I) with I = int_0^x e^{-s y} W(y) dy,
    // evaluated as e^{s(x-y)} under the integral for stability
    const double j_re = integrate(
        [&](double y) { return (std::exp(s * (x - y)) * W(y)).real(); }, 0.0,
        x);
    const double j_im = integrate(
        [&](double y) { return (std::exp(s * (x - y)) * W(y)).imag(); }, 0.0,
        x);
    return std::exp(s * x) - (psi_s - q_) * cplx(j_re, j_im);
}

double ScaleEngine::Z2(double x, double s) const {
    if (s < 0.0) throw std::domain_error("Z2: s must be >= 0");
    return Z2c(x, cplx(s, 0.0)).real();
}

double conv_W(const ScaleEngine& ep, const ScaleEngine& eq, double x,
              double y) {
    if (y <= 0.0) return 0.0;
    if (x < 0.0) throw std::domain_error("conv_W: x must be >= 0");
    if (ep.exact() && eq.exact()) {
        cplx acc = 0.0;
        const auto& rp = ep.roots();
        const auto& cp = ep.coeffs();
        const auto& rq = eq.roots();
        const auto& cq = eq.coeffs();
        for (std::size_t j = 0; j < rp.size(); ++j)
            for (std::size_t k = 0; k < rq.size(); ++k) {
                const cplx d = rq[k] - rp[j];
                cplx inner;
                if (std::abs(d) < 1e-12)
                    inner = y;
                else
                    inner = (std::exp(d * y) - 1.0) / d;
                acc += cp[j] * cq[k] * std::exp(rp[j] * (x + y)) * inner;
            }
        return acc.real();
    }
    return integrate(
        [&](double z) { return ep.W(x + y - z) * eq.W(z); }, 0.0, y);
}

}  // namespace divcap

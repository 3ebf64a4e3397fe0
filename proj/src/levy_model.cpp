#include "divcap/levy_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "divcap/quadrature.hpp"

namespace divcap {

namespace {

// trapezoid of f(z_i) * density_i over the tabulated grid
template <class T, class F>
T tabulated_integral(const TabulatedDensity& tab, const F& f) {
    T acc{};
    for (std::size_t i = 0; i + 1 < tab.z.size(); ++i) {
        const T fa = f(tab.z[i]) * tab.density[i];
        const T fb = f(tab.z[i + 1]) * tab.density[i + 1];
        acc += 0.5 * (tab.z[i + 1] - tab.z[i]) * (fa + fb);
    }
    return acc;
}

// exp with the real part clamped so Laplace-inversion contours far in the
// left half plane produce huge-but-finite psi values instead of inf/NaN
inline std::complex<double> safe_exp(std::complex<double> w) {
    if (w.real() > 690.0) w = {690.0, w.imag()};
    return std::exp(w);
}
inline double safe_exp(double w) { return std::exp(std::min(w, 690.0)); }

// phi_1(w) = (e^w - 1)/w and phi_2(w) = (e^w - 1 - w)/w^2 with their
// derivatives, Taylor-expanded near 0. These give the exact transform of
// the piecewise-linear tabulated density per grid cell, which stays
// accurate at complex s where a plain trapezoid rule undersamples the
// oscillation.
template <class T>
void phi12(T w, T& p1, T& p2, T& dp1, T& dp2) {
    if (std::abs(w) < 0.5) {
        p1 = 1.0 + w * (1.0 / 2 + w * (1.0 / 6 + w * (1.0 / 24 +
             w * (1.0 / 120 + w * (1.0 / 720 + w / 5040.0)))));
        p2 = 1.0 / 2 + w * (1.0 / 6 + w * (1.0 / 24 + w * (1.0 / 120 +
             w * (1.0 / 720 + w * (1.0 / 5040 + w / 40320.0)))));
        dp1 = 1.0 / 2 + w * (1.0 / 3 + w * (1.0 / 8 + w * (1.0 / 30 +
              w * (1.0 / 144 + w / 840.0))));
        dp2 = 1.0 / 6 + w * (1.0 / 12 + w * (1.0 / 40 + w * (1.0 / 180 +
              w * (1.0 / 1008 + w / 6720.0))));
    } else {
        const T e = safe_exp(w);
        p1 = (e - 1.0) / w;
        p2 = (e - 1.0 - w) / (w * w);
        dp1 = (e * (w - 1.0) + 1.0) / (w * w);
        dp2 = (e * (w - 2.0) + w + 2.0) / (w * w * w);
    }
}

// int (e^{-s z} - 1) nu(dz) and its s-derivative for the piecewise-linear
// tabulated density, cell-exact. On a uniform grid the per-cell phase
// factors follow a single-multiply recurrence.
template <class T>
T tabulated_psi_jump(const TabulatedDensity& tab, T s, T* deriv) {
    const std::size_t n = tab.z.size();
    const double dz0 = tab.z[1] - tab.z[0];
    bool uniform = true;
    for (std::size_t i = 1; i + 1 < n && uniform; ++i)
        uniform = std::abs((tab.z[i + 1] - tab.z[i]) - dz0) < 1e-9 * dz0;

    T acc{}, dacc{};
    if (uniform) {
        const T w = -s * dz0;
        T p1, p2, dp1, dp2;
        phi12(w, p1, p2, dp1, dp2);
        T pre = safe_exp(-s * tab.z[0]) * dz0;
        const T step = safe_exp(-s * dz0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double n0 = tab.density[i], n1 = tab.density[i + 1];
            const T cell = pre * (n0 * p1 + (n1 - n0) * p2);
            acc += cell - 0.5 * dz0 * (n0 + n1);
            if (deriv)
                dacc += -tab.z[i] * cell -
                        pre * dz0 * (n0 * dp1 + (n1 - n0) * dp2);
            pre *= step;
        }
    } else {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double z0 = tab.z[i], dz = tab.z[i + 1] - tab.z[i];
            const double n0 = tab.density[i], n1 = tab.density[i + 1];
            const T w = -s * dz;
            T p1, p2, dp1, dp2;
            phi12(w, p1, p2, dp1, dp2);
            const T pre = safe_exp(-s * z0) * dz;
            const T cell = pre * (n0 * p1 + (n1 - n0) * p2);
            acc += cell - 0.5 * dz * (n0 + n1);
            if (deriv)
                dacc += -z0 * cell - pre * dz * (n0 * dp1 + (n1 - n0) * dp2);
        }
    }
    if (deriv) *deriv = dacc;
    return acc;
}

}  // namespace

void SpectrallyPositiveModel::validate() const {
    if (sigma < 0.0) throw std::invalid_argument("model: sigma must be >= 0");
    if (sigma == 0.0 && drift_c <= 0.0)
        throw std::invalid_argument(
            "model: bounded-variation process requires drift_c > 0");
    if (const auto* hx = std::get_if<Hyperexponential>(&jumps)) {
        if (hx->weights.size() != hx->rates.size())
            throw std::invalid_argument("model: weights/rates size mismatch");
        if (!hx->weights.empty()) {
            if (hx->arrival_rate <= 0.0)
                throw std::invalid_argument("model: arrival_rate must be > 0");
            double wsum = 0.0;
            for (double w : hx->weights) {
                if (w <= 0.0)
                    throw std::invalid_argument("model: weights must be > 0");
                wsum += w;
            }
            if (std::abs(wsum - 1.0) > 1e-12)
                throw std::invalid_argument(
                    "model: hyperexponential weights must sum to 1");
            for (std::size_t i = 0; i < hx->rates.size(); ++i) {
                if (hx->rates[i] <= 0.0)
                    throw std::invalid_argument("model: rates must be > 0");
                for (std::size_t j = i + 1; j < hx->rates.size(); ++j)
                    if (hx->rates[i] == hx->rates[j])
                        throw std::invalid_argument(
                            "model: hyperexponential rates must be distinct");
            }
        }
    } else {
        const auto& tab = std::get<TabulatedDensity>(jumps);
        if (tab.z.size() != tab.density.size() || tab.z.size() < 2)
            throw std::invalid_argument("model: tabulated grid too small");
        if (tab.z.front() <= 0.0)
            throw std::invalid_argument("model: tabulated grid must start > 0");
        for (std::size_t i = 0; i + 1 < tab.z.size(); ++i)
            if (tab.z[i + 1] <= tab.z[i])
                throw std::invalid_argument(
                    "model: tabulated grid must be increasing");
        for (double d : tab.density)
            if (d < 0.0)
                throw std::invalid_argument("model: density must be >= 0");
    }
}

bool SpectrallyPositiveModel::has_jumps() const {
    if (const auto* hx = std::get_if<Hyperexponential>(&jumps))
        return !hx->weights.empty() && hx->arrival_rate > 0.0;
    return true;
}

double SpectrallyPositiveModel::jump_arrival_rate() const {
    if (const auto* hx = std::get_if<Hyperexponential>(&jumps))
        return hx->weights.empty() ? 0.0 : hx->arrival_rate;
    const auto& tab = std::get<TabulatedDensity>(jumps);
    return tabulated_integral<double>(tab, [](double) { return 1.0; });
}

double SpectrallyPositiveModel::jump_mean() const {
    const double mass = jump_arrival_rate();
    if (mass == 0.0) return 0.0;
    if (const auto* hx = std::get_if<Hyperexponential>(&jumps)) {
        double m = 0.0;
        for (std::size_t k = 0; k < hx->weights.size(); ++k)
            m += hx->weights[k] / hx->rates[k];
        return m;
    }
    const auto& tab = std::get<TabulatedDensity>(jumps);
    return tabulated_integral<double>(tab, [](double z) { return z; }) / mass;
}

namespace {

template <class T>
T psi_impl(const SpectrallyPositiveModel& m, T theta) {
    T v = m.drift_c * theta + 0.5 * m.sigma * m.sigma * theta * theta;
    if (const auto* hx = std::get_if<Hyperexponential>(&m.jumps)) {
        if (!hx->weights.empty()) {
            T jump{};
            for (std::size_t k = 0; k < hx->weights.size(); ++k)
                jump += hx->weights[k] * hx->rates[k] / (hx->rates[k] + theta);
            v += hx->arrival_rate * (jump - 1.0);
        }
    } else {
        const auto& tab = std::get<TabulatedDensity>(m.jumps);
        v += tabulated_psi_jump<T>(tab, theta, nullptr);
    }
    return v;
}

template <class T>
T psi_deriv_impl(const SpectrallyPositiveModel& m, T theta) {
    T v = m.drift_c + m.sigma * m.sigma * theta;
    if (const auto* hx = std::get_if<Hyperexponential>(&m.jumps)) {
        for (std::size_t k = 0; k < hx->weights.size(); ++k) {
            const T d = hx->rates[k] + theta;
            v -= hx->arrival_rate * hx->weights[k] * hx->rates[k] / (d * d);
        }
    } else {
        const auto& tab = std::get<TabulatedDensity>(m.jumps);
        T d{};
        (void)tabulated_psi_jump<T>(tab, theta, &d);
        v += d;
    }
    return v;
}

}  // namespace

double laplace_exponent(const SpectrallyPositiveModel& model, double theta) {
    if (theta < 0.0)
        throw std::domain_error("laplace_exponent: theta must be >= 0");
    return psi_impl<double>(model, theta);
}

std::complex<double> laplace_exponent(const SpectrallyPositiveModel& model,
                                      std::complex<double> theta) {
    return psi_impl<std::complex<double>>(model, theta);
}

double laplace_exponent_derivative(const SpectrallyPositiveModel& model,
                                   double theta) {
    return psi_deriv_impl<double>(model, theta);
}

std::complex<double> laplace_exponent_derivative(
    const SpectrallyPositiveModel& model, std::complex<double> theta) {
    return psi_deriv_impl<std::complex<double>>(model, theta);
}

double psi_prime_at_zero(const SpectrallyPositiveModel& model) {
    return psi_deriv_impl<double>(model, 0.0);
}

double phi_q(const SpectrallyPositiveModel& model, double q) {
    if (q <= 0.0) throw std::domain_error("phi_q: q must be > 0");
    // bracket [lo, hi] with psi(hi) > q; psi is convex, psi(0) = 0
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (psi_impl<double>(model, hi) <= q) {
        hi *= 2.0;
        if (++guard > 200) throw std::runtime_error("phi_q: bracket failed");
    }
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = psi_impl<double>(model, s) - q;
        if (f > 0.0)
            hi = s;
        else
            lo = s;
        const double df = psi_deriv_impl<double>(model, s);
        double next = s - f / df;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - s) <= 1e-12 * std::max(1.0, std::abs(next))) {
            s = next;
            break;
        }
        s = next;
    }
    return s;
}

bool is_bounded_variation(const SpectrallyPositiveModel& model) {
    // supported jump families all have finite activity, so bounded
    // variation reduces to sigma == 0
    return model.sigma == 0.0;
}

}  // namespace divcap

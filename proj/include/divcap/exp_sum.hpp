#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace divcap {

// Finite sum  y |-> sum_j Re( c_j e^{r_j y} )  with complex-conjugate root
// pairs combined so that pointwise evaluation stays in real arithmetic.
// Scale functions of hyperexponential models, and every tail kernel built
// from them, live in this class.
class ExpSum {
  public:
    ExpSum() = default;

    // Adds one term; a conjugate pair must be added via add_pair.
    void add_real(double rate, double coef) {
        terms_.push_back({rate, 0.0, coef, 0.0, false});
    }
    // Adds c e^{r y} + conj(c) e^{conj(r) y} (pass the Im>0 member).
    void add_pair(std::complex<double> rate, std::complex<double> coef) {
        terms_.push_back({rate.real(), rate.imag(), coef.real(), coef.imag(),
                          true});
    }
    void add(std::complex<double> rate, std::complex<double> coef) {
        if (rate.imag() == 0.0)
            add_real(rate.real(), coef.real());
        else
            add_pair(rate, coef);
    }

    bool empty() const { return terms_.empty(); }

    double eval(double y) const {
        double s = 0.0;
        for (const auto& t : terms_) {
            const double e = std::exp(t.a * y);
            if (t.pair)
                s += 2.0 * e *
                     (t.cr * std::cos(t.w * y) - t.ci * std::sin(t.w * y));
            else
                s += t.cr * e;
        }
        return s;
    }

    // int_{y0}^{y1} eval
    double integral(double y0, double y1) const {
        double s = 0.0;
        for (const auto& t : terms_) s += term_integral(t, y0, y1);
        return s;
    }

    // int_{y0}^{infty} eval; requires every rate to have negative real part
    double integral_tail(double y0) const {
        double s = 0.0;
        for (const auto& t : terms_) {
            if (t.a >= 0.0) {
                if (std::abs(t.cr) + std::abs(t.ci) < 1e-300) continue;
                throw std::domain_error(
                    "ExpSum::integral_tail: non-decaying term");
            }
            const std::complex<double> r(t.a, t.w), c(t.cr, t.ci);
            const std::complex<double> v = -c * std::exp(r * y0) / r;
            s += t.pair ? 2.0 * v.real() : v.real();
        }
        return s;
    }

    // slowest decay among the terms (largest Re r); 0 if empty
    double dominant_rate() const {
        double m = -1e300;
        for (const auto& t : terms_) m = std::max(m, t.a);
        return terms_.empty() ? 0.0 : m;
    }

    // derivative d/dy as a new sum
    ExpSum derivative() const {
        ExpSum d;
        for (const auto& t : terms_) {
            const std::complex<double> r(t.a, t.w), c(t.cr, t.ci);
            const std::complex<double> rc = r * c;
            if (t.pair)
                d.add_pair(r, rc);
            else
                d.add_real(t.a, rc.real());
        }
        return d;
    }

  private:
    struct Term {
        double a, w, cr, ci;
        bool pair;
    };

    static double term_integral(const Term& t, double y0, double y1) {
        const std::complex<double> r(t.a, t.w), c(t.cr, t.ci);
        std::complex<double> v;
        if (std::abs(r) < 1e-14)
            v = c * (y1 - y0);
        else
            v = c * (std::exp(r * y1) - std::exp(r * y0)) / r;
        return t.pair ? 2.0 * v.real() : v.real();
    }

    std::vector<Term> terms_;
};

}  // namespace divcap

#include "divcap/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace divcap {

PayoffFunction::PayoffFunction(std::vector<double> xs, std::vector<double> vs,
                               double terminal_slope)
    : xs_(std::move(xs)), vs_(std::move(vs)),
      terminal_slope_(terminal_slope) {
    if (xs_.empty() || xs_.size() != vs_.size())
        throw std::invalid_argument("PayoffFunction: bad knot arrays");
    if (xs_.front() != 0.0)
        throw std::invalid_argument("PayoffFunction: first knot must be 0");
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
        if (xs_[i + 1] <= xs_[i])
            throw std::invalid_argument(
                "PayoffFunction: knots must be increasing");
}

double PayoffFunction::value(double x) const {
    if (x < 0.0)
        throw std::domain_error("PayoffFunction::value: x must be >= 0");
    if (x >= xs_.back())
        return vs_.back() + terminal_slope_ * (x - xs_.back());
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
    const double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
    return vs_[i] + t * (vs_[i + 1] - vs_[i]);
}

double PayoffFunction::right_slope(double x) const {
    if (x < 0.0)
        throw std::domain_error("PayoffFunction::right_slope: x >= 0");
    if (x >= xs_.back()) return terminal_slope_;
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
    return (vs_[i + 1] - vs_[i]) / (xs_[i + 1] - xs_[i]);
}

bool PayoffFunction::is_zero() const {
    if (terminal_slope_ != 0.0) return false;
    for (double v : vs_)
        if (v != 0.0) return false;
    return true;
}

void PayoffFunction::validate(double phi, double tol) const {
    double prev = phi;
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
        const double s = (vs_[i + 1] - vs_[i]) / (xs_[i + 1] - xs_[i]);
        if (s > prev + tol)
            throw std::invalid_argument(
                i == 0 ? "PayoffFunction: omega'_+(0+) exceeds phi"
                       : "PayoffFunction: not concave");
        prev = s;
    }
    if (terminal_slope_ > prev + tol)
        throw std::invalid_argument("PayoffFunction: not concave at tail");
    if (terminal_slope_ < -tol || terminal_slope_ > 1.0 + tol)
        throw std::invalid_argument(
            "PayoffFunction: terminal slope outside [0,1]");
}

PayoffFunction PayoffFunction::fit_concave(const std::vector<double>& xs,
                                           const std::vector<double>& vs,
                                           double terminal_slope,
                                           double* max_adjust) {
    if (xs.size() < 2) {
        if (max_adjust) *max_adjust = 0.0;
        return PayoffFunction({0.0}, {vs.empty() ? 0.0 : vs[0]},
                              terminal_slope);
    }
    const std::size_t n = xs.size() - 1;  // interval slopes + tail slot
    std::vector<double> s(n + 1), w(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = xs[i + 1] - xs[i];
        s[i] = (vs[i + 1] - vs[i]) / w[i];
    }
    s[n] = terminal_slope;
    w[n] = 1.0;

    // pool adjacent violators for a non-increasing sequence
    std::vector<double> val, wt;
    std::vector<std::size_t> cnt;
    for (std::size_t i = 0; i <= n; ++i) {
        val.push_back(s[i]);
        wt.push_back(w[i]);
        cnt.push_back(1);
        while (val.size() > 1 && val[val.size() - 2] < val.back()) {
            const double tw = wt[wt.size() - 2] + wt.back();
            const double tv = (val[val.size() - 2] * wt[wt.size() - 2] +
                               val.back() * wt.back()) /
                              tw;
            val.pop_back();
            wt.pop_back();
            const std::size_t c = cnt.back();
            cnt.pop_back();
            val.back() = tv;
            wt.back() = tw;
            cnt.back() += c;
        }
    }
    std::vector<double> shat;
    shat.reserve(n + 1);
    for (std::size_t blk = 0; blk < val.size(); ++blk)
        for (std::size_t r = 0; r < cnt[blk]; ++r) shat.push_back(val[blk]);

    std::vector<double> fitted(vs.size());
    fitted[0] = vs[0];
    double adj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fitted[i + 1] = fitted[i] + shat[i] * (xs[i + 1] - xs[i]);
        adj = std::max(adj, std::abs(fitted[i + 1] - vs[i + 1]));
    }
    adj = std::max(adj, std::abs(shat[n] - terminal_slope));
    if (max_adjust) *max_adjust = adj;
    return PayoffFunction(xs, std::move(fitted), shat[n]);
}

}  // namespace divcap

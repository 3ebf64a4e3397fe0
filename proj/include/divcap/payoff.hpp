#pragma once

#include <cstddef>
#include <vector>

namespace divcap {

// Piecewise-linear, continuous, concave payoff on [0, inf): knots
// (x_k, v_k) with x_0 = 0, linear in between, slope terminal_slope beyond
// the last knot. Doubles as the representation of the fixed-point
// iterates in the regime solver.
class PayoffFunction {
  public:
    PayoffFunction() : xs_{0.0}, vs_{0.0}, terminal_slope_(0.0) {}
    PayoffFunction(std::vector<double> xs, std::vector<double> vs,
                   double terminal_slope);

    static PayoffFunction zero() { return PayoffFunction(); }
    // omega(u) = slope * min(u, cap)
    static PayoffFunction capped_linear(double cap, double slope = 1.0) {
        return PayoffFunction({0.0, cap}, {0.0, slope * cap}, 0.0);
    }
    // concave projection of samples: slopes are pooled onto the
    // non-increasing cone (PAVA, interval-length weights); the largest
    // value adjustment is reported through max_adjust when non-null
    static PayoffFunction fit_concave(const std::vector<double>& xs,
                                      const std::vector<double>& vs,
                                      double terminal_slope,
                                      double* max_adjust = nullptr);

    double value(double x) const;        // x >= 0
    double right_slope(double x) const;  // omega'_+(x), x >= 0
    double terminal_slope() const { return terminal_slope_; }
    const std::vector<double>& knots() const { return xs_; }
    const std::vector<double>& values() const { return vs_; }
    std::size_t size() const { return xs_.size(); }
    bool is_zero() const;

    // throws std::invalid_argument unless concave with
    // omega'_+(0+) <= phi and terminal slope in [0,1]
    void validate(double phi, double tol = 1e-9) const;

  private:
    std::vector<double> xs_, vs_;
    double terminal_slope_;
};

}  // namespace divcap

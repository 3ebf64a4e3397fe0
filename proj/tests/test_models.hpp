#pragma once

// Shared test fixtures: the models exercised throughout the suite.

#include "divcap/levy_model.hpp"

namespace divcap::testing {

// c=1, unit-rate compound Poisson: psi(theta) = theta^2/(1+theta)
inline SpectrallyPositiveModel unit_model() {
    return {1.0, 0.0, Hyperexponential{1.0, {1.0}, {1.0}}};
}

// c=1.5, a=1, p=(0.6,0.4), eta=(1,3); the standard two-component case
inline SpectrallyPositiveModel canonical_model() {
    return {1.5, 0.0, Hyperexponential{1.0, {0.6, 0.4}, {1.0, 3.0}}};
}

// pure Brownian-with-drift: psi(theta) = theta + theta^2
inline SpectrallyPositiveModel brownian_model() {
    return {1.0, std::sqrt(2.0), Hyperexponential{0.0, {}, {}}};
}

// canonical jump structure plus a diffusion part
inline SpectrallyPositiveModel mixed_model() {
    return {1.5, 0.5, Hyperexponential{1.0, {0.6, 0.4}, {1.0, 3.0}}};
}

// truncated-exponential density tabulated on a grid; finite activity
inline SpectrallyPositiveModel tabulated_model(std::size_t n = 2000,
                                               double z_max = 25.0) {
    TabulatedDensity tab;
    tab.z.reserve(n);
    tab.density.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z =
            z_max * static_cast<double>(i + 1) / static_cast<double>(n);
        tab.z.push_back(z);
        tab.density.push_back(std::exp(-z));  // a=~1, Exp(1) jumps
    }
    return {1.5, 0.0, tab};
}

}  // namespace divcap::testing

#include "biad/lambert.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace biad {

namespace detail {

namespace {

constexpr double kInvE = 0.36787944117144232160;  // 1/e

double initial_guess(double z) {
    if (z < -0.25) {
        // Series around the branch point w(-1/e) = -1.
        const double r = std::sqrt(2.0 * (1.0 + std::exp(1.0) * z));
        return -1.0 + r - r * r / 3.0 + 11.0 / 72.0 * r * r * r;
    }
    if (z < 3.0) {
        return std::log1p(z);
    }
    const double l1 = std::log(z);
    const double l2 = std::log(l1);
    return l1 - l2 + l2 / l1;
}

}  // namespace

double lambert_w0_branch0(double z) {
    if (z < -kInvE) {
        // Tolerate rounding fuzz right at the branch point.
        if (z > -kInvE - 1e-12) return -1.0;
        throw std::domain_error("lambert_w0: argument " + std::to_string(z) + " below -1/e");
    }
    if (z == 0.0) return 0.0;

    double w = initial_guess(z);
    for (int iter = 0; iter < 60; ++iter) {
        const double ew = std::exp(w);
        const double f = w * ew - z;
        if (std::abs(f) <= 1e-14 * std::max(1.0, std::abs(z))) break;
        // Halley step for f(w) = w*e^w - z.
        const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * (w + 1.0));
        const double step = f / denom;
        w -= step;
        if (w <= -1.0) w = -1.0 + 1e-15;  // keep iterates on the principal branch
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(w))) break;
    }
    return w;
}

}  // namespace detail

double lambert_w0(double z) {
    if (z < 0.0) {
        throw std::domain_error("lambert_w0: negative argument " + std::to_string(z));
    }
    return detail::lambert_w0_branch0(z);
}

}  // namespace biad

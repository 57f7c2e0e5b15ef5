#pragma once

namespace biad {

namespace detail {

/// Principal branch W0 on its full domain z >= -1/e. Halley iteration with
/// a branch-point series seed near -1/e; residual |w*e^w - z| converges
/// well below 1e-12 * max(1, |z|).
double lambert_w0_branch0(double z);

}  // namespace detail

/// Lambert W, principal branch, nonnegative arguments: the w >= 0 with
/// w * e^w = z. Throws std::domain_error for z < 0.
double lambert_w0(double z);

}  // namespace biad

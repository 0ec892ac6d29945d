#pragma once

#include "nlt/state.hpp"

#include <functional>

namespace nlt {

/// Stationary singular solution omega = k x^{-beta/2}, rho = k^2.
struct SingularProfile {
    double k = 1.0;
    double beta = 1.0;

    SingularProfile(double k_, double beta_);
};

[[nodiscard]] double exact_omega(const SingularProfile& prof, double x);
[[nodiscard]] double exact_rho(const SingularProfile& prof);
/// u = -(2k/beta) x^{1-beta/2}, from integrating k y^{-beta/2-1} over [x, inf).
[[nodiscard]] double exact_u(const SingularProfile& prof, double x);

/// Cubic smoothstep 3s^2 - 2s^3 clamped to [0, 1].
[[nodiscard]] double smoothstep(double s);

/// C^1 ramp: 0 for x <= lo, 1 for x >= hi, smoothstep in between (linear in x).
[[nodiscard]] double ramp_up(double x, double lo, double hi);
/// 1 for x <= lo, 0 for x >= hi.
[[nodiscard]] double ramp_down(double x, double lo, double hi);

using SpaceTimeFn = std::function<double(double x, double t)>;

struct Residual {
    double omega = 0.0;  ///< omega_t + u omega_x - rho / x^beta
    double rho = 0.0;    ///< rho_t + u rho_x
};

/// Finite-difference residual of the transport system at (x, t).
///
/// Derivatives use the fourth-order central stencil
/// (f(-2h) - 8 f(-h) + 8 f(h) - f(2h)) / 12h in both x and t, so the
/// truncation error is O(h^4); requires x - 2h > 0.
[[nodiscard]] Residual pde_residual(const SpaceTimeFn& omega, const SpaceTimeFn& rho,
                                    const SpaceTimeFn& u, double beta, double x, double t,
                                    double h);

struct TruncatedProfile {
    ScalarFn omega;
    ScalarFn rho;
    double core_lo = 0.0;
    double core_hi = 0.0;
};

/// Exact profile on the core [a(1+taper), b(1-taper)], smoothstep-tapered to
/// zero on [a, a(1+taper)] and [b(1-taper), b], zero outside [a, b]. rho uses
/// the same bands.
[[nodiscard]] TruncatedProfile truncated_profile(const SingularProfile& prof, double a,
                                                 double b, double taper);

}  // namespace nlt

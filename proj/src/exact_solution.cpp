#include "nlt/exact_solution.hpp"

#include <cmath>
#include <stdexcept>

namespace nlt {

SingularProfile::SingularProfile(double k_, double beta_) : k(k_), beta(beta_) {
    if (!(k > 0.0) || !(beta > 0.0)) {
        throw std::invalid_argument("singular profile needs k > 0 and beta > 0");
    }
}

namespace {

void require_positive(double x) {
    if (!(x > 0.0)) {
        throw std::domain_error("singular profile evaluated at x <= 0");
    }
}

}  // namespace

double exact_omega(const SingularProfile& prof, double x) {
    require_positive(x);
    return prof.k * std::pow(x, -0.5 * prof.beta);
}

double exact_rho(const SingularProfile& prof) { return prof.k * prof.k; }

double exact_u(const SingularProfile& prof, double x) {
    require_positive(x);
    return -(2.0 * prof.k / prof.beta) * std::pow(x, 1.0 - 0.5 * prof.beta);
}

double smoothstep(double s) {
    if (s <= 0.0) {
        return 0.0;
    }
    if (s >= 1.0) {
        return 1.0;
    }
    return s * s * (3.0 - 2.0 * s);
}

double ramp_up(double x, double lo, double hi) { return smoothstep((x - lo) / (hi - lo)); }

double ramp_down(double x, double lo, double hi) { return 1.0 - ramp_up(x, lo, hi); }

Residual pde_residual(const SpaceTimeFn& omega, const SpaceTimeFn& rho, const SpaceTimeFn& u,
                      double beta, double x, double t, double h) {
    if (!(h > 0.0) || !(x - 2.0 * h > 0.0)) {
        throw std::domain_error("pde_residual stencil leaves the half-line");
    }
    auto d_dx = [&](const SpaceTimeFn& f) {
        return (f(x - 2 * h, t) - 8 * f(x - h, t) + 8 * f(x + h, t) - f(x + 2 * h, t)) / (12 * h);
    };
    auto d_dt = [&](const SpaceTimeFn& f) {
        return (f(x, t - 2 * h) - 8 * f(x, t - h) + 8 * f(x, t + h) - f(x, t + 2 * h)) / (12 * h);
    };
    const double vel = u(x, t);
    Residual r;
    r.omega = d_dt(omega) + vel * d_dx(omega) - rho(x, t) / std::pow(x, beta);
    r.rho = d_dt(rho) + vel * d_dx(rho);
    return r;
}

TruncatedProfile truncated_profile(const SingularProfile& prof, double a, double b,
                                   double taper) {
    if (!(a > 0.0) || !(b > a) || !(taper > 0.0 && taper < 0.5)) {
        throw std::invalid_argument("truncated_profile needs 0 < a < b and taper in (0, 1/2)");
    }
    const double lo = a * (1.0 + taper);
    const double hi = b * (1.0 - taper);
    if (!(lo < hi)) {
        throw std::invalid_argument("truncated_profile taper bands overlap");
    }
    auto envelope = [=](double x) {
        if (x <= a || x >= b) {
            return 0.0;
        }
        return ramp_up(x, a, lo) * ramp_down(x, hi, b);
    };
    TruncatedProfile out;
    out.core_lo = lo;
    out.core_hi = hi;
    out.omega = [prof, envelope](double x) {
        const double e = envelope(x);
        return e == 0.0 ? 0.0 : e * exact_omega(prof, x);
    };
    out.rho = [prof, envelope](double x) { return envelope(x) * exact_rho(prof); };
    return out;
}

}  // namespace nlt

#include "nlt/barrier_params.hpp"

#include "nlt/exact_solution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace nlt {

namespace {

const double kLn2 = std::log(2.0);
const double kLn4 = std::log(4.0);

ControlRecord strict_line(std::string id, double lhs, double rhs) {
    ControlRecord r;
    r.id = std::move(id);
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = rhs - lhs;
    r.pass = r.margin > 0.0;
    return r;
}

// A0^p / (phi b0 p), the controlled-lifetime bound shared by lines 3 and 4.
double lifetime(const BarrierParams& P) { return std::pow(P.A0, P.p) / (P.phi * P.b0 * P.p); }

}  // namespace

InfeasibleError::InfeasibleError(std::string inequality, double lhs, double rhs)
    : std::runtime_error("infeasible: " + inequality + " violated (lhs " +
                         std::to_string(lhs) + ", rhs " + std::to_string(rhs) + ")"),
      inequality_(std::move(inequality)),
      lhs_(lhs),
      rhs_(rhs) {}

std::pair<double, double> compute_b0_b1(double p, double q) {
    if (!(p > 0.0 && p < 1.0) || !(q > 0.0 && q < 1.0)) {
        throw std::invalid_argument("compute_b0_b1 needs p, q in (0, 1)");
    }
    return {std::min(1.0, p * kLn2) / p, std::max(1.0, q * kLn4) / q};
}

BarrierParams BarrierParams::make(double beta, double p, double q, double phi, double psi,
                                  double delta, double m, double A0, double eps) {
    if (!(beta > 0.0) || !(phi > 0.0) || !(psi > 0.0) || !(delta > 0.0)) {
        throw std::invalid_argument("beta, phi, psi, delta must be positive");
    }
    if (!(m >= 1.0)) {
        throw std::invalid_argument("m must be >= 1");
    }
    if (!(eps > 0.0 && eps < A0 && A0 < 1.0)) {
        throw std::invalid_argument("need 0 < eps < A0 < 1");
    }
    BarrierParams P;
    P.beta = beta;
    P.p = p;
    P.q = q;
    P.phi = phi;
    P.psi = psi;
    P.delta = delta;
    P.m = m;
    P.A0 = A0;
    P.eps = eps;
    std::tie(P.b0, P.b1) = compute_b0_b1(p, q);
    return P;
}

BarrierParams select_params(double m, double beta) {
    if (!(m >= 1.0)) {
        throw std::invalid_argument("select_params needs m >= 1");
    }
    if (!(beta > 0.0 && beta <= 1.0)) {
        throw std::invalid_argument("select_params needs beta in (0, 1]");
    }
    constexpr double kFloor = 1e-4;
    double p = beta / 4.0;
    double lo = 0.0;
    double hi = 0.0;
    double q = 0.0;
    for (;; p *= 0.5) {
        if (p < kFloor) {
            throw InfeasibleError("m/(b0 q) < 1/(m b1 p)", lo, hi);
        }
        q = beta - p;
        const auto [b0, b1] = compute_b0_b1(p, q);
        lo = m / (b0 * q);
        hi = 1.0 / (m * b1 * p);
        if (lo < hi) {
            break;
        }
    }
    const double c = 0.5 * (lo + hi);
    const double psi = 2.0 * std::max(std::sqrt(c), 1.0);
    const double phi = c / psi;
    const double delta = (psi - phi) / 4.0;

    // Lines 3 and 4 bound A0^p / (phi b0 p); pick the largest 10^-k below both
    // with 1.2 * lhs < rhs.
    const double b0 = compute_b0_b1(p, q).first;
    const double rhs = std::min(std::log(1.5) / (psi * kLn4), delta / m);
    const double log10_bound = std::log10(rhs * phi * b0 * p / 1.2) / p;
    int k = std::max(1, static_cast<int>(std::floor(-log10_bound)) + 1);
    for (;; ++k) {
        if (k > 300) {
            throw InfeasibleError("A0^p/(phi b0 p) < log(3/2)/(psi log 4)", 0.0, rhs);
        }
        const double A0 = std::pow(10.0, -k);
        const double t = std::pow(A0, p) / (phi * b0 * p);
        if (1.2 * t < rhs) {
            auto P = BarrierParams::make(beta, p, q, phi, psi, delta, m, A0, A0 / 10.0);
            const auto report = verify_cond_params(P);
            if (!report.pass) {
                const auto& bad = *std::find_if(report.records.begin(), report.records.end(),
                                                [](const ControlRecord& r) { return !r.pass; });
                throw InfeasibleError(bad.id, bad.lhs, bad.rhs);
            }
            return P;
        }
    }
}

ControlReport verify_cond_params(const BarrierParams& P) {
    ControlReport report;

    ControlRecord order;
    order.id = "1";
    order.lhs = P.p + P.q;
    order.rhs = P.beta;
    order.margin = std::min({P.p, P.q - P.p, P.beta - P.q});
    const bool sum_ok = std::abs(P.p + P.q - P.beta) <= 1e-12 * P.beta;
    order.pass = order.margin > 0.0 && P.beta <= 1.0 && sum_ok;
    report.add(order);

    ControlRecord restr;
    restr.id = "restr";
    restr.lhs = P.p;
    restr.rhs = P.beta / 2.0;
    restr.margin = std::min({P.beta / 2.0 - P.p, P.A0 - P.eps, 1.0 - P.A0, P.eps});
    restr.pass = P.beta / 2.0 - P.p > 0.0 && P.A0 - P.eps > 0.0 && 1.0 - P.A0 > 0.0 &&
                 P.eps > 0.0 && P.m >= 1.0 && P.p < 1.0 && P.q < 1.0;
    report.add(restr);

    report.add(strict_line("2a", P.m / (P.b0 * P.q), P.phi * P.psi));
    report.add(strict_line("2b", P.phi * P.psi, 1.0 / (P.m * P.b1 * P.p)));
    report.add(strict_line("3", lifetime(P), std::log(1.5) / (P.psi * kLn4)));
    report.add(strict_line("4", P.m * lifetime(P), P.delta));
    report.add(strict_line("5", P.phi, P.psi - P.delta));
    return report;
}

ParticleCloud sample_prepared_data(const BarrierParams& P, Eigen::Index n_particles) {
    const double amp = std::sqrt(P.phi * P.psi);
    auto omega0 = [P, amp](double x) {
        if (x <= P.eps || x >= 4.0) {
            return 0.0;
        }
        if (x < 1.0) {
            return amp * std::pow(x, -0.5 * P.beta) * ramp_up(x, P.eps, P.A0);
        }
        return amp * ramp_down(x, 3.0, 4.0);
    };
    auto rho0 = [P](double x) {
        if (x <= P.eps || x >= 3.0) {
            return 0.0;
        }
        return ramp_up(x, P.eps, P.A0) * ramp_down(x, 2.0, 3.0);
    };
    const std::array<double, 6> knots{P.eps, P.A0, 1.0, 2.0, 3.0, 4.0};
    const Vector grid = log_grid(P.eps * (1.0 - 1e-3), 4.0 * (1.0 + 1e-3), n_particles, knots);
    return sample_profile(omega0, rho0, grid);
}

ParticleCloud make_prepared_data(const BarrierParams& P, Eigen::Index n_particles) {
    if (!verify_cond_params(P).pass) {
        throw std::invalid_argument("make_prepared_data: parameter pack fails verification");
    }
    ParticleCloud cloud = sample_prepared_data(P, n_particles);
    const auto report = verify_suitably_prepared(cloud, P);
    if (!report.pass) {
        throw std::logic_error("make_prepared_data produced data outside the barrier corridor");
    }
    return cloud;
}

ControlReport verify_suitably_prepared(const ParticleCloud& cloud, const BarrierParams& P) {
    const Vector& x = cloud.positions();
    const Vector& w = cloud.omega();
    const Vector& r = cloud.rho();
    const double inf = std::numeric_limits<double>::infinity();
    auto W = [&](long i) { return w[i]; };
    auto R = [&](long i) { return r[i]; };
    auto constant = [](double c) { return [c](double) { return c; }; };

    ControlReport report;
    report.add(scan_barrier("nonnegative_omega", 0, 0.0, inf, x, W, constant(0.0), Bound::Lower,
                            0.0, true));
    report.add(scan_barrier("nonnegative_rho", 0, 0.0, inf, x, R, constant(0.0), Bound::Lower,
                            0.0, true));

    // Support lines: the interpolant vanishes outside [eps, 4] (resp. [eps, 3])
    // iff every node outside does, and the nodes bracketing the support are zero.
    auto support = [&](std::string id, const Vector& v, double lo, double hi) {
        ControlRecord rec;
        rec.id = std::move(id);
        rec.lo = lo;
        rec.hi = hi;
        rec.margin = 0.0;
        rec.pass = true;
        const Eigen::Index n = x.size();
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool outside = x[i] < lo || x[i] > hi;
            // Inside node whose cell reaches past the support edge.
            const bool straddles = (i > 0 && x[i - 1] < lo && x[i] > lo) ||
                                   (i + 1 < n && x[i + 1] > hi && x[i] < hi);
            if ((outside || straddles) && v[i] != 0.0 && -v[i] < rec.margin) {
                rec.margin = -v[i];
                rec.witness_x = x[i];
                rec.lhs = v[i];
                rec.pass = false;
            }
        }
        return rec;
    };
    report.add(support("support_omega", w, P.eps, 4.0));
    report.add(support("support_rho", r, P.eps, 3.0));

    report.add(scan_barrier("omega_upper_power", 0, P.A0, 1.0, x, W,
                            [&](double xi) { return P.psi * std::pow(xi, -P.q); }, Bound::Upper,
                            0.0));
    report.add(scan_barrier("omega_upper_const", 0, 1.0, 4.0, x, W, constant(P.psi - P.delta),
                            Bound::Upper, 0.0));
    report.add(scan_barrier("omega_lower_power", 0, P.A0, 1.0, x, W,
                            [&](double xi) { return P.phi * std::pow(xi, -P.p); }, Bound::Lower,
                            0.0));
    report.add(scan_barrier("omega_lower_const", 0, 1.0, 3.0, x, W, constant(P.phi),
                            Bound::Lower, 0.0));
    report.add(scan_barrier("rho_upper", 0, 0.0, inf, x, R, constant(P.m), Bound::Upper, 0.0,
                            true));
    report.add(scan_barrier("rho_lower", 0, P.A0, 2.0, x, R, constant(1.0 / P.m), Bound::Lower,
                            0.0, true));
    return report;
}

double upper_bound_time(const BarrierParams& P) { return lifetime(P); }

}  // namespace nlt

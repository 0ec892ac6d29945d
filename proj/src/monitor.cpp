#include "nlt/monitor.hpp"

#include "nlt/velocity.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace nlt {

void BkmAccumulator::add(double t, double sup_global, double sup_local) {
    if (samples_ > 0) {
        const double dt = t - t_;
        global_ += 0.5 * dt * (g_ + sup_global);
        local_ += 0.5 * dt * (l_ + sup_local);
    }
    t_ = t;
    g_ = sup_global;
    l_ = sup_local;
    ++samples_;
}

double sup_omega_global(const ParticleCloud& cloud) { return cloud.omega().maxCoeff(); }

double sup_omega_localized(const ParticleCloud& cloud, double delta) {
    if (!(delta > cloud.front())) {
        return 0.0;
    }
    return sup_omega(cloud, 0.0, delta);
}

namespace {

auto constant(double c) {
    return [c](double) { return c; };
}

}  // namespace

ControlReport check_control_single(const ParticleCloud& cloud, double a_t,
                                   const BarrierParams& P, double slack, double t) {
    const Vector& x = cloud.positions();
    const Vector& w = cloud.omega();
    auto W = [&](long i) { return w[i]; };
    ControlReport report;
    report.t = t;
    report.add(scan_barrier("upper_power", 0, a_t, 1.0, x, W,
                            [&](double xi) { return P.psi * std::pow(xi, -P.q); }, Bound::Upper,
                            slack));
    report.add(scan_barrier("upper_const", 0, 1.0, 3.0, x, W, constant(P.psi), Bound::Upper,
                            slack));
    report.add(scan_barrier("lower_power", 0, a_t, 1.0, x, W,
                            [&](double xi) { return P.phi * std::pow(xi, -P.p); }, Bound::Lower,
                            slack));
    report.add(scan_barrier("lower_const", 0, 1.0, 2.0, x, W, constant(P.phi), Bound::Lower,
                            slack));
    report.add(scan_barrier("add_bound", 0, 3.0, 4.0, x, W, constant(P.psi), Bound::Upper, slack,
                            true));
    return report;
}

ControlReport check_control_multiscale(const ParticleCloud& cloud, double a_t,
                                       const BarrierSequences& s, double slack, double t) {
    ControlReport report;
    report.t = t;
    add_level_barriers(report, cloud, s, a_t, slack);
    const Vector& x = cloud.positions();
    const Vector& w = cloud.omega();
    auto W = [&](long i) { return w[i]; };
    const double q1 = s.q(1);
    const double outer_upper = s.psi(1) * std::pow(s.lam0, -q1);
    const double outer_lower = s.phi(1) * std::pow(s.lam0, -q1);
    report.add(scan_barrier("outer_upper", 0, s.lam0, s.lam_m2, x, W, constant(outer_upper),
                            Bound::Upper, slack));
    report.add(scan_barrier("outer_lower", 0, s.lam0, s.lam_m1, x, W, constant(outer_lower),
                            Bound::Lower, slack));
    return report;
}

ControlReport check_Q_single(const ParticleCloud& cloud, double a_t, const BarrierParams& P,
                             double slack, double t) {
    const VelocityField field = compute_Q(cloud);
    const Vector& x = cloud.positions();
    auto Qv = [&](long i) { return field.q_at_nodes[i]; };
    ControlReport report;
    report.t = t;
    report.add(scan_barrier("Q_lower", 0, a_t, 1.0, x, Qv,
                            [&](double xi) { return P.b0 * P.phi * std::pow(xi, -P.p); },
                            Bound::Lower, slack, true));
    report.add(scan_barrier("Q_upper", 0, a_t, 1.0, x, Qv,
                            [&](double xi) { return P.b1 * P.psi * std::pow(xi, -P.q); },
                            Bound::Upper, slack, true));
    report.add(scan_barrier("Q_log", 0, 1.0, 4.0, x, Qv,
                            [&](double xi) { return P.psi * std::log(4.0 / xi); }, Bound::Upper,
                            slack, true));
    return report;
}

ExponentFit fit_exponent(const ParticleCloud& cloud, double lo, double hi) {
    const Vector& x = cloud.positions();
    const Vector& w = cloud.omega();
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] >= lo && x[i] <= hi) {
            if (!(w[i] > 0.0)) {
                throw std::invalid_argument("fit_exponent: nonpositive omega in window");
            }
            idx.push_back(i);
        }
    }
    const auto n = static_cast<Eigen::Index>(idx.size());
    if (n < 8) {
        throw std::invalid_argument("fit_exponent: fewer than 8 nodes in window");
    }
    Eigen::MatrixX2d A(n, 2);
    Vector b(n);
    Vector wt(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double lx = std::log(x[idx[k]]);
        A(k, 0) = lx;
        A(k, 1) = 1.0;
        b[k] = std::log(w[idx[k]]);
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        const double left = k > 0 ? A(k, 0) - A(k - 1, 0) : 0.0;
        const double right = k + 1 < n ? A(k + 1, 0) - A(k, 0) : 0.0;
        wt[k] = 0.5 * (left + right);
    }
    const Eigen::MatrixX2d WA = wt.asDiagonal() * A;
    const Eigen::Vector2d coef = (A.transpose() * WA).ldlt().solve(WA.transpose() * b);
    return ExponentFit{coef[0], coef[1], lo, hi, n};
}

Envelope envelope_check(const ParticleCloud& cloud, double lo, double hi) {
    const Vector& x = cloud.positions();
    const Vector& w = cloud.omega();
    Envelope env;
    env.lo = lo;
    env.hi = hi;
    env.phi_eff = std::numeric_limits<double>::infinity();
    env.psi_eff = -std::numeric_limits<double>::infinity();
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] >= lo && x[i] <= hi) {
            const double v = w[i] * std::sqrt(x[i]);
            env.phi_eff = std::min(env.phi_eff, v);
            env.psi_eff = std::max(env.psi_eff, v);
            ++count;
        }
    }
    if (count < 8) {
        throw std::invalid_argument("envelope_check: fewer than 8 nodes in window");
    }
    env.pass = std::isfinite(env.phi_eff) && std::isfinite(env.psi_eff) && env.phi_eff > 0.0;
    return env;
}

}  // namespace nlt

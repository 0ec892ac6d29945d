#include "nlt/sequences.hpp"

#include "nlt/exact_solution.hpp"
#include "nlt/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace nlt {

double BarrierSequences::log_lam(int n) const {
    switch (n) {
        case -2: return std::log(lam_m2);
        case -1: return std::log(lam_m1);
        case 0: return std::log(lam0);
        default: return log_lam_n[n - 1];
    }
}

double BarrierSequences::lam(int n) const { return std::exp(log_lam(n)); }

namespace {

void require(bool ok, const char* what) {
    if (!ok) {
        throw std::invalid_argument(std::string("build_sequences: ") + what);
    }
}

// x^a for x given through its logarithm.
double pow_log(double log_x, double a) { return std::exp(a * log_x); }

}  // namespace

Vector f_brackets(const BarrierSequences& s) {
    const int N = s.N;
    Vector out(std::max(N - 1, 0));
    auto psi = [&](int n) { return n == 0 ? s.psi(1) : s.psi(n); };
    auto q = [&](int n) { return n == 0 ? s.q(1) : s.q(n); };
    for (int n = 2; n <= N; ++n) {
        const double ll = s.log_lam(n - 1);
        const double t1 = q(n) * psi(n - 2) / (q(n - 2) * psi(n)) *
                          pow_log(ll, q(n) - q(n - 1)) * pow_log(ll, q(n - 1) - q(n - 2));
        const double t2 = s.p(n) * s.phi(n - 1) / (s.p(n - 1) * s.phi(n)) *
                          pow_log(ll, s.p(n) - s.p(n - 1));
        const double t3 = q(n) * s.psi1 / psi(n);
        out[n - 2] = t1 + t2 + t3;
    }
    return out;
}

double compute_F(const BarrierSequences& s) {
    if (s.N < 3) {
        throw std::invalid_argument("compute_F needs N >= 3");
    }
    const Vector b = f_brackets(s);
    const int tail = std::min(5, s.N - 2);
    for (int n = s.N - tail + 1; n <= s.N; ++n) {
        if (b[n - 2] > b[n - 3]) {
            throw SupNotStabilized("F bracket increases at level " + std::to_string(n));
        }
    }
    return b.maxCoeff();
}

BarrierSequences build_sequences(double phi1, double eps1, double lam_m2, double lam_m1,
                                 double lam0, double L, double C, int N) {
    require(lam0 > 0.0, "lambda0 must be positive");
    require(lam0 < lam_m1, "need lambda0 < lambda_-1");
    require(lam_m1 < lam_m2, "need lambda_-1 < lambda_-2");
    require(lam_m2 < 1.0, "need lambda_-2 < 1");
    require(phi1 > 0.0 && phi1 <= 1.0, "phi1 must lie in (0, 1]");
    require(eps1 > 0.0 && eps1 < 0.25, "eps1 must lie in (0, 1/4)");
    require(L >= 1.0, "L must be >= 1");
    require(C > 0.0, "C must be positive");
    require(N >= 3, "need at least 3 levels");

    BarrierSequences s;
    s.lam_m2 = lam_m2;
    s.lam_m1 = lam_m1;
    s.lam0 = lam0;
    s.L = L;
    s.C = C;
    s.eps1 = eps1;
    s.phi1 = phi1;
    s.psi1 = 1.0 / phi1;
    s.N = N;
    s.log_lam_n.resize(N);
    s.eps_n.resize(N);
    s.p_n.resize(N);
    s.q_n.resize(N);
    s.phi_n.resize(N);
    s.psi_n.resize(N);
    s.mu_n.resize(N);

    const double log_lam0 = std::log(lam0);
    for (int n = 1; n <= N; ++n) {
        s.log_lam_n[n - 1] = log_lam0 - L * n * n;
        s.eps_n[n - 1] = eps1 * std::exp(-(n - 1.0));
        s.p_n[n - 1] = 0.5 - s.eps_n[n - 1];
        s.q_n[n - 1] = 0.5 + s.eps_n[n - 1];
    }
    double log_phi = std::log(phi1);
    s.phi_n[0] = phi1;
    s.psi_n[0] = s.psi1;
    for (int n = 2; n <= N; ++n) {
        log_phi += (s.eps(n - 1) - s.eps(n)) * s.log_lam(n - 1);
        s.phi_n[n - 1] = std::exp(log_phi);
        s.psi_n[n - 1] = std::exp(-log_phi);
    }

    s.F = compute_F(s);
    const double log_ratio = std::log(lam_m2 / lam0);
    s.mu_n[0] = log_ratio;
    for (int n = 2; n <= N; ++n) {
        s.mu_n[n - 1] = C * s.F * pow_log(s.log_lam(n - 1) - s.log_lam(n - 2), s.q(1)) +
                        C * log_ratio * pow_log(log_lam0, -s.q(1)) *
                            pow_log(s.log_lam(n - 1), s.q(n));
    }
    return s;
}

BarrierSequences build_sequences_auto_L(double phi1, double eps1, double lam_m2, double lam_m1,
                                        double lam0, double L, double C, int N,
                                        int max_doublings) {
    for (int k = 0; k <= max_doublings; ++k, L *= 2.0) {
        auto s = build_sequences(phi1, eps1, lam_m2, lam_m1, lam0, L, C, N);
        const auto rep = verify_sequence_conditions(s);
        bool ok = true;
        for (const auto& r : rep.records) {
            if (r.id == "cond_trap_1" && !r.pass) {
                ok = false;
            }
        }
        if (ok) {
            return s;
        }
    }
    throw std::runtime_error("no L up to the doubling limit satisfies cond_trap_1");
}

const ControlRecord* SequenceReport::find(const std::string& id, int level) const {
    auto it = std::find_if(records.begin(), records.end(), [&](const ControlRecord& r) {
        return r.id == id && r.level == level;
    });
    return it == records.end() ? nullptr : &*it;
}

SequenceReport verify_sequence_conditions(const BarrierSequences& s) {
    constexpr double kRoundoff = 1e-12;
    SequenceReport rep;
    auto push = [&](std::string id, int level, double lhs, double rhs, double margin, bool pass) {
        ControlRecord r;
        r.id = std::move(id);
        r.level = level;
        r.lhs = lhs;
        r.rhs = rhs;
        r.margin = margin;
        r.pass = pass;
        rep.pass = rep.pass && pass;
        rep.records.push_back(std::move(r));
    };
    const int N = s.N;

    for (int n = 1; n <= N; ++n) {
        const double prod = s.phi(n) * s.psi(n);
        const double m = -std::abs(prod - 1.0);
        push("c__1", n, prod, 1.0, m, m >= -kRoundoff);
    }

    // Limit conditions as monotone decay, reaching the tolerance by n = N.
    auto decay = [&](const char* id, auto value) {
        double prev = value(1);
        for (int n = 2; n <= N; ++n) {
            const double v = value(n);
            double m = prev - v;
            if (n == N) {
                m = std::min(m, kLimitTolerance - v);
            }
            push(id, n, v, n == N ? kLimitTolerance : prev, m, m >= 0.0);
            prev = v;
        }
    };
    decay("c_1", [&](int n) { return std::exp(s.log_lam(n) - s.log_lam(n - 1)); });
    decay("c_0", [&](int n) {
        if (n == 1) {
            return std::numeric_limits<double>::infinity();
        }
        return std::abs(std::expm1((s.q(n) - s.q(n - 1)) * s.log_lam(n)));
    });

    for (int n = 2; n <= N; ++n) {
        const double ll = s.log_lam(n - 1);
        const double c1 = s.q(n) / s.q(n - 1) * s.psi(n - 1) / s.psi(n) *
                          pow_log(ll, s.q(n) - s.q(n - 1));
        push("c1", n, c1, 1.0, 1.0 - c1, 1.0 - c1 >= -kRoundoff);
        const double c2 = s.p(n) / s.p(n - 1) * s.phi(n - 1) / s.phi(n) *
                          pow_log(ll, s.p(n) - s.p(n - 1));
        push("c2", n, c2, 1.0, c2 - 1.0, c2 - 1.0 >= -kRoundoff);
    }

    {
        const double ll0 = s.log_lam(0);
        const double lhs = s.phi(1) * pow_log(ll0, -s.p(1));
        const double rhs = s.psi(1) * pow_log(ll0, -s.q(1));
        push("relay_start", 1, lhs, rhs, (rhs - lhs) / rhs, rhs > lhs);
    }

    // Relay margins compared in log space, relative.
    for (int n = 2; n <= N; ++n) {
        const double ll = s.log_lam(n - 1);
        const double a = std::log(s.phi(n - 1)) - s.p(n - 1) * ll;
        const double b = std::log(s.phi(n)) - s.p(n) * ll;
        push("relay1", n, std::exp(a), std::exp(b), std::expm1(a - b), a - b >= -kRoundoff);
        const double c = std::log(s.psi(n - 1)) - s.q(n - 1) * ll;
        const double d = std::log(s.psi(n)) - s.q(n) * ll;
        push("relay2", n, std::exp(c), std::exp(d), std::expm1(d - c), d - c >= -kRoundoff);
    }

    for (int n = 1; n <= N; ++n) {
        const double ml = s.m_low(n);
        const double lower = ml > 0.0 ? s.p(n) / (ml * (1.0 - s.p(n)))
                                      : std::numeric_limits<double>::infinity();
        const double upper = s.q(n) / (s.M_up(n) * (1.0 - s.q(n)));
        const double m = std::min(1.0 - lower, upper - 1.0);
        push("trapping", n, lower, upper, m, lower < 1.0 && 1.0 < upper);
    }

    rep.c_max = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= N; ++n) {
        const double e = s.eps(n);
        const double m = 4.0 * e - s.mu(n) * (1.0 + 2.0 * e);
        push("cond_trap_1", n, s.mu(n) * (1.0 + 2.0 * e), 4.0 * e, m, m > 0.0);
        if (n >= 2) {
            const double per_c = s.mu(n) / s.C;
            rep.c_max = std::min(rep.c_max, 4.0 * e / ((1.0 + 2.0 * e) * per_c));
        }
    }

    // Tail of sum_j |log lambda_{j-1}| (eps_{j-1} - eps_j) beyond N.
    double tail = 0.0;
    const double log_lam0 = std::log(s.lam0);
    for (int j = N + 1; j < N + 400; ++j) {
        const double eprev = s.eps1 * std::exp(-(j - 2.0));
        const double ecur = s.eps1 * std::exp(-(j - 1.0));
        const double term = std::abs(log_lam0 - s.L * (j - 1.0) * (j - 1.0)) * (eprev - ecur);
        tail += term;
        if (term < 1e-18 * (1.0 + tail)) {
            break;
        }
    }
    rep.phi_inf = s.phi(N) * std::exp(-tail);
    return rep;
}

bool corridor_conditions_hold(const SequenceReport& report) {
    for (const auto& r : report.records) {
        if ((r.id == "c__1" || r.id == "relay_start" || r.id == "relay1" || r.id == "relay2") &&
            !r.pass) {
            return false;
        }
    }
    return true;
}

void add_level_barriers(ControlReport& report, const ParticleCloud& cloud,
                        const BarrierSequences& s, double a_t, double slack) {
    const Vector& x = cloud.positions();
    const Vector& w = cloud.omega();
    auto W = [&](long i) { return w[i]; };
    for (int n = 1; n <= s.N; ++n) {
        const double lo = std::max(s.lam(n), a_t);
        const double hi = std::min(s.lam(n - 1), s.lam0);
        const double phi = s.phi(n);
        const double psi = s.psi(n);
        const double p = s.p(n);
        const double q = s.q(n);
        report.add(scan_barrier("level_lower", n, lo, hi, x, W,
                                [=](double xi) { return phi * std::pow(xi, -p); }, Bound::Lower,
                                slack));
        report.add(scan_barrier("level_upper", n, lo, hi, x, W,
                                [=](double xi) { return psi * std::pow(xi, -q); }, Bound::Upper,
                                slack));
    }
}

ParticleCloud make_prepared_data_multiscale(const BarrierSequences& s, double A0, double delta,
                                            Eigen::Index n_particles) {
    if (!(A0 > 0.0 && A0 < s.lam0)) {
        throw std::invalid_argument("need 0 < A0 < lambda0");
    }
    const double lam0 = s.lam0;
    const double top = s.lam_m2 + delta;
    const double q1 = s.q(1);
    // The plateau lambda0^{-1/2} must sit below the outer upper line minus delta.
    if (!(delta > 0.0 && 1.0 / std::sqrt(lam0) < s.psi(1) * std::pow(lam0, -q1) - delta)) {
        throw std::invalid_argument("delta too large for the outer corridor");
    }
    if (!corridor_conditions_hold(verify_sequence_conditions(s))) {
        throw std::invalid_argument("sequences violate the relay/product conditions");
    }
    const double eps = A0 / 10.0;
    const double plateau = 1.0 / std::sqrt(lam0);
    const double lam_m2 = s.lam_m2;
    auto omega0 = [=](double x) {
        if (x <= eps || x >= top) {
            return 0.0;
        }
        if (x < lam0) {
            return ramp_up(x, eps, A0) / std::sqrt(x);
        }
        return plateau * ramp_down(x, lam_m2, top);
    };
    auto rho0 = [=](double x) {
        if (x <= eps || x >= top) {
            return 0.0;
        }
        return ramp_up(x, eps, A0) * ramp_down(x, lam_m2, top);
    };
    std::vector<double> knots{eps, A0, lam0, s.lam_m1, s.lam_m2, top};
    for (int n = 1; n <= s.N; ++n) {
        knots.push_back(s.lam(n));
    }
    const Vector grid = log_grid(eps * (1.0 - 1e-3), top * (1.0 + 1e-3), n_particles, knots);
    ParticleCloud cloud = sample_profile(omega0, rho0, grid);
    if (!verify_multiscale_prepared(cloud, s, A0, delta).pass) {
        throw std::logic_error("multiscale data left the barrier corridor");
    }
    return cloud;
}

ControlReport verify_multiscale_prepared(const ParticleCloud& cloud, const BarrierSequences& s,
                                         double A0, double delta) {
    ControlReport report;
    const Vector& x = cloud.positions();
    const Vector& w = cloud.omega();
    const Vector& r = cloud.rho();
    auto W = [&](long i) { return w[i]; };
    auto R = [&](long i) { return r[i]; };
    const double lam0 = s.lam0;
    const double top = s.lam_m2 + delta;
    const double q1 = s.q(1);

    add_level_barriers(report, cloud, s, A0, 0.0);
    const double outer_upper = s.psi(1) * std::pow(lam0, -q1) - delta;
    const double outer_lower = s.phi(1) * std::pow(lam0, -q1);
    report.add(scan_barrier("outer_upper", 0, lam0, top, x, W,
                            [=](double) { return outer_upper; }, Bound::Upper, 0.0));
    report.add(scan_barrier("outer_lower", 0, lam0, s.lam_m1, x, W,
                            [=](double) { return outer_lower; }, Bound::Lower, 0.0));
    report.add(scan_barrier("rho_one_lower", 0, A0, s.lam_m2, x, R, [](double) { return 1.0; },
                            Bound::Lower, 0.0, true));
    report.add(scan_barrier("rho_one_upper", 0, A0, s.lam_m2, x, R, [](double) { return 1.0; },
                            Bound::Upper, 0.0, true));

    ControlRecord supp;
    supp.id = "support";
    supp.lo = A0 / 10.0;
    supp.hi = top;
    supp.pass = true;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const bool outside = x[i] < supp.lo || x[i] > supp.hi;
        if (outside && (w[i] != 0.0 || r[i] != 0.0)) {
            supp.pass = false;
            supp.witness_x = x[i];
            supp.margin = -std::max(w[i], r[i]);
        }
    }
    report.add(supp);
    return report;
}

ControlReport check_Q_bounds_multiscale(const ParticleCloud& cloud, const BarrierSequences& s,
                                        double a_t, double slack) {
    const VelocityField field = compute_Q(cloud);
    const Vector& x = cloud.positions();
    auto Qv = [&](long i) { return field.q_at_nodes[i]; };
    ControlReport report;
    for (int n = 1; n <= s.N; ++n) {
        const double lo = std::max(s.lam(n), a_t);
        const double hi = std::min(s.lam(n - 1), s.lam0);
        const double lower_amp = s.phi(n) / s.p(n) * s.m_low(n);
        const double upper_amp = s.psi(n) / s.q(n) * s.M_up(n);
        const double p = s.p(n);
        const double q = s.q(n);
        report.add(scan_barrier("Q_lower", n, lo, hi, x, Qv,
                                [=](double xi) { return lower_amp * std::pow(xi, -p); },
                                Bound::Lower, slack, true));
        report.add(scan_barrier("Q_upper", n, lo, hi, x, Qv,
                                [=](double xi) { return upper_amp * std::pow(xi, -q); },
                                Bound::Upper, slack, true));
    }
    return report;
}

}  // namespace nlt

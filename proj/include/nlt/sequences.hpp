#pragma once

#include "nlt/control_report.hpp"
#include "nlt/state.hpp"

#include <stdexcept>

namespace nlt {

/// Multiscale barrier sequences for beta = 1.
///
/// Scales lambda_n = lambda0 exp(-L n^2), exponents p_n = 1/2 - eps_n,
/// q_n = 1/2 + eps_n with eps_n = eps1 exp(-(n-1)), amplitudes phi_n, psi_n
/// chained so that the barriers of neighbouring levels agree at lambda_{n-1}.
/// Scales are stored as logarithms; lambda_n underflows long before log does.
struct BarrierSequences {
    double lam_m2 = 0.9;
    double lam_m1 = 0.85;
    double lam0 = 0.8;
    double L = 5.0;
    double C = 4.0;
    double eps1 = 0.05;
    double phi1 = 0.8;
    double psi1 = 1.25;
    int N = 8;

    // Level arrays, entry n-1 holds level n.
    Vector log_lam_n;
    Vector eps_n;
    Vector p_n;
    Vector q_n;
    Vector phi_n;
    Vector psi_n;
    Vector mu_n;
    double F = 0.0;

    /// log lambda_n for n >= -2.
    [[nodiscard]] double log_lam(int n) const;
    [[nodiscard]] double lam(int n) const;
    [[nodiscard]] double eps(int n) const { return eps_n[n - 1]; }
    [[nodiscard]] double p(int n) const { return p_n[n - 1]; }
    [[nodiscard]] double q(int n) const { return q_n[n - 1]; }
    [[nodiscard]] double phi(int n) const { return phi_n[n - 1]; }
    [[nodiscard]] double psi(int n) const { return psi_n[n - 1]; }
    [[nodiscard]] double mu(int n) const { return mu_n[n - 1]; }
    [[nodiscard]] double m_low(int n) const { return 1.0 - mu(n); }
    [[nodiscard]] double M_up(int n) const { return 1.0 + mu(n); }
};

class SupNotStabilized : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] BarrierSequences build_sequences(double phi1, double eps1, double lam_m2,
                                               double lam_m1, double lam0, double L, double C,
                                               int N);

/// Doubles L (starting from the given value) until cond_trap_1 holds at every
/// level <= N. Gives up after `max_doublings`.
[[nodiscard]] BarrierSequences build_sequences_auto_L(double phi1, double eps1, double lam_m2,
                                                      double lam_m1, double lam0, double L,
                                                      double C, int N, int max_doublings = 8);

/// Bracket of the F supremum for n = 2..N (entry n-2), using psi_0 := psi_1 and
/// q_0 := q_1.
[[nodiscard]] Vector f_brackets(const BarrierSequences& seq);

/// Max bracket. Throws SupNotStabilized unless the brackets are nonincreasing
/// over the last min(5, N-2) levels.
[[nodiscard]] double compute_F(const BarrierSequences& seq);

struct SequenceReport {
    std::vector<ControlRecord> records;
    double phi_inf = 0.0;
    double c_max = 0.0;  ///< largest C for which cond_trap_1 still holds at n = 2..N
    bool pass = true;

    [[nodiscard]] const ControlRecord* find(const std::string& id, int level) const;
};

/// Tolerance on the finite-horizon limit checks (c_1), (c_0) at n = N.
inline constexpr double kLimitTolerance = 1e-3;

[[nodiscard]] SequenceReport verify_sequence_conditions(const BarrierSequences& seq);

/// True when the conditions the initial data construction depends on hold:
/// phi_n psi_n = 1, the relay conditions and relay_start.
[[nodiscard]] bool corridor_conditions_hold(const SequenceReport& report);

/// Corridor-midline data omega0 = x^{-1/2} on [A0, lambda0], constant
/// lambda0^{-1/2} on [lambda0, lambda_{-2}], tapered to zero on [eps, A0]
/// (eps = A0/10) and [lambda_{-2}, lambda_{-2} + delta]; rho0 = 1 on
/// [A0, lambda_{-2}] with the same tapers.
[[nodiscard]] ParticleCloud make_prepared_data_multiscale(const BarrierSequences& seq,
                                                          double A0, double delta,
                                                          Eigen::Index n_particles);

/// The suitably-prepared lines for multiscale data, zero slack.
[[nodiscard]] ControlReport verify_multiscale_prepared(const ParticleCloud& cloud,
                                                       const BarrierSequences& seq, double A0,
                                                       double delta);

/// Per-level corridor phi_n x^{-p_n} < omega < psi_n x^{-q_n} on I_n clipped to
/// [a_t, lambda0]; levels with an empty window are recorded as vacuous.
void add_level_barriers(ControlReport& report, const ParticleCloud& cloud,
                        const BarrierSequences& seq, double a_t, double slack);

/// (phi_n/p_n) m_n x^{-p_n} <= Q <= (psi_n/q_n) M_n x^{-q_n} on I_n clipped to
/// [a_t, lambda0].
[[nodiscard]] ControlReport check_Q_bounds_multiscale(const ParticleCloud& cloud,
                                                      const BarrierSequences& seq, double a_t,
                                                      double slack = 0.0);

}  // namespace nlt

#pragma once

#include "nlt/barrier_params.hpp"
#include "nlt/control_report.hpp"
#include "nlt/sequences.hpp"
#include "nlt/state.hpp"

namespace nlt {

/// Default relative slack for barrier checks on evolved states.
inline constexpr double kRuntimeSlack = 1e-6;

/// Trapezoid accumulation of int_0^t ||omega(., s)||_inf ds, globally and on (0, delta).
class BkmAccumulator {
public:
    void add(double t, double sup_global, double sup_local);

    [[nodiscard]] double global() const noexcept { return global_; }
    [[nodiscard]] double localized() const noexcept { return local_; }
    [[nodiscard]] int samples() const noexcept { return samples_; }

private:
    double t_ = 0.0;
    double g_ = 0.0;
    double l_ = 0.0;
    double global_ = 0.0;
    double local_ = 0.0;
    int samples_ = 0;
};

/// sup of omega on (0, delta); 0 when delta is left of the support.
[[nodiscard]] double sup_omega_localized(const ParticleCloud& cloud, double delta);
[[nodiscard]] double sup_omega_global(const ParticleCloud& cloud);

/// Barrier lines of a controlled beta-model state with window [a_t, 1]:
/// upper_power, upper_const [1,3], lower_power, lower_const [1,2] and
/// add_bound (omega <= psi on [3,4]).
[[nodiscard]] ControlReport check_control_single(const ParticleCloud& cloud, double a_t,
                                                 const BarrierParams& params,
                                                 double slack = kRuntimeSlack, double t = 0.0);

/// Per-level corridors on I_n clipped to [a_t, lambda0] plus the two outer lines.
[[nodiscard]] ControlReport check_control_multiscale(const ParticleCloud& cloud, double a_t,
                                                     const BarrierSequences& seq,
                                                     double slack = kRuntimeSlack,
                                                     double t = 0.0);

/// b0 phi x^{-p} <= Q <= b1 psi x^{-q} on [a_t, 1] and Q <= psi log(4/x) on [1, 4].
[[nodiscard]] ControlReport check_Q_single(const ParticleCloud& cloud, double a_t,
                                           const BarrierParams& params,
                                           double slack = kRuntimeSlack, double t = 0.0);

struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    Eigen::Index nodes = 0;
};

/// Weighted least-squares line through (ln x, ln omega) for nodes in [lo, hi],
/// each node weighted by its share of the window's ln x extent.
[[nodiscard]] ExponentFit fit_exponent(const ParticleCloud& cloud, double lo, double hi);

struct Envelope {
    double phi_eff = 0.0;
    double psi_eff = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool pass = false;
};

/// min and max of omega x^{1/2} over the nodes in [lo, hi].
[[nodiscard]] Envelope envelope_check(const ParticleCloud& cloud, double lo, double hi);

struct BlowupDiagnostics {
    double t_star = 0.0;
    double t_end = 0.0;
    double a_end = 0.0;
    double bkm_end = 0.0;
    double bkm_localized = 0.0;
    ExponentFit exponent_fit;
    Envelope envelope;
};

}  // namespace nlt

#pragma once

#include "nlt/control_report.hpp"
#include "nlt/state.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace nlt {

/// Single-scale barrier parameters for the beta-model.
///
/// The corridor is phi x^{-p} < omega < psi x^{-q} on [A0, 1]; b0 and b1 are
/// the constants in the two-sided bound b0 phi x^{-p} <= Q <= b1 psi x^{-q}.
struct BarrierParams {
    double beta = 1.0;
    double p = 0.0;
    double q = 0.0;
    double phi = 0.0;
    double psi = 0.0;
    double delta = 0.0;
    double m = 1.0;
    double A0 = 0.0;
    double eps = 0.0;
    double b0 = 0.0;
    double b1 = 0.0;

    /// Fills b0, b1 from (p, q) and checks structural validity (positivity,
    /// p, q in (0,1), 0 < eps < A0 < 1, m >= 1). The inequalities tying the
    /// parameters together are left to verify_cond_params.
    static BarrierParams make(double beta, double p, double q, double phi, double psi,
                              double delta, double m, double A0, double eps);
};

/// Raised when no admissible parameter pack exists.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(std::string inequality, double lhs, double rhs);

    const std::string& inequality() const noexcept { return inequality_; }
    double lhs() const noexcept { return lhs_; }
    double rhs() const noexcept { return rhs_; }

private:
    std::string inequality_;
    double lhs_;
    double rhs_;
};

/// b0 = min{1, p ln 2}/p, b1 = max{1, q ln 4}/q.
[[nodiscard]] std::pair<double, double> compute_b0_b1(double p, double q);

/// Deterministic parameter selection for given m >= 1 and beta in (0, 1].
///
/// p runs over beta/4, beta/8, ... (floor 1e-4) until the phi*psi interval
/// m/(b0 q) < c < 1/(m b1 p) opens; c is its midpoint, psi = 2 max(sqrt c, 1),
/// phi = c/psi, delta = (psi - phi)/4, A0 the largest power of ten meeting the
/// lifetime and delta lines with a 20% margin, eps = A0/10.
[[nodiscard]] BarrierParams select_params(double m, double beta);

/// Every parameter inequality, one record per line, absolute margins.
[[nodiscard]] ControlReport verify_cond_params(const BarrierParams& params);

/// Prepared data: sqrt(phi psi) x^{-beta/2} on [A0, 1], sqrt(phi psi) on [1, 3],
/// smoothstep tapers on [eps, A0] and [3, 4]; rho = 1 on [A0, 2], tapered on
/// [eps, A0] and [2, 3]. Log grid with nodes pinned at eps, A0, 1, 2, 3, 4.
/// The same profile without any checks (for forced runs of failing packs).
[[nodiscard]] ParticleCloud sample_prepared_data(const BarrierParams& params,
                                                 Eigen::Index n_particles);

/// Checked version: throws std::invalid_argument when the pack fails
/// verify_cond_params and std::logic_error when the sampled data fails
/// verify_suitably_prepared.
[[nodiscard]] ParticleCloud make_prepared_data(const BarrierParams& params,
                                               Eigen::Index n_particles);

/// Every line of the suitably-prepared definition checked at the nodes, zero slack.
[[nodiscard]] ControlReport verify_suitably_prepared(const ParticleCloud& cloud,
                                                     const BarrierParams& params);

/// T* = A0^p / (phi b0 p).
[[nodiscard]] double upper_bound_time(const BarrierParams& params);

}  // namespace nlt

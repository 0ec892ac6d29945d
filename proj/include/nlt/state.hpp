#pragma once

#include <Eigen/Core>

#include <functional>
#include <span>
#include <vector>

namespace nlt {

using Vector = Eigen::VectorXd;
using ScalarFn = std::function<double(double)>;

/// Forcing exponent of the model omega_t + u omega_x = rho / x^beta.
struct ModelParams {
    double beta = 1.0;

    explicit ModelParams(double beta_);
};

/// Sorted Lagrangian markers carrying (x, omega, rho, initial position).
///
/// Immutable after construction. Every constructor path validates:
/// positions strictly increasing, finite and >= 0; omega, rho >= 0;
/// omega = rho = 0 on the first and last marker; at least 4 markers.
class ParticleCloud {
public:
    ParticleCloud(Vector positions, Vector omega, Vector rho, Vector label);

    [[nodiscard]] const Vector& positions() const noexcept { return positions_; }
    [[nodiscard]] const Vector& omega() const noexcept { return omega_; }
    [[nodiscard]] const Vector& rho() const noexcept { return rho_; }
    [[nodiscard]] const Vector& label() const noexcept { return label_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return positions_.size(); }

    [[nodiscard]] double front() const noexcept { return positions_[0]; }
    [[nodiscard]] double back() const noexcept { return positions_[positions_.size() - 1]; }

    /// Same markers with a new omega array (validated).
    [[nodiscard]] ParticleCloud with_omega(Vector omega) const;

private:
    Vector positions_;
    Vector omega_;
    Vector rho_;
    Vector label_;
};

/// n nodes with uniform spacing in log x spanning [lo, hi]. Nodes nearest to
/// each entry of `knots` (inside (lo, hi)) are moved onto the knot exactly.
[[nodiscard]] Vector log_grid(double lo, double hi, Eigen::Index n,
                              std::span<const double> knots = {});

/// Samples (f, g) on `grid`; labels are the grid itself.
[[nodiscard]] ParticleCloud sample_profile(const ScalarFn& f, const ScalarFn& g,
                                           const Vector& grid);

/// Piecewise-linear interpolant of (positions, omega), zero outside the support.
[[nodiscard]] double interp_omega(const ParticleCloud& cloud, double x);

/// Max of the interpolant over [a, b]; 0 when [a, b] misses the support.
[[nodiscard]] double sup_omega(const ParticleCloud& cloud, double a, double b);

/// Index i with positions[i] <= x < positions[i+1]; -1 left of the support,
/// size-1 at or right of the last marker.
[[nodiscard]] Eigen::Index locate_cell(const Vector& positions, double x);

}  // namespace nlt

#pragma once

#include "nlt/state.hpp"

namespace nlt {

/// Q(x) = int_x^inf omega(y)/y dy at every marker of a cloud, with u = -x Q.
///
/// Q is exact for the piecewise-linear interpolant of omega: each cell
/// contributes the closed form of int (a + b y)/y dy, summed right to left.
/// Keeps its own copy of the marker data so it can outlive the cloud.
struct VelocityField {
    Vector positions;
    Vector omega;
    Vector q_at_nodes;
};

/// int_{xa}^{xb} w(y)/y dy for w linear through (xa, wa), (xb, wb), 0 <= xa < xb.
[[nodiscard]] double cell_integral(double xa, double wa, double xb, double wb);

/// Suffix integrals on raw marker arrays. Positions must be strictly
/// increasing and >= 0, with omega = 0 wherever a position is 0.
[[nodiscard]] Vector tail_integrals(const Vector& positions, const Vector& omega);

[[nodiscard]] VelocityField compute_Q(const ParticleCloud& cloud);

/// Q at an arbitrary x >= 0, exact within the cell containing x.
[[nodiscard]] double q_at(const VelocityField& field, double x);

/// u(x) = -x Q(x).
[[nodiscard]] double velocity_at(const VelocityField& field, double x);

}  // namespace nlt

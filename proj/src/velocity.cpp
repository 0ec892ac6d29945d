#include "nlt/velocity.hpp"

#include <cmath>
#include <stdexcept>

namespace nlt {

namespace {

// (d - log1p(d)) / d, accurate for small d.
double log_defect(double d) {
    if (std::abs(d) < 1e-2) {
        // sum_{k>=1} (-1)^(k+1) d^k / (k+1), truncated after d^9.
        double acc = 0.0;
        for (int k = 9; k >= 1; --k) {
            acc = ((k % 2 == 1) ? 1.0 : -1.0) / (k + 1) + d * acc;
        }
        return d * acc;
    }
    return (d - std::log1p(d)) / d;
}

}  // namespace

double cell_integral(double xa, double wa, double xb, double wb) {
    if (xa == 0.0) {
        // omega(0) = 0 leaves only the linear part: int_0^xb (wb/xb) dy.
        return wb;
    }
    const double d = (xb - xa) / xa;
    const double lr = std::log1p(d);
    return wa * lr + (wb - wa) * log_defect(d);
}

Vector tail_integrals(const Vector& positions, const Vector& omega) {
    const Eigen::Index n = positions.size();
    Vector q(n);
    q[n - 1] = 0.0;
    for (Eigen::Index i = n - 2; i >= 0; --i) {
        q[i] = q[i + 1] + cell_integral(positions[i], omega[i], positions[i + 1], omega[i + 1]);
    }
    return q;
}

VelocityField compute_Q(const ParticleCloud& cloud) {
    return VelocityField{cloud.positions(), cloud.omega(),
                         tail_integrals(cloud.positions(), cloud.omega())};
}

double q_at(const VelocityField& field, double x) {
    if (x < 0.0) {
        throw std::invalid_argument("Q evaluated at negative x");
    }
    const Vector& xs = field.positions;
    const Eigen::Index n = xs.size();
    if (x <= xs[0]) {
        return field.q_at_nodes[0];
    }
    if (x >= xs[n - 1]) {
        return 0.0;
    }
    const Eigen::Index j = locate_cell(xs, x);
    const double s = (x - xs[j]) / (xs[j + 1] - xs[j]);
    const double wx = field.omega[j] + s * (field.omega[j + 1] - field.omega[j]);
    return field.q_at_nodes[j + 1] + cell_integral(x, wx, xs[j + 1], field.omega[j + 1]);
}

double velocity_at(const VelocityField& field, double x) {
    if (x == 0.0) {
        return 0.0;
    }
    return -x * q_at(field, x);
}

}  // namespace nlt

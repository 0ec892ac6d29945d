#include "nlt/state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nlt {

ModelParams::ModelParams(double beta_) : beta(beta_) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("beta must be a positive finite number");
    }
}

namespace {

void validate(const Vector& x, const Vector& w, const Vector& r, const Vector& label) {
    const Eigen::Index n = x.size();
    if (n < 4) {
        throw std::invalid_argument("particle cloud needs at least 4 markers");
    }
    if (w.size() != n || r.size() != n || label.size() != n) {
        throw std::invalid_argument("particle cloud arrays differ in length");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || x[i] < 0.0) {
            throw std::invalid_argument("position " + std::to_string(i) +
                                        " is negative or not finite");
        }
        if (i > 0 && !(x[i] > x[i - 1])) {
            throw std::invalid_argument("positions not strictly increasing at index " +
                                        std::to_string(i));
        }
        if (!std::isfinite(w[i]) || w[i] < 0.0) {
            throw std::invalid_argument("omega negative or not finite at index " +
                                        std::to_string(i));
        }
        if (!std::isfinite(r[i]) || r[i] < 0.0) {
            throw std::invalid_argument("rho negative or not finite at index " +
                                        std::to_string(i));
        }
    }
    if (w[0] != 0.0 || r[0] != 0.0 || w[n - 1] != 0.0 || r[n - 1] != 0.0) {
        throw std::invalid_argument("omega and rho must vanish on the first and last marker");
    }
}

}  // namespace

ParticleCloud::ParticleCloud(Vector positions, Vector omega, Vector rho, Vector label)
    : positions_(std::move(positions)),
      omega_(std::move(omega)),
      rho_(std::move(rho)),
      label_(std::move(label)) {
    validate(positions_, omega_, rho_, label_);
}

ParticleCloud ParticleCloud::with_omega(Vector omega) const {
    return ParticleCloud(positions_, std::move(omega), rho_, label_);
}

Vector log_grid(double lo, double hi, Eigen::Index n, std::span<const double> knots) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) {
        throw std::invalid_argument("log_grid needs 0 < lo < hi and n >= 2");
    }
    Vector grid(n);
    const double a = std::log(lo);
    const double step = (std::log(hi) - a) / static_cast<double>(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        grid[i] = std::exp(a + step * static_cast<double>(i));
    }
    grid[0] = lo;
    grid[n - 1] = hi;
    for (double k : knots) {
        if (!(k > lo && k < hi)) {
            continue;
        }
        const auto idx = static_cast<Eigen::Index>(std::lround((std::log(k) - a) / step));
        const Eigen::Index j = std::clamp<Eigen::Index>(idx, 1, n - 2);
        grid[j] = k;
    }
    for (Eigen::Index i = 1; i < n; ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("log_grid too coarse to separate the requested knots");
        }
    }
    return grid;
}

ParticleCloud sample_profile(const ScalarFn& f, const ScalarFn& g, const Vector& grid) {
    const Eigen::Index n = grid.size();
    Vector w(n);
    Vector r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        w[i] = f(grid[i]);
        r[i] = g(grid[i]);
    }
    return ParticleCloud(grid, std::move(w), std::move(r), grid);
}

Eigen::Index locate_cell(const Vector& positions, double x) {
    const double* begin = positions.data();
    const double* end = begin + positions.size();
    const double* it = std::upper_bound(begin, end, x);
    return static_cast<Eigen::Index>(it - begin) - 1;
}

double interp_omega(const ParticleCloud& cloud, double x) {
    const Vector& xs = cloud.positions();
    const Vector& ws = cloud.omega();
    const Eigen::Index n = xs.size();
    if (x < xs[0] || x > xs[n - 1]) {
        return 0.0;
    }
    const Eigen::Index j = locate_cell(xs, x);
    if (j >= n - 1) {
        return ws[n - 1];
    }
    const double s = (x - xs[j]) / (xs[j + 1] - xs[j]);
    return ws[j] + s * (ws[j + 1] - ws[j]);
}

double sup_omega(const ParticleCloud& cloud, double a, double b) {
    if (!(a < b)) {
        throw std::invalid_argument("sup_omega needs a < b");
    }
    const Vector& xs = cloud.positions();
    const Eigen::Index n = xs.size();
    const double lo = std::max(a, xs[0]);
    const double hi = std::min(b, xs[n - 1]);
    if (lo > hi) {
        return 0.0;
    }
    double best = std::max(interp_omega(cloud, lo), interp_omega(cloud, hi));
    const double* begin = xs.data();
    auto first = std::lower_bound(begin, begin + n, lo) - begin;
    for (Eigen::Index i = first; i < n && xs[i] <= hi; ++i) {
        best = std::max(best, cloud.omega()[i]);
    }
    return best;
}

}  // namespace nlt

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace nlt {

/// One checked inequality. `margin` is signed, positive = satisfied.
struct ControlRecord {
    std::string id;
    int level = 0;  ///< multiscale level n, 0 when not applicable
    double lo = 0.0;
    double hi = 0.0;
    double witness_x = std::numeric_limits<double>::quiet_NaN();
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    bool pass = false;
    bool vacuous = false;
};

struct ControlReport {
    double t = 0.0;
    std::vector<ControlRecord> records;
    bool pass = true;

    void add(ControlRecord rec);
    [[nodiscard]] const ControlRecord* find(const std::string& id, int level = 0) const;
    /// Smallest margin among non-vacuous records (+inf when there are none).
    [[nodiscard]] double worst_margin() const;
};

enum class Bound { Upper, Lower };

/// Scans nodes x[i] in [lo, hi] for value(i) against bound(x) and keeps the
/// worst relative margin: (bound - value)/bound for Upper, (value - bound)/bound
/// for Lower. A node passes when margin > -slack (strict when slack = 0), or
/// margin >= -slack when `inclusive`. No nodes in range yields a vacuous pass.
template <typename Positions, typename ValueFn, typename BoundFn>
ControlRecord scan_barrier(std::string id, int level, double lo, double hi,
                           const Positions& x, ValueFn value, BoundFn bound, Bound kind,
                           double slack, bool inclusive = false) {
    ControlRecord rec;
    rec.id = std::move(id);
    rec.level = level;
    rec.lo = lo;
    rec.hi = hi;
    rec.margin = std::numeric_limits<double>::infinity();
    bool any = false;
    for (long i = 0; i < static_cast<long>(x.size()); ++i) {
        const double xi = x[i];
        if (xi < lo || xi > hi) {
            continue;
        }
        const double v = value(i);
        const double b = bound(xi);
        double m = kind == Bound::Upper ? (b - v) : (v - b);
        if (b != 0.0) {
            m /= std::abs(b);
        }
        if (!any || m < rec.margin) {
            rec.margin = m;
            rec.witness_x = xi;
            rec.lhs = kind == Bound::Upper ? v : b;
            rec.rhs = kind == Bound::Upper ? b : v;
        }
        any = true;
    }
    if (!any) {
        rec.vacuous = true;
        rec.pass = true;
        rec.margin = std::numeric_limits<double>::infinity();
        return rec;
    }
    rec.pass = inclusive ? rec.margin >= -slack : rec.margin > -slack;
    return rec;
}

}  // namespace nlt

#pragma once

#include "nlt/monitor.hpp"
#include "nlt/state.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlt {

struct SimConfig {
    double beta = 1.0;
    double dt_init = 1e-2;  ///< largest step; also the step taken when nothing moves
    double cfl = 0.1;       ///< dt = cfl * min X_i / |dX_i/dt| over markers with rho_i > 0
    double t_max = 1.0;
    double A_stop = 1e-12;  ///< stop once the marked trajectory drops below this
    double omega_cap = 1e300;
    int snapshot_every = 0;  ///< 0 disables periodic snapshots
    double mark = 0.0;       ///< label of the marked trajectory A(t)
    double bkm_delta = 0.0;  ///< window (0, delta) of the localized BKM integral; 0 = mark
    /// Drop markers labelled below `mark` before the run. Q(x) only sees omega
    /// on [x, inf), so the markers right of A(t) form a closed system and their
    /// evolution is unchanged; the dropped core can blow up much earlier.
    bool upwind_from_mark = false;

    void validate() const;
};

enum class Termination { Running = 0, TMax = 1, AStop = 2, OmegaCap = 3, Stalled = 4 };

[[nodiscard]] const char* to_string(Termination t);
[[nodiscard]] Termination termination_from_string(const std::string& s);

struct TraceRow {
    double t = 0.0;
    double dt = 0.0;
    double A = 0.0;
    double omega_max = 0.0;
    double bkm = 0.0;
    int reason_flag = 0;
};

struct Snapshot {
    double t = 0.0;
    ParticleCloud cloud;
};

struct SimTrace {
    std::vector<TraceRow> rows;
    std::vector<Snapshot> snapshots;
    Termination termination = Termination::Running;
    double bkm_localized = 0.0;
    std::string diagnostic;
};

struct SimState {
    double t = 0.0;
    ParticleCloud cloud;
    Eigen::Index a_index = 0;
    BkmAccumulator bkm;
    double bkm_delta = 0.0;

    [[nodiscard]] double A() const { return cloud.positions()[a_index]; }
};

/// Index of the marker whose label equals `mark` (nearest label when none is exact).
[[nodiscard]] Eigen::Index find_marker(const ParticleCloud& cloud, double mark);

/// Markers from the marked trajectory rightwards, plus an empty marker at x = 0.
[[nodiscard]] ParticleCloud upwind_subcloud(const ParticleCloud& cloud, double mark);

/// Fresh state at t = 0 with the BKM accumulator seeded.
[[nodiscard]] SimState initial_state(const ParticleCloud& cloud, const SimConfig& config);

class StepRejected : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Derivative {
    Vector dX;
    Vector dOmega;
};

/// dX_i = -X_i Q(X_i); dOmega_i = rho_i / X_i^beta, and 0 whenever rho_i = 0.
[[nodiscard]] Derivative rhs(const Vector& positions, const Vector& omega, const Vector& rho,
                             double beta);
[[nodiscard]] Derivative rhs(const ParticleCloud& cloud, double beta);

/// One classical fourth-order Runge-Kutta step of y' = f(y).
[[nodiscard]] Vector rk4(const Vector& y, double dt,
                         const std::function<Vector(const Vector&)>& f);

/// One RK4 step of the marker system. rho is copied, t advanced,
/// BKM accumulated. Throws StepRejected if markers cross or leave x >= 0,
/// or omega overflows.
[[nodiscard]] SimState step(const SimState& state, double dt, double beta);

/// Largest dt allowed by the CFL rule (capped by dt_init).
[[nodiscard]] double cfl_dt(const ParticleCloud& cloud, const SimConfig& config);

using Monitor = std::function<void(const SimState&)>;

/// Adaptive RK4 loop until t_max, A(t) < A_stop, ||omega||_inf > omega_cap or stall.
/// Monitors see the initial state and every accepted step.
[[nodiscard]] SimTrace run(const ParticleCloud& cloud0, const SimConfig& config,
                           const std::vector<Monitor>& monitors = {});

}  // namespace nlt

#include "nlt/simulator.hpp"

#include "nlt/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlt {

void SimConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string("config: ") + name + " must be positive");
        }
    };
    positive(beta, "beta");
    positive(dt_init, "dt_init");
    positive(cfl, "cfl");
    positive(t_max, "t_max");
    positive(A_stop, "A_stop");
    positive(omega_cap, "omega_cap");
    if (!(cfl < 1.0)) {
        throw std::invalid_argument("config: cfl must be < 1");
    }
    if (snapshot_every < 0) {
        throw std::invalid_argument("config: snapshot_every must be >= 0");
    }
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::Running: return "running";
        case Termination::TMax: return "t_max";
        case Termination::AStop: return "A_below_A_stop";
        case Termination::OmegaCap: return "omega_cap";
        case Termination::Stalled: return "stalled";
    }
    return "unknown";
}

Termination termination_from_string(const std::string& s) {
    for (auto t : {Termination::Running, Termination::TMax, Termination::AStop,
                   Termination::OmegaCap, Termination::Stalled}) {
        if (s == to_string(t)) {
            return t;
        }
    }
    throw std::invalid_argument("unknown termination reason: " + s);
}

Eigen::Index find_marker(const ParticleCloud& cloud, double mark) {
    const Vector& label = cloud.label();
    Eigen::Index best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < label.size(); ++i) {
        const double d = std::abs(label[i] - mark);
        if (d < dist) {
            dist = d;
            best = i;
        }
    }
    return best;
}

ParticleCloud upwind_subcloud(const ParticleCloud& cloud, double mark) {
    const Eigen::Index first = find_marker(cloud, mark);
    if (first == 0) {
        return cloud;
    }
    // A fixed empty marker at the origin closes the support on the left.
    const Eigen::Index n = cloud.size() - first + 1;
    auto with_origin = [&](const Vector& v, double origin) {
        Vector out(n);
        out << origin, v.tail(n - 1);
        return out;
    };
    Vector omega = with_origin(cloud.omega(), 0.0);
    return ParticleCloud(with_origin(cloud.positions(), 0.0), std::move(omega),
                         with_origin(cloud.rho(), 0.0), with_origin(cloud.label(), 0.0));
}

SimState initial_state(const ParticleCloud& cloud, const SimConfig& config) {
    SimState s{0.0, cloud, find_marker(cloud, config.mark), {}, config.bkm_delta};
    if (!(s.bkm_delta > 0.0)) {
        s.bkm_delta = cloud.positions()[s.a_index];
    }
    s.bkm.add(0.0, sup_omega_global(cloud), sup_omega_localized(cloud, s.bkm_delta));
    return s;
}

Derivative rhs(const Vector& x, const Vector& w, const Vector& rho, double beta) {
    const Vector q = tail_integrals(x, w);
    const Eigen::Index n = x.size();
    Derivative d{Vector(n), Vector(n)};
    d.dX = -x.cwiseProduct(q);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (rho[i] == 0.0) {
            d.dOmega[i] = 0.0;
            continue;
        }
        if (!(x[i] > 0.0)) {
            throw std::logic_error("marker with rho > 0 reached x <= 0");
        }
        d.dOmega[i] = beta == 1.0 ? rho[i] / x[i] : rho[i] * std::pow(x[i], -beta);
    }
    return d;
}

Derivative rhs(const ParticleCloud& cloud, double beta) {
    return rhs(cloud.positions(), cloud.omega(), cloud.rho(), beta);
}

namespace {

bool admissible(const Vector& x) {
    if (!(x[0] >= 0.0) || !std::isfinite(x[0])) {
        return false;
    }
    for (Eigen::Index i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1]) || !std::isfinite(x[i])) {
            return false;
        }
    }
    return true;
}

Derivative stage(const Vector& x, const Vector& w, const Vector& rho, double beta) {
    if (!admissible(x)) {
        throw StepRejected("RK stage: markers crossed or left x >= 0");
    }
    return rhs(x, w, rho, beta);
}

}  // namespace

Vector rk4(const Vector& y, double dt, const std::function<Vector(const Vector&)>& f) {
    const Vector k1 = f(y);
    const Vector k2 = f(y + 0.5 * dt * k1);
    const Vector k3 = f(y + 0.5 * dt * k2);
    const Vector k4 = f(y + dt * k3);
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

SimState step(const SimState& state, double dt, double beta) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("step needs dt > 0");
    }
    const Eigen::Index n = state.cloud.size();
    const Vector& rho = state.cloud.rho();

    // State vector [X; omega].
    Vector y(2 * n);
    y << state.cloud.positions(), state.cloud.omega();
    auto f = [&](const Vector& z) {
        const Derivative d = stage(z.head(n), z.tail(n), rho, beta);
        Vector out(2 * n);
        out << d.dX, d.dOmega;
        return out;
    };
    const Vector y1 = rk4(y, dt, f);
    Vector x1 = y1.head(n);
    if (!admissible(x1)) {
        throw StepRejected("step: markers crossed or left x >= 0");
    }
    if (!y1.tail(n).allFinite()) {
        throw StepRejected("step: omega overflowed");
    }

    SimState next{state.t + dt,
                  ParticleCloud(std::move(x1), y1.tail(n), rho, state.cloud.label()),
                  state.a_index, state.bkm, state.bkm_delta};
    next.bkm.add(next.t, sup_omega_global(next.cloud),
                 sup_omega_localized(next.cloud, next.bkm_delta));
    return next;
}

double cfl_dt(const ParticleCloud& cloud, const SimConfig& config) {
    const Vector q = tail_integrals(cloud.positions(), cloud.omega());
    double qmax = 0.0;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (cloud.rho()[i] > 0.0) {
            qmax = std::max(qmax, q[i]);
        }
    }
    // X / |dX/dt| = 1 / Q.
    return qmax > 0.0 ? std::min(config.dt_init, config.cfl / qmax) : config.dt_init;
}

SimTrace run(const ParticleCloud& cloud0, const SimConfig& config,
             const std::vector<Monitor>& monitors) {
    config.validate();
    SimTrace trace;
    SimState state = initial_state(
        config.upwind_from_mark ? upwind_subcloud(cloud0, config.mark) : cloud0, config);

    auto record = [&](double dt, Termination reason) {
        trace.rows.push_back(TraceRow{state.t, dt, state.A(), sup_omega_global(state.cloud),
                                      state.bkm.global(), static_cast<int>(reason)});
    };
    auto notify = [&] {
        for (const auto& m : monitors) {
            m(state);
        }
    };
    auto finish = [&](Termination reason) {
        trace.termination = reason;
        trace.rows.back().reason_flag = static_cast<int>(reason);
        trace.bkm_localized = state.bkm.localized();
        if (trace.snapshots.empty() || trace.snapshots.back().t != state.t) {
            trace.snapshots.push_back(Snapshot{state.t, state.cloud});
        }
        return trace;
    };

    record(0.0, Termination::Running);
    trace.snapshots.push_back(Snapshot{0.0, state.cloud});
    notify();

    constexpr double kMinDt = 1e-15;
    long accepted = 0;
    for (;;) {
        if (state.A() < config.A_stop) {
            return finish(Termination::AStop);
        }
        if (sup_omega_global(state.cloud) > config.omega_cap) {
            return finish(Termination::OmegaCap);
        }
        if (state.t >= config.t_max) {
            return finish(Termination::TMax);
        }
        double dt = std::min(cfl_dt(state.cloud, config), config.t_max - state.t);
        for (;;) {
            try {
                state = step(state, dt, config.beta);
                break;
            } catch (const StepRejected& e) {
                dt *= 0.5;
                if (dt < kMinDt) {
                    trace.diagnostic = e.what();
                    return finish(Termination::Stalled);
                }
            }
        }
        // Land exactly on t_max instead of overshooting by round-off.
        if (std::abs(state.t - config.t_max) <= 1e-14 * config.t_max) {
            state.t = config.t_max;
        }
        ++accepted;
        record(dt, Termination::Running);
        if (config.snapshot_every > 0 && accepted % config.snapshot_every == 0) {
            trace.snapshots.push_back(Snapshot{state.t, state.cloud});
        }
        notify();
    }
}

}  // namespace nlt

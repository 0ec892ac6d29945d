#include "nlt/simulator.hpp"

#include "nlt/cli.hpp"
#include "nlt/exact_solution.hpp"
#include "nlt/velocity.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace nlt;

namespace {

ParticleCloud zero_cloud(Eigen::Index n) {
    const auto zero = [](double) { return 0.0; };
    return sample_profile(zero, zero, log_grid(1e-3, 4.0, n));
}

ParticleCloud truncated_cloud(double k, double taper, Eigen::Index n) {
    const auto tp = truncated_profile(SingularProfile(k, 1.0), 1e-3, 4.0, taper);
    return sample_profile(tp.omega, tp.rho, log_grid(1e-3, 4.0, n));
}

}  // namespace

TEST_CASE("rhs on the zero cloud vanishes") {
    const Derivative d = rhs(zero_cloud(64), 1.0);
    CHECK(d.dX.isZero());
    CHECK(d.dOmega.isZero());
}

TEST_CASE("rhs: rho = 0 gives no vorticity growth even near the origin") {
    Vector x(3), w(3), rho(3);
    x << 1e-300, 0.5, 1.0;
    w << 1.0, 1.0, 0.0;
    rho << 0.0, 0.0, 0.0;
    const Derivative d = rhs(x, w, rho, 1.0);
    CHECK(d.dOmega.isZero());
}

TEST_CASE("rhs: rho > 0 at x = 0 is a logic error") {
    Vector x(2), w(2), rho(2);
    x << 0.0, 1.0;
    w << 1.0, 0.0;
    rho << 1.0, 0.0;
    CHECK_THROWS_AS((void)rhs(x, w, rho, 1.0), std::logic_error);
}

TEST_CASE("rhs example at X = 0.25") {
    // Thin taper: Q(0.25) ~ 2 (2 - 1/2) = 3 so dX = -0.75; rho = 1 gives dOmega = 4.
    const ParticleCloud c = truncated_cloud(1.0, 0.01, 4096);
    const Eigen::Index i = find_marker(c, 0.25);
    REQUIRE(c.positions()[i] == doctest::Approx(0.25).epsilon(1e-3));
    const Derivative d = rhs(c, 1.0);
    const double x = c.positions()[i];
    CHECK(d.dX[i] == doctest::Approx(-x * 2.0 * (2.0 - std::sqrt(x) * 2.0 / 2.0) * 1.0)
                         .epsilon(5e-3));
    CHECK(d.dX[i] == doctest::Approx(-0.75).epsilon(5e-3));
    CHECK(d.dOmega[i] == doctest::Approx(1.0 / x).epsilon(1e-14));
}

TEST_CASE("rk4 against a closed-form trajectory") {
    // X' = -2 sqrt(X), X(0) = 1 has X(t) = (1 - t)^2.
    auto f = [](const Vector& y) -> Vector { return -2.0 * y.cwiseSqrt(); };
    Vector y(1);
    y << 1.0;
    const double dt = 0.01;
    for (int i = 0; i < 50; ++i) {
        y = rk4(y, dt, f);
    }
    CHECK(std::abs(y[0] - 0.25) < 1e-9);
}

TEST_CASE("rk4 is fourth order on a nonlinear system") {
    // Logistic x' = x (1 - x), x(0) = 0.1: x(t) = 1 / (1 + 9 e^{-t}).
    auto f = [](const Vector& y) -> Vector { return (y.array() * (1.0 - y.array())).matrix(); };
    auto solve = [&](int steps) {
        Vector y(1);
        y << 0.1;
        for (int i = 0; i < steps; ++i) {
            y = rk4(y, 2.0 / steps, f);
        }
        return y[0];
    };
    const double exact = 1.0 / (1.0 + 9.0 * std::exp(-2.0));
    const double e1 = std::abs(solve(20) - exact);
    const double e2 = std::abs(solve(40) - exact);
    CHECK(std::log2(e1 / e2) >= 3.5);
}

TEST_CASE("marker system converges at fourth order in dt") {
    const ParticleCloud c0 = truncated_cloud(1.0, 0.1, 256);
    const SimConfig cfg;
    const double T = 0.02;
    auto integrate = [&](int steps) {
        SimState s = initial_state(c0, cfg);
        for (int i = 0; i < steps; ++i) {
            s = step(s, T / steps, 1.0);
        }
        return s.cloud;
    };
    const ParticleCloud ref = integrate(64);
    const ParticleCloud a = integrate(4);
    const ParticleCloud b = integrate(8);
    const double ea = (a.positions() - ref.positions()).cwiseAbs().maxCoeff();
    const double eb = (b.positions() - ref.positions()).cwiseAbs().maxCoeff();
    CHECK(std::log2(ea / eb) >= 3.5);
}

TEST_CASE("step rejects a dt that makes markers cross") {
    const ParticleCloud c0 = truncated_cloud(1.0, 0.1, 256);
    const SimState s = initial_state(c0, SimConfig{});
    CHECK_THROWS_AS((void)step(s, 10.0, 1.0), StepRejected);
    CHECK_THROWS_AS((void)step(s, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("cfl_dt caps at dt_init and scales with cfl") {
    SimConfig cfg;
    CHECK(cfl_dt(zero_cloud(32), cfg) == cfg.dt_init);
    const ParticleCloud c = truncated_cloud(1.0, 0.1, 512);
    const Vector q = tail_integrals(c.positions(), c.omega());
    double qmax = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (c.rho()[i] > 0.0) {
            qmax = std::max(qmax, q[i]);
        }
    }
    cfg.dt_init = 1.0;
    CHECK(cfl_dt(c, cfg) == doctest::Approx(cfg.cfl / qmax).epsilon(1e-14));
}

TEST_CASE("zero data runs to t_max unchanged") {
    SimConfig cfg;
    cfg.t_max = 0.1;
    cfg.mark = 1.0;
    const ParticleCloud c0 = zero_cloud(64);
    const SimTrace tr = run(c0, cfg);
    CHECK(tr.termination == Termination::TMax);
    CHECK(tr.rows.back().t == 0.1);
    CHECK(tr.rows.back().reason_flag == 1);
    for (const auto& r : tr.rows) {
        CHECK(r.A == tr.rows.front().A);
        CHECK(r.bkm == 0.0);
    }
    CHECK(tr.snapshots.back().cloud.positions() == c0.positions());
}

TEST_CASE("monitors see the initial state and every accepted step") {
    SimConfig cfg;
    cfg.t_max = 0.05;
    int calls = 0;
    const SimTrace tr = run(zero_cloud(16), cfg, {[&](const SimState&) { ++calls; }});
    CHECK(calls == static_cast<int>(tr.rows.size()));
}

TEST_CASE("snapshots are taken every k accepted steps") {
    SimConfig cfg;
    cfg.t_max = 0.1;
    cfg.snapshot_every = 2;
    const SimTrace tr = run(zero_cloud(16), cfg);
    // 10 steps of 0.01: initial + steps 2, 4, 6, 8, 10.
    CHECK(tr.snapshots.size() == 6);
}

TEST_CASE("omega_cap terminates the run") {
    SimConfig cfg;
    cfg.t_max = 1.0;
    cfg.omega_cap = 50.0;
    cfg.mark = 0.01;
    const SimTrace tr = run(truncated_cloud(1.0, 0.1, 256), cfg);
    CHECK(tr.termination == Termination::OmegaCap);
    CHECK(tr.rows.back().omega_max > 50.0);
    CHECK(tr.rows[tr.rows.size() - 2].omega_max <= 50.0);
}

TEST_CASE("reference pack run: invariants along the flow") {
    const BarrierParams P = reference_pack();
    const ParticleCloud c0 = make_prepared_data(P, 1024);
    SimConfig cfg;
    cfg.mark = P.A0;
    cfg.A_stop = 1e-12;
    cfg.t_max = 2.0 * upper_bound_time(P);
    cfg.snapshot_every = 1;
    cfg.upwind_from_mark = true;

    const SimTrace tr = run(c0, cfg);
    const ParticleCloud sub = upwind_subcloud(c0, P.A0);
    CHECK(tr.termination == Termination::AStop);
    CHECK(tr.rows.back().t < upper_bound_time(P));

    const double decay = P.psi * std::log(4.0);
    for (std::size_t k = 1; k < tr.snapshots.size(); ++k) {
        const ParticleCloud& prev = tr.snapshots[k - 1].cloud;
        const ParticleCloud& cur = tr.snapshots[k].cloud;
        const double t = tr.snapshots[k].t;
        CHECK((cur.positions().array() <= prev.positions().array()).all());
        CHECK((cur.omega().array() >= prev.omega().array()).all());
        CHECK(cur.rho() == sub.rho());
        CHECK(cur.label() == sub.label());
        for (Eigen::Index i = 1; i < cur.size(); ++i) {
            REQUIRE(cur.positions()[i] > cur.positions()[i - 1]);
        }
        // Markers with label >= 1 cannot outrun the Q <= psi ln 4 bound there.
        for (Eigen::Index i = 0; i < cur.size(); ++i) {
            if (sub.label()[i] >= 1.0 && cur.positions()[i] >= 1.0) {
                CHECK(cur.positions()[i] >= sub.label()[i] * std::exp(-decay * t) * (1 - 1e-12));
            }
        }
    }
    for (std::size_t k = 1; k < tr.rows.size(); ++k) {
        CHECK(tr.rows[k].A < tr.rows[k - 1].A);
        CHECK(tr.rows[k].bkm > tr.rows[k - 1].bkm);
    }
}

TEST_CASE("upwind subcloud keeps the marked trajectory and everything to its right") {
    const BarrierParams P = reference_pack();
    const ParticleCloud c0 = make_prepared_data(P, 512);
    const ParticleCloud sub = upwind_subcloud(c0, P.A0);
    const Eigen::Index a = find_marker(c0, P.A0);
    REQUIRE(sub.size() == c0.size() - a + 1);
    CHECK(sub.positions()[0] == 0.0);
    CHECK(sub.omega()[0] == 0.0);
    CHECK(sub.rho()[0] == 0.0);
    CHECK(sub.positions()[1] == P.A0);
    // Q is unchanged on [A0, inf).
    const Vector q_full = tail_integrals(c0.positions(), c0.omega());
    const Vector q_sub = tail_integrals(sub.positions(), sub.omega());
    for (Eigen::Index i = 1; i < sub.size(); ++i) {
        CHECK(q_sub[i] == doctest::Approx(q_full[a + i - 1]).epsilon(1e-13));
    }
    CHECK(upwind_subcloud(c0, 0.0).size() == c0.size());
}

TEST_CASE("full prepared data collapses in the core long before T*") {
    // The ramp below A0 carries an x^{-1/2} profile at scale eps, which blows
    // up on a time scale ~ eps^{1/2}; the full system stalls there.
    const BarrierParams P = reference_pack();
    SimConfig cfg;
    cfg.mark = P.A0;
    cfg.t_max = 1.0;
    const SimTrace tr = run(make_prepared_data(P, 256), cfg);
    CHECK(tr.termination == Termination::Stalled);
    CHECK_FALSE(tr.diagnostic.empty());
    CHECK(tr.rows.back().t < 1e-3);
    CHECK(tr.rows.back().A > 1e-12);
}

TEST_CASE("config validation") {
    auto bad = [](auto mutate) {
        SimConfig c;
        mutate(c);
        return c;
    };
    CHECK_NOTHROW(SimConfig{}.validate());
    CHECK_THROWS_AS(bad([](SimConfig& c) { c.dt_init = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SimConfig& c) { c.cfl = 1.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SimConfig& c) { c.beta = -1; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SimConfig& c) { c.t_max = NAN; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SimConfig& c) { c.snapshot_every = -1; }).validate(),
                    std::invalid_argument);
}

TEST_CASE("termination names round-trip") {
    for (auto t : {Termination::Running, Termination::TMax, Termination::AStop,
                   Termination::OmegaCap, Termination::Stalled}) {
        CHECK(termination_from_string(to_string(t)) == t);
    }
    CHECK(std::string(to_string(Termination::AStop)) == "A_below_A_stop");
    CHECK_THROWS_AS((void)termination_from_string("bogus"), std::invalid_argument);
}

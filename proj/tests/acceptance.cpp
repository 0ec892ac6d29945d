// Acceptance suite: one PASS/FAIL line per criterion. Run with a criterion
// number (1-8) or without arguments for all of them. Exit status is nonzero
// when any selected criterion fails.

#include "nlt/cli.hpp"
#include "nlt/exact_solution.hpp"
#include "nlt/velocity.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

using namespace nlt;

namespace {

// Pinned tolerances and limits.
constexpr double kQRelTol = 1e-3;
constexpr double kQMinOrder = 1.9;
constexpr double kQMaxSeconds = 1.0;
constexpr double kResidualTol = 1e-6;
constexpr double kPrintedTol = 1e-6;
constexpr double kMaterialRelTol = 1e-4;
constexpr double kMaterialHorizon = 0.05;
constexpr double kMaterialLo = 1e-2;  // the inner edge collapses on a time scale ~ sqrt(lo)
constexpr double kMaterialMaxSeconds = 10.0;
constexpr double kBarrierSlack = 1e-6;
constexpr double kBarrierAStop = 1e-12;
constexpr double kBkmGrowth = 5.0;
constexpr Eigen::Index kBarrierParticles = 8192;
constexpr double kBarrierMaxSeconds = 300.0;
constexpr double kTrapLower = 0.9274;
constexpr double kTrapUpper = 1.0934;
constexpr double kTrapTol = 1e-4;
constexpr double kPhiInfMin = 0.6;
constexpr double kSequenceMaxSeconds = 0.1;
constexpr double kMsA0 = 1e-4;
constexpr double kMsDelta = 0.05;
constexpr double kMsAStop = 1e-8;
constexpr Eigen::Index kMsParticles = 8192;
constexpr double kEnvelopeMin = 0.5;
constexpr double kEnvelopeMax = 2.0;
constexpr double kSlopeLo = -0.55;
constexpr double kSlopeHi = -0.45;
constexpr double kMsMaxSeconds = 300.0;

class Stopwatch {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

// Criterion 1: Q on the truncated singular profile against the closed form.
Outcome velocity_oracle() {
    Outcome o;
    const double a = 1e-3, b = 4.0, tau = 0.1;
    const auto tp = truncated_profile(SingularProfile(1.0, 1.0), a, b, tau);
    // Effective cutoff: the core closed form 2(x^{-1/2} - b_eff^{-1/2}) absorbs
    // the tapered band, whose contribution comes from quadrature.
    const double band = oracle::integrate([&](double y) { return tp.omega(y) / y; }, tp.core_hi, b);
    const double inv_sqrt_beff = 1.0 / std::sqrt(tp.core_hi) - 0.5 * band;
    auto closed_form = [&](double x) { return 2.0 * (1.0 / std::sqrt(x) - inv_sqrt_beff); };

    std::vector<double> xs(100);
    for (double& x : xs) {
        x = oracle::log_uniform(tp.core_lo, tp.core_hi);
    }
    const Stopwatch clock;
    auto max_err = [&](Eigen::Index n) {
        const VelocityField f = compute_Q(sample_profile(tp.omega, tp.rho, log_grid(a, b, n)));
        double err = 0.0;
        for (double x : xs) {
            err = std::max(err, std::abs(q_at(f, x) - closed_form(x)) / closed_form(x));
        }
        return err;
    };
    const double e1 = max_err(4096);
    const double elapsed = clock.seconds();
    const double e2 = max_err(8192);
    const double order = std::log2(e1 / e2);
    o.require(e1 <= kQRelTol, "max rel error " + fmt("%.3g", e1));
    o.require(order >= kQMinOrder, "refinement order " + fmt("%.3g", order));
    o.require(elapsed < kQMaxSeconds, "runtime " + fmt("%.3g", elapsed) + " s");
    o.note("max rel error " + fmt("%.2e", e1) + ", order " + fmt("%.2f", order) + ", " +
           fmt("%.3f", elapsed) + " s");
    return o;
}

// Criterion 2: residual of the stationary singular solution, and of the printed velocity.
Outcome exact_residual() {
    Outcome o;
    const double k = 1.0, h = 1e-4;
    double worst = 0.0, worst_printed = 0.0;
    for (double beta : {0.5, 1.0, 2.0}) {
        const SingularProfile prof(k, beta);
        const SpaceTimeFn w = [&](double x, double) { return exact_omega(prof, x); };
        const SpaceTimeFn r = [&](double, double) { return exact_rho(prof); };
        const SpaceTimeFn u = [&](double x, double) { return exact_u(prof, x); };
        const SpaceTimeFn u_printed = [&](double x, double) { return -k * std::sqrt(x); };
        for (double x : {0.1, 1.0, 2.0}) {
            const Residual res = pde_residual(w, r, u, beta, x, 0.0, h);
            worst = std::max({worst, std::abs(res.omega), std::abs(res.rho)});
            if (beta == 1.0) {
                // omega_t + u omega_x - rho/x with u = -k x^{1/2}: residual -k^2/(2x).
                const Residual bad = pde_residual(w, r, u_printed, beta, x, 0.0, h);
                const double expected = -k * k / (2.0 * x);
                worst_printed = std::max(worst_printed, std::abs(bad.omega - expected));
            }
        }
    }
    o.require(worst <= kResidualTol, "exact residual " + fmt("%.3g", worst));
    o.require(worst_printed <= kPrintedTol,
              "printed-velocity residual off k^2/(2x) by " + fmt("%.3g", worst_printed));
    o.note("max residual " + fmt("%.2e", worst) + ", printed velocity residual matches -k^2/(2x) to " +
           fmt("%.2e", worst_printed));
    return o;
}

// Criterion 3: finite-difference D omega / Dt along trajectories against rho / X.
Outcome material_derivative() {
    Outcome o;
    const Stopwatch clock;
    const auto tp = truncated_profile(SingularProfile(1.0, 1.0), kMaterialLo, 4.0, 0.1);
    const ParticleCloud c0 = sample_profile(tp.omega, tp.rho, log_grid(kMaterialLo, 4.0, 512));
    SimConfig cfg;
    cfg.t_max = kMaterialHorizon;
    cfg.dt_init = 1e-3;
    cfg.mark = 0.1;
    cfg.snapshot_every = 1;
    const SimTrace tr = run(c0, cfg);
    o.require(tr.termination == Termination::TMax,
              std::string("run ended with ") + to_string(tr.termination));

    double worst = 0.0;
    bool rho_constant = true;
    const auto& snaps = tr.snapshots;
    for (const auto& s : snaps) {
        rho_constant = rho_constant && s.cloud.rho() == c0.rho();
    }
    for (std::size_t k = 2; k + 2 < snaps.size(); ++k) {
        std::array<double, 5> t{};
        for (int j = 0; j < 5; ++j) {
            t[j] = snaps[k - 2 + j].t;
        }
        const ParticleCloud& mid = snaps[k].cloud;
        for (Eigen::Index i = 1; i + 1 < mid.size(); ++i) {
            if (c0.rho()[i] == 0.0) {
                continue;
            }
            std::array<double, 5> w{};
            for (int j = 0; j < 5; ++j) {
                w[j] = snaps[k - 2 + j].cloud.omega()[i];
            }
            const double fd = oracle::lagrange5_derivative(t, w);
            const double exact = mid.rho()[i] / mid.positions()[i];
            worst = std::max(worst, std::abs(fd - exact) / exact);
        }
    }
    const double elapsed = clock.seconds();
    o.require(snaps.size() >= 5, "too few recorded states");
    o.require(worst <= kMaterialRelTol, "max rel mismatch " + fmt("%.3g", worst));
    o.require(rho_constant, "rho changed along the run");
    o.require(elapsed < kMaterialMaxSeconds, "runtime " + fmt("%.3g", elapsed) + " s");
    o.note(std::to_string(snaps.size()) + " states, max rel mismatch " + fmt("%.2e", worst) +
           ", rho bitwise constant, " + fmt("%.2f", elapsed) + " s");
    return o;
}

SimConfig barrier_config(const BarrierParams& P) {
    SimConfig cfg;
    cfg.beta = P.beta;
    cfg.mark = P.A0;
    cfg.A_stop = kBarrierAStop;
    cfg.t_max = 2.0 * upper_bound_time(P);
    cfg.upwind_from_mark = true;
    return cfg;
}

SimConfig multiscale_config() {
    SimConfig cfg;
    cfg.mark = kMsA0;
    cfg.A_stop = kMsAStop;
    cfg.upwind_from_mark = true;
    return cfg;
}

// bkm at time t by linear interpolation of the trace.
double bkm_at(const std::vector<TraceRow>& rows, double t) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].t >= t) {
            const double s = (t - rows[i - 1].t) / (rows[i].t - rows[i - 1].t);
            return rows[i - 1].bkm + s * (rows[i].bkm - rows[i - 1].bkm);
        }
    }
    return rows.back().bkm;
}

// Criterion 4: barrier persistence on the reference pack.
Outcome barrier_persistence() {
    Outcome o;
    const Stopwatch clock;
    const BarrierParams P = reference_pack();
    const bool lines = verify_cond_params(P).pass;
    const ParticleCloud c0 = sample_prepared_data(P, kBarrierParticles);
    const bool prepared = verify_suitably_prepared(c0, P).pass;
    o.require(lines && prepared, "t = 0 certification failed");
    if (!o.pass) {
        return o;
    }
    const ControlledRun r = run_controlled_single(P, c0, barrier_config(P), kBarrierSlack);
    const auto& rows = r.trace.rows;
    const double t_star = upper_bound_time(P);
    bool a_decreasing = true, bkm_increasing = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        a_decreasing = a_decreasing && rows[i].A < rows[i - 1].A;
        bkm_increasing = bkm_increasing && rows[i].bkm > rows[i - 1].bkm;
    }
    const double t_end = rows.back().t;
    const double growth = rows.back().bkm / bkm_at(rows, 0.5 * t_end);
    const double elapsed = clock.seconds();
    o.require(r.trace.termination == Termination::AStop,
              std::string("terminated with ") + to_string(r.trace.termination));
    o.require(r.controlled_throughout, "control lost during the run");
    o.require(t_end < t_star, "t_end " + fmt("%.4g", t_end) + " >= T*");
    o.require(a_decreasing, "A(t) not strictly decreasing");
    o.require(bkm_increasing, "BKM not strictly increasing");
    o.require(growth >= kBkmGrowth, "BKM growth " + fmt("%.3g", growth));
    o.require(elapsed < kBarrierMaxSeconds, "runtime " + fmt("%.3g", elapsed) + " s");
    o.note("A(t_end) = " + fmt("%.3e", rows.back().A) + " at t = " + fmt("%.4e", t_end) +
           " < T* = " + fmt("%.5f", t_star) + ", " + std::to_string(rows.size() - 1) +
           " controlled steps, bkm(t_end)/bkm(t_end/2) = " + fmt("%.2f", growth) + ", " +
           fmt("%.2f", elapsed) + " s");
    return o;
}

// Criterion 5: control => Q bounds on every recorded state of the criterion 4 run.
Outcome control_implies_q() {
    Outcome o;
    const BarrierParams P = reference_pack();
    const ParticleCloud c0 = make_prepared_data(P, kBarrierParticles);
    long states = 0, controlled = 0, violations = 0;
    const Monitor check = [&](const SimState& s) {
        ++states;
        if (check_control_single(s.cloud, s.A(), P, kBarrierSlack).pass) {
            ++controlled;
            if (!check_Q_single(s.cloud, s.A(), P, kBarrierSlack).pass) {
                ++violations;
            }
        }
    };
    const SimTrace tr = run(c0, barrier_config(P), {check});
    o.require(tr.termination == Termination::AStop, "run did not reach A_stop");
    o.require(controlled > 0, "no controlled states");
    o.require(violations == 0, std::to_string(violations) + " controlled states violate Q bounds");
    o.note(std::to_string(states) + " states, " + std::to_string(controlled) + " controlled, " +
           std::to_string(violations) + " Q-bound violations");
    return o;
}

// Criterion 6: certification of the reference multiscale sequences.
Outcome sequence_certification() {
    Outcome o;
    const Stopwatch clock;
    const BarrierSequences s = reference_sequences();
    const SequenceReport rep = verify_sequence_conditions(s);
    const double elapsed = clock.seconds();

    // n = 1 trapping margins recomputed from the raw inputs.
    const double p1 = 0.5 - 0.05, q1 = 0.5 + 0.05;
    const double mu1 = std::log(0.9 / 0.8);
    const double lower = p1 / ((1.0 - mu1) * (1.0 - p1));
    const double upper = q1 / ((1.0 + mu1) * (1.0 - q1));
    const ControlRecord* t1 = rep.find("trapping", 1);
    o.require(t1 != nullptr && t1->pass, "trapping fails at n = 1");
    o.require(std::abs(lower - kTrapLower) <= kTrapTol && std::abs(upper - kTrapUpper) <= kTrapTol,
              "recomputed n = 1 margins " + fmt("%.4f", lower) + " / " + fmt("%.4f", upper));
    if (t1 != nullptr) {
        o.require(std::abs(t1->lhs - lower) <= kTrapTol && std::abs(t1->rhs - upper) <= kTrapTol,
                  "library n = 1 margins disagree with recomputation");
    }
    std::string failing_levels;
    for (int n = 1; n <= s.N; ++n) {
        const ControlRecord* r = rep.find("cond_trap_1", n);
        if (r == nullptr || !r->pass) {
            failing_levels += (failing_levels.empty() ? "" : ",") + std::to_string(n);
        }
    }
    o.require(failing_levels.empty(), "cond_trap_1 fails at n = " + failing_levels);
    o.require(rep.phi_inf > kPhiInfMin, "phi_inf = " + fmt("%.4f", rep.phi_inf));
    o.require(rep.pass, "verify_sequence_conditions reports failure");
    o.require(elapsed < kSequenceMaxSeconds, "runtime " + fmt("%.3g", elapsed) + " s");
    o.note("n = 1 margins " + fmt("%.4f", lower) + " < 1 < " + fmt("%.4f", upper));
    return o;
}

// Criterion 7: multiscale-controlled run of the reference sequences.
Outcome multiscale_run() {
    Outcome o;
    const Stopwatch clock;
    const BarrierSequences s = reference_sequences();
    const ParticleCloud c0 = make_prepared_data_multiscale(s, kMsA0, kMsDelta, kMsParticles);
    const ControlledRun r = run_controlled_multiscale(s, c0, multiscale_config(), kBarrierSlack);
    double phi_min = INFINITY, psi_max = 0.0;
    for (const auto& env : r.envelope_history) {
        phi_min = std::min(phi_min, env.phi_eff);
        psi_max = std::max(psi_max, env.psi_eff);
    }
    const double slope = r.report.exponent_fit ? r.report.exponent_fit->slope : NAN;
    const double elapsed = clock.seconds();
    o.require(r.trace.termination == Termination::AStop,
              std::string("terminated with ") + to_string(r.trace.termination));
    o.require(r.controlled_throughout, "multiscale control lost");
    o.require(r.envelope_history.size() == r.trace.rows.size(), "envelope missing for a step");
    o.require(phi_min >= kEnvelopeMin, "phi_eff dropped to " + fmt("%.4f", phi_min));
    o.require(psi_max <= kEnvelopeMax, "psi_eff rose to " + fmt("%.4f", psi_max));
    o.require(slope >= kSlopeLo && slope <= kSlopeHi, "fitted slope " + fmt("%.4f", slope));
    o.require(elapsed < kMsMaxSeconds, "runtime " + fmt("%.3g", elapsed) + " s");
    o.note("A(t_end) = " + fmt("%.3e", r.trace.rows.back().A) + ", envelope in [" +
           fmt("%.4f", phi_min) + ", " + fmt("%.4f", psi_max) + "], slope " +
           fmt("%.4f", slope) + ", " + fmt("%.2f", elapsed) + " s (sequence conditions bypassed)");
    return o;
}

std::string trace_text(const SimTrace& tr) {
    std::ostringstream os;
    write_trace_csv(os, tr);
    return os.str();
}

// Criterion 8: repeated runs give byte-identical traces.
Outcome determinism() {
    Outcome o;
    const BarrierParams P = reference_pack();
    const ParticleCloud beta_data = make_prepared_data(P, kBarrierParticles);
    const BarrierSequences s = reference_sequences();
    const ParticleCloud ms_data = make_prepared_data_multiscale(s, kMsA0, kMsDelta, kMsParticles);
    auto beta_trace = [&] {
        return trace_text(run_controlled_single(P, beta_data, barrier_config(P), kBarrierSlack).trace);
    };
    auto ms_trace = [&] {
        return trace_text(
            run_controlled_multiscale(s, ms_data, multiscale_config(), kBarrierSlack).trace);
    };
    const std::string b1 = beta_trace(), b2 = beta_trace();
    const std::string m1 = ms_trace(), m2 = ms_trace();
    o.require(b1 == b2, "single-scale traces differ");
    o.require(m1 == m2, "multiscale traces differ");
    o.note("traces of " + std::to_string(b1.size()) + " and " + std::to_string(m1.size()) +
           " bytes identical");
    return o;
}

struct Criterion {
    const char* name;
    Outcome (*check)();
};

const Criterion kCriteria[] = {
    {"velocity oracle", velocity_oracle},
    {"exact-solution residual", exact_residual},
    {"material derivative", material_derivative},
    {"barrier persistence", barrier_persistence},
    {"control implies Q bounds", control_implies_q},
    {"sequence certification", sequence_certification},
    {"multiscale controlled run", multiscale_run},
    {"determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
    constexpr int count = static_cast<int>(std::size(kCriteria));
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k < 1 || k > count) {
            std::fprintf(stderr, "usage: %s [criterion 1-%d ...]\n", argv[0], count);
            return 2;
        }
        selected.push_back(k);
    }
    if (selected.empty()) {
        for (int k = 1; k <= count; ++k) {
            selected.push_back(k);
        }
    }
    bool all = true;
    for (int k : selected) {
        Outcome o;
        try {
            o = kCriteria[k - 1].check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", k,
                    kCriteria[k - 1].name, o.detail.c_str());
        all = all && o.pass;
    }
    return all ? 0 : 1;
}

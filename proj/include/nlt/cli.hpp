#pragma once

#include "nlt/barrier_params.hpp"
#include "nlt/io.hpp"
#include "nlt/sequences.hpp"
#include "nlt/simulator.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace nlt {

enum ExitCode : int { kExitOk = 0, kExitCertification = 1, kExitUsage = 2 };

/// Runs the tool with `args` (program name excluded); returns the exit code.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// The reference beta-model pack (beta = 1, m = 1, p = 0.2, q = 0.8).
[[nodiscard]] BarrierParams reference_pack();

/// The reference multiscale sequence inputs (phi1 = 0.8, eps1 = 0.05, L = 5, C = 4, N = 8).
[[nodiscard]] BarrierSequences reference_sequences();

/// Initial data from a CSV path or a generator spec "gen:<kind>[,key=value...]".
/// Kinds: ref (reference pack), select (m, beta), ms (reference sequences, A0,
/// delta) and exact (k, beta, lo, hi, taper). Every kind takes n (particle count).
[[nodiscard]] ParticleCloud load_data(const std::string& spec);

/// Simulation with per-step control monitoring.
struct ControlledRun {
    SimTrace trace;
    RunReport report;
    bool controlled_throughout = true;
    std::vector<Envelope> envelope_history;  ///< one per recorded state (multiscale only)
};

[[nodiscard]] ControlledRun run_controlled_single(const BarrierParams& params,
                                                  const ParticleCloud& cloud,
                                                  const SimConfig& config, double slack);

/// Envelope and exponent fits use the window [A(t), lambda0].
[[nodiscard]] ControlledRun run_controlled_multiscale(const BarrierSequences& seq,
                                                      const ParticleCloud& cloud,
                                                      const SimConfig& config, double slack);

struct SweepRow {
    std::string pack_id;
    double t_end = 0.0;
    double a_end = 0.0;
    double bkm_end = 0.0;
    bool controlled_throughout = false;
    std::string termination;
    std::string error;  ///< nonempty when the entry failed
};

/// Manifest: {"entries": [{"id", "m", "beta", "particles", "config": {...}}
/// or {"id", "params": {...}, ...}]}. Entries run concurrently up to `jobs`;
/// rows come back in manifest order.
[[nodiscard]] std::vector<SweepRow> run_sweep(const Json& manifest, int jobs, double slack);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace nlt

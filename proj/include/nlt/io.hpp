#pragma once

#include "nlt/barrier_params.hpp"
#include "nlt/control_report.hpp"
#include "nlt/monitor.hpp"
#include "nlt/sequences.hpp"
#include "nlt/simulator.hpp"
#include "nlt/state.hpp"
#include "nlt/velocity.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlt {

using Json = nlohmann::ordered_json;

/// Malformed input file or config; `key()` names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what);
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Shortest decimal text that round-trips (printf %.17g).
[[nodiscard]] std::string fmt_double(double v);

// Profile snapshots: header x,omega,rho,label and, when a velocity field is
// given, the extra columns Q,u.
void write_profile_csv(std::ostream& os, const ParticleCloud& cloud,
                       const VelocityField* field = nullptr);
[[nodiscard]] ParticleCloud read_profile_csv(std::istream& is);

void write_trace_csv(std::ostream& os, const SimTrace& trace);
[[nodiscard]] std::vector<TraceRow> read_trace_csv(std::istream& is);

[[nodiscard]] Json to_json(const ControlRecord& rec);
[[nodiscard]] Json to_json(const ControlReport& report);
[[nodiscard]] Json to_json(const BarrierParams& params);
[[nodiscard]] BarrierParams params_from_json(const Json& j);
[[nodiscard]] Json to_json(const BarrierSequences& seq);
[[nodiscard]] BarrierSequences sequences_from_json(const Json& j);
[[nodiscard]] Json to_json(const SequenceReport& report);
[[nodiscard]] Json to_json(const ExponentFit& fit);
[[nodiscard]] Json to_json(const Envelope& env);

/// Flat JSON config; unknown keys and wrong types raise ConfigError.
[[nodiscard]] SimConfig config_from_json(const Json& j, SimConfig defaults = {});
[[nodiscard]] Json to_json(const SimConfig& config);

/// Per-level table n,lam,eps,p,q,phi,psi,mu,F_bracket (F_bracket empty at n = 1).
void write_sequences_csv(std::ostream& os, const BarrierSequences& seq);

struct ControlSample {
    double t = 0.0;
    bool pass = true;
    double worst_margin = 0.0;
};

struct RunReport {
    std::string termination;
    double t_end = 0.0;
    double a_end = 0.0;
    double t_star = 0.0;
    double bkm_end = 0.0;
    double bkm_localized = 0.0;
    std::optional<ExponentFit> exponent_fit;
    std::optional<Envelope> envelope;
    std::vector<ControlSample> control_history;
    bool forced = false;
};

[[nodiscard]] Json to_json(const RunReport& report);
[[nodiscard]] RunReport run_report_from_json(const Json& j);

[[nodiscard]] Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace nlt

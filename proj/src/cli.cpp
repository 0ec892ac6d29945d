#include "nlt/cli.hpp"

#include "nlt/exact_solution.hpp"
#include "nlt/monitor.hpp"
#include "nlt/svg_plot.hpp"
#include "nlt/velocity.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace nlt {

namespace fs = std::filesystem;

BarrierParams reference_pack() {
    return BarrierParams::make(1.0, 0.2, 0.8, 1.1875, 1.6, 0.19, 1.0, 1e-8, 1e-9);
}

BarrierSequences reference_sequences() {
    return build_sequences(0.8, 0.05, 0.9, 0.85, 0.8, 5.0, 4.0, 8);
}

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::map<std::string, std::string> parse_kv(const std::string& text, std::string& kind) {
    std::map<std::string, std::string> kv;
    std::istringstream ss(text);
    std::string item;
    bool first = true;
    while (std::getline(ss, item, ',')) {
        if (first) {
            kind = item;
            first = false;
            continue;
        }
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(item, "expected key=value in generator spec");
        }
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return kv;
}

double kv_num(std::map<std::string, std::string>& kv, const std::string& key, double fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        return fallback;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) {
            throw std::invalid_argument(it->second);
        }
        kv.erase(it);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key, "not a number: '" + it->second + "'");
    }
}

Json parse_flat_config(const std::string& path) {
    return path.empty() ? Json::object() : read_json_file(path);
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Destination for a mode's artifacts: a directory, or stdout for the primary
// artifact when no directory was given.
class Sink {
public:
    Sink(std::string dir, std::ostream& out) : dir_(std::move(dir)), out_(out) {
        if (!dir_.empty()) {
            std::error_code ec;
            fs::create_directories(dir_, ec);
            if (ec || !fs::is_directory(dir_)) {
                throw UsageError("cannot create output directory " + dir_);
            }
        }
    }

    bool has_dir() const { return !dir_.empty(); }

    void file(const std::string& name, const std::string& text) const {
        write_text_file((fs::path(dir_) / name).string(), text);
    }

    // Primary artifact: file when a directory is set, stdout otherwise.
    void primary(const std::string& name, const std::string& text) const {
        if (has_dir()) {
            file(name, text);
        } else {
            out_ << text;
        }
    }

    void metadata(const std::vector<std::string>& args) const {
        if (!has_dir()) {
            return;
        }
        Json meta;
        meta["created_utc"] = utc_now();
        meta["args"] = args;
        file("metadata.json", meta.dump(2) + "\n");
    }

private:
    std::string dir_;
    std::ostream& out_;
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

template <typename F>
std::string to_text(F&& writer) {
    std::ostringstream os;
    writer(os);
    return os.str();
}

struct PackOptions {
    std::string pack;
    std::string params_path;
    double m = 1.0;
    double beta = 1.0;
    std::optional<double> A0;

    void add_to(CLI::App* app) {
        app->add_option("--pack", pack, "named pack: ref");
        app->add_option("--params", params_path, "parameter pack JSON")->check(CLI::ExistingFile);
        app->add_option("--m", m, "rho bound m >= 1 for automatic selection")
            ->capture_default_str();
        app->add_option("--beta", beta, "forcing exponent for automatic selection")
            ->capture_default_str();
        app->add_option("--A0", A0, "override the inner cutoff A0 of the pack");
    }

    BarrierParams resolve() const {
        BarrierParams P;
        if (!pack.empty()) {
            if (pack != "ref") {
                throw UsageError("unknown pack '" + pack + "' (known: ref)");
            }
            P = reference_pack();
        } else if (!params_path.empty()) {
            P = params_from_json(read_json_file(params_path));
        } else {
            P = select_params(m, beta);
        }
        if (A0) {
            try {
                P = BarrierParams::make(P.beta, P.p, P.q, P.phi, P.psi, P.delta, P.m, *A0,
                                        std::min(P.eps, *A0 / 10.0));
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
        }
        return P;
    }
};

struct SequenceOptions {
    double phi1 = 0.8;
    double eps1 = 0.05;
    double lam_m2 = 0.9;
    double lam_m1 = 0.85;
    double lam0 = 0.8;
    double L = 5.0;
    double C = 4.0;
    int levels = 8;
    bool auto_L = false;

    void add_to(CLI::App* app) {
        app->add_option("--phi1", phi1)->capture_default_str();
        app->add_option("--eps1", eps1)->capture_default_str();
        app->add_option("--lam-m2", lam_m2)->capture_default_str();
        app->add_option("--lam-m1", lam_m1)->capture_default_str();
        app->add_option("--lam0", lam0)->capture_default_str();
        app->add_option("--L", L)->capture_default_str();
        app->add_option("--C", C)->capture_default_str();
        app->add_option("--levels", levels)->capture_default_str();
        app->add_flag("--auto-L", auto_L, "double L until cond_trap_1 holds at every level");
    }

    BarrierSequences resolve() const {
        try {
            return auto_L ? build_sequences_auto_L(phi1, eps1, lam_m2, lam_m1, lam0, L, C, levels)
                          : build_sequences(phi1, eps1, lam_m2, lam_m1, lam0, L, C, levels);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
};

Json lines_json(const ControlReport& report) {
    Json lines = Json::array();
    for (const auto& r : report.records) {
        lines.push_back(Json{{"id", r.id},
                             {"lhs", r.lhs},
                             {"rhs", r.rhs},
                             {"margin", r.margin},
                             {"pass", r.pass}});
    }
    return lines;
}

SimConfig beta_defaults(const BarrierParams& P) {
    SimConfig c;
    c.beta = P.beta;
    c.mark = P.A0;
    c.A_stop = P.A0 * 1e-4;
    c.t_max = 2.0 * upper_bound_time(P);
    c.upwind_from_mark = true;
    return c;
}

SimConfig multiscale_defaults(double A0) {
    SimConfig c;
    c.beta = 1.0;
    c.mark = A0;
    c.A_stop = A0 * 1e-4;
    c.upwind_from_mark = true;
    return c;
}

void fill_common(RunReport& r, const SimTrace& trace, const SimState& last) {
    r.termination = to_string(trace.termination);
    r.t_end = last.t;
    r.a_end = last.A();
    r.bkm_end = last.bkm.global();
    r.bkm_localized = last.bkm.localized();
}

// Final-state fits; skipped when the window holds too few nodes.
void final_fits(RunReport& r, const ParticleCloud& cloud, double lo, double hi) {
    try {
        r.exponent_fit = fit_exponent(cloud, lo, hi);
        r.envelope = envelope_check(cloud, lo, hi);
    } catch (const std::invalid_argument&) {
    }
}

std::string profile_text(const ParticleCloud& cloud) {
    const VelocityField field = compute_Q(cloud);
    return to_text([&](std::ostream& os) { write_profile_csv(os, cloud, &field); });
}

void write_run(const Sink& sink, const ControlledRun& run) {
    sink.file("trace.csv", to_text([&](std::ostream& os) { write_trace_csv(os, run.trace); }));
    sink.file("report.json", dump(to_json(run.report)));
    sink.file("initial_profile.csv", profile_text(run.trace.snapshots.front().cloud));
    sink.file("final_profile.csv", profile_text(run.trace.snapshots.back().cloud));
    for (std::size_t k = 1; k + 1 < run.trace.snapshots.size(); ++k) {
        sink.file("snapshot_" + std::to_string(k) + ".csv",
                  profile_text(run.trace.snapshots[k].cloud));
    }
}

}  // namespace

ParticleCloud load_data(const std::string& spec) {
    if (spec.rfind("gen:", 0) != 0) {
        std::ifstream in(spec);
        if (!in) {
            throw ConfigError("data", "cannot open " + spec);
        }
        return read_profile_csv(in);
    }
    std::string kind;
    auto kv = parse_kv(spec.substr(4), kind);
    const auto n = static_cast<Eigen::Index>(kv_num(kv, "n", 4096));
    ParticleCloud cloud = [&] {
        if (kind == "ref") {
            return make_prepared_data(reference_pack(), n);
        }
        if (kind == "select") {
            const double m = kv_num(kv, "m", 1.0);
            return make_prepared_data(select_params(m, kv_num(kv, "beta", 1.0)), n);
        }
        if (kind == "ms") {
            const double A0 = kv_num(kv, "A0", 1e-4);
            return make_prepared_data_multiscale(reference_sequences(), A0,
                                                 kv_num(kv, "delta", 0.05), n);
        }
        if (kind == "exact") {
            const SingularProfile prof(kv_num(kv, "k", 1.0), kv_num(kv, "beta", 1.0));
            const double lo = kv_num(kv, "lo", 1e-3);
            const double hi = kv_num(kv, "hi", 4.0);
            const auto tp = truncated_profile(prof, lo, hi, kv_num(kv, "taper", 0.1));
            return sample_profile(tp.omega, tp.rho, log_grid(lo, hi, n));
        }
        throw ConfigError("data", "unknown generator '" + kind + "'");
    }();
    if (!kv.empty()) {
        throw ConfigError(kv.begin()->first, "unknown generator parameter");
    }
    return cloud;
}

ControlledRun run_controlled_single(const BarrierParams& P, const ParticleCloud& cloud,
                                    const SimConfig& config, double slack) {
    ControlledRun out;
    std::optional<SimState> last;
    Monitor control = [&](const SimState& s) {
        const ControlReport rep = check_control_single(s.cloud, s.A(), P, slack, s.t);
        out.report.control_history.push_back(ControlSample{s.t, rep.pass, rep.worst_margin()});
        out.controlled_throughout = out.controlled_throughout && rep.pass;
        last = s;
    };
    out.trace = run(cloud, config, {control});
    fill_common(out.report, out.trace, *last);
    out.report.t_star = upper_bound_time(P);
    final_fits(out.report, last->cloud, last->A(), 1.0);
    return out;
}

ControlledRun run_controlled_multiscale(const BarrierSequences& seq, const ParticleCloud& cloud,
                                        const SimConfig& config, double slack) {
    ControlledRun out;
    std::optional<SimState> last;
    Monitor control = [&](const SimState& s) {
        const ControlReport rep = check_control_multiscale(s.cloud, s.A(), seq, slack, s.t);
        out.report.control_history.push_back(ControlSample{s.t, rep.pass, rep.worst_margin()});
        out.controlled_throughout = out.controlled_throughout && rep.pass;
        try {
            out.envelope_history.push_back(envelope_check(s.cloud, s.A(), seq.lam0));
        } catch (const std::invalid_argument&) {
            out.envelope_history.push_back(Envelope{});
        }
        last = s;
    };
    out.trace = run(cloud, config, {control});
    fill_common(out.report, out.trace, *last);
    out.report.t_star = std::numeric_limits<double>::quiet_NaN();
    final_fits(out.report, last->cloud, last->A(), seq.lam0);
    return out;
}

std::vector<SweepRow> run_sweep(const Json& manifest, int jobs, double slack) {
    const Json entries = manifest.is_array() ? manifest : manifest.value("entries", Json::array());
    if (!entries.is_array()) {
        throw ConfigError("entries", "expected an array");
    }
    std::vector<SweepRow> rows(entries.size());
    auto run_one = [&](std::size_t i) {
        const Json& e = entries[i];
        SweepRow& row = rows[i];
        row.pack_id = e.is_object() && e.contains("id") && e.at("id").is_string()
                          ? e.at("id").get<std::string>()
                          : "entry" + std::to_string(i);
        try {
            if (!e.is_object()) {
                throw ConfigError("entries", "entry must be an object");
            }
            BarrierParams P;
            if (e.contains("params")) {
                P = params_from_json(e.at("params"));
            } else if (e.value("pack", "") == "ref") {
                P = reference_pack();
            } else {
                P = select_params(e.value("m", 1.0), e.value("beta", 1.0));
            }
            const ControlReport cert = verify_cond_params(P);
            if (!cert.pass) {
                for (const auto& r : cert.records) {
                    if (!r.pass) {
                        throw std::runtime_error("certification failed: line " + r.id);
                    }
                }
            }
            const auto n = e.value("particles", static_cast<Eigen::Index>(2048));
            const SimConfig cfg =
                config_from_json(e.value("config", Json::object()), beta_defaults(P));
            const ControlledRun r = run_controlled_single(P, make_prepared_data(P, n), cfg, slack);
            row.t_end = r.report.t_end;
            row.a_end = r.report.a_end;
            row.bkm_end = r.report.bkm_end;
            row.controlled_throughout = r.controlled_throughout;
            row.termination = r.report.termination;
        } catch (const std::exception& ex) {
            row.controlled_throughout = false;
            row.termination = "failed";
            row.error = ex.what();
        }
    };
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), rows.size());
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < rows.size(); i = next++) {
                    run_one(i);
                }
            });
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "pack_id,t_end,a_end,bkm_end,controlled_throughout,termination,error\n";
    for (const auto& r : rows) {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        os << r.pack_id << ',' << fmt_double(r.t_end) << ',' << fmt_double(r.a_end) << ','
           << fmt_double(r.bkm_end) << ',' << (r.controlled_throughout ? 1 : 0) << ','
           << r.termination << ',' << err << '\n';
    }
}

namespace {

int certify_params(const PackOptions& opts, const Sink& sink) {
    Json doc;
    try {
        const BarrierParams P = opts.resolve();
        const ControlReport rep = verify_cond_params(P);
        doc["params"] = to_json(P);
        doc["t_star"] = upper_bound_time(P);
        doc["lines"] = lines_json(rep);
        doc["pass"] = rep.pass;
        sink.primary("certification.json", dump(doc));
        return rep.pass ? kExitOk : kExitCertification;
    } catch (const InfeasibleError& e) {
        doc["error"] = e.what();
        doc["inequality"] = e.inequality();
        doc["lhs"] = e.lhs();
        doc["rhs"] = e.rhs();
        doc["pass"] = false;
        sink.primary("certification.json", dump(doc));
        return kExitCertification;
    }
}

int build_sequences_mode(const SequenceOptions& opts, bool csv, bool strict, const Sink& sink) {
    const BarrierSequences seq = opts.resolve();
    Json doc;
    doc["sequences"] = to_json(seq);
    const SequenceReport rep = verify_sequence_conditions(seq);
    doc["report"] = to_json(rep);
    try {
        doc["F_supremum"] = compute_F(seq);
    } catch (const SupNotStabilized& e) {
        doc["F_supremum"] = nullptr;
        doc["F_error"] = e.what();
    }
    const std::string table = to_text([&](std::ostream& os) { write_sequences_csv(os, seq); });
    if (sink.has_dir()) {
        sink.file("sequences.csv", table);
        sink.file("sequences_report.json", dump(doc));
    } else {
        sink.primary("", csv ? table : dump(doc));
    }
    return strict && !rep.pass ? kExitCertification : kExitOk;
}

int exact_check(double k, double h, const std::vector<double>& betas,
                const std::vector<double>& xs, bool printed, double max_residual,
                const Sink& sink) {
    std::ostringstream os;
    os << "beta,x,h,velocity,residual_omega,residual_rho\n";
    bool ok = true;
    for (double beta : betas) {
        const SingularProfile prof(k, beta);
        const SpaceTimeFn w = [prof](double x, double) { return exact_omega(prof, x); };
        const SpaceTimeFn r = [prof](double, double) { return exact_rho(prof); };
        const SpaceTimeFn u = [prof](double x, double) { return exact_u(prof, x); };
        const SpaceTimeFn u_printed = [k](double x, double) { return -k * std::sqrt(x); };
        for (double x : xs) {
            const Residual res = pde_residual(w, r, u, beta, x, 0.0, h);
            ok = ok && std::abs(res.omega) <= max_residual && std::abs(res.rho) <= max_residual;
            os << fmt_double(beta) << ',' << fmt_double(x) << ',' << fmt_double(h) << ",exact,"
               << fmt_double(res.omega) << ',' << fmt_double(res.rho) << '\n';
            if (printed) {
                const Residual bad = pde_residual(w, r, u_printed, beta, x, 0.0, h);
                os << fmt_double(beta) << ',' << fmt_double(x) << ',' << fmt_double(h)
                   << ",printed," << fmt_double(bad.omega) << ',' << fmt_double(bad.rho) << '\n';
            }
        }
    }
    sink.primary("exact_check.csv", os.str());
    return ok ? kExitOk : kExitCertification;
}

int simulate_beta(const PackOptions& opts, const std::string& config_path, Eigen::Index n,
                  bool force, double slack, const Sink& sink) {
    const BarrierParams P = opts.resolve();
    const SimConfig cfg = config_from_json(parse_flat_config(config_path), beta_defaults(P));
    const ControlReport lines = verify_cond_params(P);
    const ParticleCloud cloud = sample_prepared_data(P, n);
    const ControlReport prepared = verify_suitably_prepared(cloud, P);
    Json cert;
    cert["params"] = to_json(P);
    cert["lines"] = lines_json(lines);
    cert["prepared"] = to_json(prepared);
    cert["pass"] = lines.pass && prepared.pass;
    cert["forced"] = force;
    sink.file("certification.json", dump(cert));
    if (!(lines.pass && prepared.pass) && !force) {
        return kExitCertification;
    }
    ControlledRun result = run_controlled_single(P, cloud, cfg, slack);
    result.report.forced = force;
    write_run(sink, result);
    sink.file("config.json", dump(to_json(cfg)));
    return lines.pass && prepared.pass && result.controlled_throughout ? kExitOk
                                                                        : kExitCertification;
}

int simulate_multiscale(const SequenceOptions& opts, double A0, double delta,
                        const std::string& config_path, Eigen::Index n, bool force, double slack,
                        const Sink& sink) {
    const BarrierSequences seq = opts.resolve();
    const SimConfig cfg = config_from_json(parse_flat_config(config_path), multiscale_defaults(A0));
    const SequenceReport seq_report = verify_sequence_conditions(seq);
    Json cert;
    cert["sequences"] = to_json(seq);
    cert["sequence_report"] = to_json(seq_report);
    cert["forced"] = force;
    if (!seq_report.pass && !force) {
        cert["pass"] = false;
        sink.file("certification.json", dump(cert));
        return kExitCertification;
    }
    ParticleCloud cloud = [&] {
        try {
            return make_prepared_data_multiscale(seq, A0, delta, n);
        } catch (const std::exception& e) {
            cert["pass"] = false;
            cert["error"] = e.what();
            sink.file("certification.json", dump(cert));
            throw;
        }
    }();
    const ControlReport prepared = verify_multiscale_prepared(cloud, seq, A0, delta);
    cert["prepared"] = to_json(prepared);
    cert["pass"] = seq_report.pass && prepared.pass;
    sink.file("certification.json", dump(cert));
    ControlledRun result = run_controlled_multiscale(seq, cloud, cfg, slack);
    result.report.forced = force;
    write_run(sink, result);
    sink.file("config.json", dump(to_json(cfg)));
    return seq_report.pass && result.controlled_throughout ? kExitOk : kExitCertification;
}

int simulate_generic(const std::string& config_path, const std::string& data, const Sink& sink) {
    const SimConfig cfg = config_from_json(read_json_file(config_path));
    const ParticleCloud cloud = load_data(data);
    std::optional<SimState> last;
    ControlledRun result;
    result.trace = run(cloud, cfg, {[&](const SimState& s) { last = s; }});
    fill_common(result.report, result.trace, *last);
    result.report.t_star = std::numeric_limits<double>::quiet_NaN();
    write_run(sink, result);
    return kExitOk;
}

std::vector<double> column(const std::vector<TraceRow>& rows, double TraceRow::*field) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) {
        v.push_back(r.*field);
    }
    return v;
}

int plot_mode(const std::string& trace_path, const std::string& profile_path,
              const PackOptions& pack, bool with_barriers, const Sink& sink) {
    std::ifstream in(trace_path);
    if (!in) {
        throw ConfigError("trace", "cannot open " + trace_path);
    }
    const auto rows = read_trace_csv(in);
    const auto t = column(rows, &TraceRow::t);
    sink.file("A.svg", render_line_chart({"marked trajectory", "t", "A(t)", false, true},
                                         {{"A", t, column(rows, &TraceRow::A)}}));
    sink.file("bkm.svg", render_line_chart({"time integral of sup omega", "t", "bkm", false, false},
                                           {{"bkm", t, column(rows, &TraceRow::bkm)}}));
    if (!profile_path.empty()) {
        const ParticleCloud cloud = load_data(profile_path);
        std::vector<double> x(cloud.positions().data(),
                              cloud.positions().data() + cloud.size());
        std::vector<double> w(cloud.omega().data(), cloud.omega().data() + cloud.size());
        std::vector<Series> series{{"omega", x, w}};
        if (with_barriers) {
            const BarrierParams P = pack.resolve();
            std::vector<double> bx, lower, upper;
            for (double xi : x) {
                if (xi >= P.A0 * 0.999 && xi <= 1.0) {
                    bx.push_back(xi);
                    lower.push_back(P.phi * std::pow(xi, -P.p));
                    upper.push_back(P.psi * std::pow(xi, -P.q));
                }
            }
            series.push_back({"phi x^-p", bx, lower, true});
            series.push_back({"psi x^-q", bx, upper, true});
        }
        sink.file("profile.svg",
                  render_line_chart({"profile", "x", "omega", true, true}, series));
    }
    return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lagrangian particle lab for a nonlocal transport model with power-law forcing"};
    app.require_subcommand(1);
    std::string out_dir;
    int jobs = 1;
    double tolerance = kRuntimeSlack;
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--jobs", jobs, "concurrent sweep entries")->check(CLI::PositiveNumber);
    app.add_option("--tolerance", tolerance, "relative slack of runtime barrier checks")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();

    auto* certify = app.add_subcommand("certify-params", "select or load a pack and check it");
    PackOptions certify_pack;
    certify_pack.add_to(certify);

    auto* sequences = app.add_subcommand("build-sequences", "multiscale sequences and report");
    SequenceOptions seq_opts;
    seq_opts.add_to(sequences);
    bool seq_csv = false;
    bool seq_strict = false;
    sequences->add_flag("--csv", seq_csv, "print the per-level table instead of JSON");
    sequences->add_flag("--strict", seq_strict, "exit 1 when the sequence conditions fail");

    auto* exact = app.add_subcommand("exact-check", "residual of the stationary singular profile");
    double k = 1.0;
    double h = 1e-4;
    double max_residual = 1e-6;
    std::vector<double> betas{0.5, 1.0, 2.0};
    std::vector<double> xs{0.1, 1.0, 2.0};
    bool printed = false;
    exact->add_option("--k", k)->capture_default_str();
    exact->add_option("--step", h, "finite-difference step h")->capture_default_str();
    exact->add_option("--betas", betas)->capture_default_str();
    exact->add_option("--xs", xs)->capture_default_str();
    exact->add_option("--max-residual", max_residual)->capture_default_str();
    exact->add_flag("--printed", printed, "also evaluate the velocity -k x^{1/2}");

    auto* sim_beta = app.add_subcommand("simulate-beta", "certify, generate and run a pack");
    PackOptions sim_pack;
    sim_pack.add_to(sim_beta);
    std::string beta_config;
    Eigen::Index beta_n = 4096;
    bool beta_force = false;
    sim_beta->add_option("--config", beta_config)->check(CLI::ExistingFile);
    sim_beta->add_option("--particles", beta_n)->capture_default_str();
    sim_beta->add_flag("--force", beta_force, "run even when certification fails");

    auto* sim_ms = app.add_subcommand("simulate-multiscale", "multiscale data and run");
    SequenceOptions ms_opts;
    ms_opts.add_to(sim_ms);
    double ms_A0 = 1e-4;
    double ms_delta = 0.05;
    std::string ms_config;
    Eigen::Index ms_n = 8192;
    bool ms_force = false;
    sim_ms->add_option("--A0", ms_A0)->capture_default_str();
    sim_ms->add_option("--delta", ms_delta)->capture_default_str();
    sim_ms->add_option("--config", ms_config)->check(CLI::ExistingFile);
    sim_ms->add_option("--particles", ms_n)->capture_default_str();
    sim_ms->add_flag("--force", ms_force, "run even when certification fails");

    auto* sim = app.add_subcommand("simulate", "run arbitrary data with a flat JSON config");
    std::string sim_config;
    std::string sim_data;
    sim->add_option("--config", sim_config)->required()->check(CLI::ExistingFile);
    sim->add_option("--data", sim_data, "profile CSV or gen:<kind>,key=value,...")->required();

    auto* sweep = app.add_subcommand("sweep", "run every pack of a manifest");
    std::string manifest_path;
    sweep->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);

    auto* plot = app.add_subcommand("plot", "render a trace (and a profile) to SVG");
    std::string plot_trace;
    std::string plot_profile;
    PackOptions plot_pack;
    bool plot_barriers = false;
    plot->add_option("--trace", plot_trace)->required()->check(CLI::ExistingFile);
    plot->add_option("--profile", plot_profile)->check(CLI::ExistingFile);
    plot_pack.add_to(plot);
    plot->add_flag("--barriers", plot_barriers, "overlay the pack's barrier lines");

    for (auto* sub : app.get_subcommands({})) {
        sub->fallthrough();
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const bool needs_dir = sim_beta->parsed() || sim_ms->parsed() || sim->parsed() ||
                               plot->parsed();
        if (needs_dir && out_dir.empty()) {
            throw UsageError("this mode writes several files; --out <dir> is required");
        }
        const Sink sink(out_dir, out);
        int code = kExitOk;
        if (certify->parsed()) {
            code = certify_params(certify_pack, sink);
        } else if (sequences->parsed()) {
            code = build_sequences_mode(seq_opts, seq_csv, seq_strict, sink);
        } else if (exact->parsed()) {
            code = exact_check(k, h, betas, xs, printed, max_residual, sink);
        } else if (sim_beta->parsed()) {
            code = simulate_beta(sim_pack, beta_config, beta_n, beta_force, tolerance, sink);
        } else if (sim_ms->parsed()) {
            code = simulate_multiscale(ms_opts, ms_A0, ms_delta, ms_config, ms_n, ms_force,
                                       tolerance, sink);
        } else if (sim->parsed()) {
            code = simulate_generic(sim_config, sim_data, sink);
        } else if (sweep->parsed()) {
            const auto rows = run_sweep(read_json_file(manifest_path), jobs, tolerance);
            sink.primary("sweep.csv", to_text([&](std::ostream& os) { write_sweep_csv(os, rows); }));
        } else if (plot->parsed()) {
            code = plot_mode(plot_trace, plot_profile, plot_pack, plot_barriers, sink);
        }
        sink.metadata(args);
        return code;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return kExitCertification;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitCertification;
    }
}

}  // namespace nlt

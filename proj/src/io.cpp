#include "nlt/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace nlt {

ConfigError::ConfigError(std::string key, const std::string& what)
    : std::runtime_error(key.empty() ? what : "'" + key + "': " + what), key_(std::move(key)) {}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) {
        if (!cell.empty() && cell.back() == '\r') {
            cell.pop_back();
        }
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

double parse_double(const std::string& s, const std::string& column) {
    if (s.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError(column, "not a number: '" + s + "'");
    }
}

// Header name -> column index; throws when a required column is missing.
std::map<std::string, std::size_t> read_header(std::istream& is,
                                               std::initializer_list<const char*> required) {
    std::string line;
    if (!std::getline(is, line)) {
        throw ConfigError("", "empty CSV");
    }
    std::map<std::string, std::size_t> cols;
    const auto names = split(line, ',');
    for (std::size_t i = 0; i < names.size(); ++i) {
        cols[names[i]] = i;
    }
    for (const char* r : required) {
        if (!cols.contains(r)) {
            throw ConfigError(r, "missing CSV column");
        }
    }
    return cols;
}

std::vector<std::vector<std::string>> read_rows(std::istream& is, std::size_t width) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        auto cells = split(line, ',');
        if (cells.size() < width) {
            throw ConfigError("", "short CSV row at line " + std::to_string(rows.size() + 2));
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

Json vector_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(v[i]);
    }
    return a;
}

// JSON has no inf/nan; those go out as strings and come back through this.
Json num(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    if (std::isnan(v)) {
        return "nan";
    }
    return v > 0 ? "inf" : "-inf";
}

double get_num(const Json& j, const char* key) {
    if (!j.contains(key)) {
        throw ConfigError(key, "missing");
    }
    const Json& v = j.at(key);
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw ConfigError(key, "expected a number");
}

}  // namespace

void write_profile_csv(std::ostream& os, const ParticleCloud& cloud,
                       const VelocityField* field) {
    os << "x,omega,rho,label";
    if (field != nullptr) {
        os << ",Q,u";
    }
    os << '\n';
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        const double x = cloud.positions()[i];
        os << fmt_double(x) << ',' << fmt_double(cloud.omega()[i]) << ','
           << fmt_double(cloud.rho()[i]) << ',' << fmt_double(cloud.label()[i]);
        if (field != nullptr) {
            const double q = field->q_at_nodes[i];
            os << ',' << fmt_double(q) << ',' << fmt_double(-x * q);
        }
        os << '\n';
    }
}

ParticleCloud read_profile_csv(std::istream& is) {
    const auto cols = read_header(is, {"x", "omega", "rho", "label"});
    const auto rows = read_rows(is, cols.size());
    const auto n = static_cast<Eigen::Index>(rows.size());
    Vector x(n), w(n), r(n), l(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        x[i] = parse_double(row[cols.at("x")], "x");
        w[i] = parse_double(row[cols.at("omega")], "omega");
        r[i] = parse_double(row[cols.at("rho")], "rho");
        l[i] = parse_double(row[cols.at("label")], "label");
    }
    return ParticleCloud(std::move(x), std::move(w), std::move(r), std::move(l));
}

void write_trace_csv(std::ostream& os, const SimTrace& trace) {
    os << "t,dt,A,omega_max,bkm,reason_flag\n";
    for (const auto& r : trace.rows) {
        os << fmt_double(r.t) << ',' << fmt_double(r.dt) << ',' << fmt_double(r.A) << ','
           << fmt_double(r.omega_max) << ',' << fmt_double(r.bkm) << ',' << r.reason_flag
           << '\n';
    }
}

std::vector<TraceRow> read_trace_csv(std::istream& is) {
    const auto cols = read_header(is, {"t", "dt", "A", "omega_max", "bkm", "reason_flag"});
    std::vector<TraceRow> out;
    for (const auto& row : read_rows(is, cols.size())) {
        TraceRow r;
        r.t = parse_double(row[cols.at("t")], "t");
        r.dt = parse_double(row[cols.at("dt")], "dt");
        r.A = parse_double(row[cols.at("A")], "A");
        r.omega_max = parse_double(row[cols.at("omega_max")], "omega_max");
        r.bkm = parse_double(row[cols.at("bkm")], "bkm");
        r.reason_flag = static_cast<int>(parse_double(row[cols.at("reason_flag")], "reason_flag"));
        out.push_back(r);
    }
    return out;
}

Json to_json(const ControlRecord& rec) {
    Json j;
    j["id"] = rec.id;
    j["level"] = rec.level;
    j["lo"] = num(rec.lo);
    j["hi"] = num(rec.hi);
    j["witness_x"] = num(rec.witness_x);
    j["lhs"] = num(rec.lhs);
    j["rhs"] = num(rec.rhs);
    j["margin"] = num(rec.margin);
    j["pass"] = rec.pass;
    j["vacuous"] = rec.vacuous;
    return j;
}

Json to_json(const ControlReport& report) {
    Json j;
    j["t"] = num(report.t);
    j["pass"] = report.pass;
    j["worst_margin"] = num(report.worst_margin());
    Json recs = Json::array();
    for (const auto& r : report.records) {
        recs.push_back(to_json(r));
    }
    j["records"] = std::move(recs);
    return j;
}

Json to_json(const BarrierParams& P) {
    Json j;
    j["beta"] = P.beta;
    j["p"] = P.p;
    j["q"] = P.q;
    j["phi"] = P.phi;
    j["psi"] = P.psi;
    j["delta"] = P.delta;
    j["m"] = P.m;
    j["A0"] = P.A0;
    j["eps"] = P.eps;
    j["b0"] = P.b0;
    j["b1"] = P.b1;
    return j;
}

BarrierParams params_from_json(const Json& j) {
    if (!j.is_object()) {
        throw ConfigError("", "parameter pack must be a JSON object");
    }
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        static const std::vector<std::string> known{"beta", "p",  "q",   "phi", "psi", "delta",
                                                    "m",    "A0", "eps", "b0",  "b1",  "id"};
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(key, "unknown parameter");
        }
    }
    try {
        return BarrierParams::make(get_num(j, "beta"), get_num(j, "p"), get_num(j, "q"),
                                   get_num(j, "phi"), get_num(j, "psi"), get_num(j, "delta"),
                                   get_num(j, "m"), get_num(j, "A0"), get_num(j, "eps"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("", e.what());
    }
}

Json to_json(const BarrierSequences& s) {
    Json j;
    j["phi1"] = s.phi1;
    j["eps1"] = s.eps1;
    j["lam_m2"] = s.lam_m2;
    j["lam_m1"] = s.lam_m1;
    j["lam0"] = s.lam0;
    j["L"] = s.L;
    j["C"] = s.C;
    j["N"] = s.N;
    j["F"] = num(s.F);
    j["log_lam"] = vector_json(s.log_lam_n);
    j["eps"] = vector_json(s.eps_n);
    j["p"] = vector_json(s.p_n);
    j["q"] = vector_json(s.q_n);
    j["phi"] = vector_json(s.phi_n);
    j["psi"] = vector_json(s.psi_n);
    j["mu"] = vector_json(s.mu_n);
    return j;
}

BarrierSequences sequences_from_json(const Json& j) {
    if (!j.is_object()) {
        throw ConfigError("", "sequence pack must be a JSON object");
    }
    if (!j.contains("N") || !j.at("N").is_number_integer()) {
        throw ConfigError("N", "expected an integer");
    }
    try {
        return build_sequences(get_num(j, "phi1"), get_num(j, "eps1"), get_num(j, "lam_m2"),
                               get_num(j, "lam_m1"), get_num(j, "lam0"), get_num(j, "L"),
                               get_num(j, "C"), j.at("N").get<int>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError("", e.what());
    }
}

Json to_json(const SequenceReport& report) {
    Json j;
    j["pass"] = report.pass;
    j["phi_inf"] = num(report.phi_inf);
    j["c_max"] = num(report.c_max);
    Json recs = Json::array();
    for (const auto& r : report.records) {
        recs.push_back(to_json(r));
    }
    j["records"] = std::move(recs);
    return j;
}

Json to_json(const ExponentFit& fit) {
    return Json{{"slope", num(fit.slope)},
                {"intercept", num(fit.intercept)},
                {"window", Json::array({num(fit.lo), num(fit.hi)})},
                {"nodes", fit.nodes}};
}

Json to_json(const Envelope& env) {
    return Json{{"phi_eff", num(env.phi_eff)},
                {"psi_eff", num(env.psi_eff)},
                {"window", Json::array({num(env.lo), num(env.hi)})},
                {"pass", env.pass}};
}

SimConfig config_from_json(const Json& j, SimConfig c) {
    if (!j.is_object()) {
        throw ConfigError("", "config must be a flat JSON object");
    }
    const std::map<std::string, double*> reals{
        {"beta", &c.beta},   {"dt_init", &c.dt_init},     {"cfl", &c.cfl},
        {"t_max", &c.t_max}, {"A_stop", &c.A_stop},       {"omega_cap", &c.omega_cap},
        {"mark", &c.mark},   {"bkm_delta", &c.bkm_delta},
    };
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        const Json& value = item.value();
        if (key == "upwind_from_mark") {
            if (!value.is_boolean()) {
                throw ConfigError(key, "expected a boolean");
            }
            c.upwind_from_mark = value.get<bool>();
            continue;
        }
        if (key == "snapshot_every") {
            if (!value.is_number_integer()) {
                throw ConfigError(key, "expected an integer");
            }
            c.snapshot_every = value.get<int>();
            continue;
        }
        const auto it = reals.find(key);
        if (it == reals.end()) {
            throw ConfigError(key, "unknown config key");
        }
        if (!value.is_number()) {
            throw ConfigError(key, "expected a number");
        }
        *it->second = value.get<double>();
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        // validate() names the field as "config: <key> must ...".
        const auto start = msg.find(": ");
        const auto stop = msg.find(' ', start + 2);
        const std::string key =
            start == std::string::npos ? "" : msg.substr(start + 2, stop - start - 2);
        throw ConfigError(key, msg);
    }
    return c;
}

Json to_json(const SimConfig& c) {
    Json j;
    j["beta"] = c.beta;
    j["dt_init"] = c.dt_init;
    j["cfl"] = c.cfl;
    j["t_max"] = c.t_max;
    j["A_stop"] = c.A_stop;
    j["omega_cap"] = c.omega_cap;
    j["snapshot_every"] = c.snapshot_every;
    j["mark"] = c.mark;
    j["bkm_delta"] = c.bkm_delta;
    j["upwind_from_mark"] = c.upwind_from_mark;
    return j;
}

void write_sequences_csv(std::ostream& os, const BarrierSequences& s) {
    const Vector brackets = f_brackets(s);
    os << "n,lam,eps,p,q,phi,psi,mu,F_bracket\n";
    for (int n = 1; n <= s.N; ++n) {
        os << n << ',' << fmt_double(s.lam(n)) << ',' << fmt_double(s.eps(n)) << ','
           << fmt_double(s.p(n)) << ',' << fmt_double(s.q(n)) << ',' << fmt_double(s.phi(n))
           << ',' << fmt_double(s.psi(n)) << ',' << fmt_double(s.mu(n)) << ',';
        if (n >= 2) {
            os << fmt_double(brackets[n - 2]);
        }
        os << '\n';
    }
}

Json to_json(const RunReport& r) {
    Json j;
    j["termination"] = r.termination;
    j["t_end"] = num(r.t_end);
    j["a_end"] = num(r.a_end);
    j["t_star"] = num(r.t_star);
    j["bkm_end"] = num(r.bkm_end);
    j["bkm_localized"] = num(r.bkm_localized);
    j["exponent_fit"] = r.exponent_fit ? to_json(*r.exponent_fit) : Json(nullptr);
    j["envelope"] = r.envelope ? to_json(*r.envelope) : Json(nullptr);
    Json hist = Json::array();
    for (const auto& s : r.control_history) {
        hist.push_back(Json::array({num(s.t), s.pass, num(s.worst_margin)}));
    }
    j["control_history"] = std::move(hist);
    j["forced"] = r.forced;
    return j;
}

RunReport run_report_from_json(const Json& j) {
    RunReport r;
    if (!j.contains("termination") || !j.at("termination").is_string()) {
        throw ConfigError("termination", "expected a string");
    }
    r.termination = j.at("termination").get<std::string>();
    r.t_end = get_num(j, "t_end");
    r.a_end = get_num(j, "a_end");
    r.t_star = get_num(j, "t_star");
    r.bkm_end = get_num(j, "bkm_end");
    r.bkm_localized = get_num(j, "bkm_localized");
    if (j.contains("exponent_fit") && j.at("exponent_fit").is_object()) {
        const Json& f = j.at("exponent_fit");
        ExponentFit fit;
        fit.slope = get_num(f, "slope");
        fit.intercept = get_num(f, "intercept");
        fit.lo = f.at("window").at(0).get<double>();
        fit.hi = f.at("window").at(1).get<double>();
        fit.nodes = f.at("nodes").get<Eigen::Index>();
        r.exponent_fit = fit;
    }
    if (j.contains("envelope") && j.at("envelope").is_object()) {
        const Json& e = j.at("envelope");
        Envelope env;
        env.phi_eff = get_num(e, "phi_eff");
        env.psi_eff = get_num(e, "psi_eff");
        env.lo = e.at("window").at(0).get<double>();
        env.hi = e.at("window").at(1).get<double>();
        env.pass = e.at("pass").get<bool>();
        r.envelope = env;
    }
    for (const auto& h : j.at("control_history")) {
        ControlSample s;
        s.t = h.at(0).get<double>();
        s.pass = h.at(1).get<bool>();
        s.worst_margin = h.at(2).is_number() ? h.at(2).get<double>()
                                             : std::numeric_limits<double>::infinity();
        r.control_history.push_back(s);
    }
    r.forced = j.value("forced", false);
    return r;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot open " + path);
    }
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("", path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

}  // namespace nlt

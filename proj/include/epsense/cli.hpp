// Copyright 2026 The epsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Command-line front end. Needs CLI11 and nlohmann/json on the include path.

#include <CLI11.hpp>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "epsense/epsense.hpp"

namespace epsense::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kFailure = 3, kInstability = 4 };

using json = nlohmann::json;

class ConfigError : public Error {
   public:
    explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void write_rows(std::ostream& os, const std::vector<SweepRow>& rows, char sep) {
    os << "theta" << sep << "I1" << sep << "delta_theta_cr" << sep << "delta_theta_het" << sep << "status\n";
    for (const auto& r : rows) {
        std::string status = r.status;
        for (char& ch : status)
            if (ch == sep || ch == '\n' || ch == '"') ch = ' ';
        os << format_double(r.theta) << sep << format_double(r.I1) << sep << format_double(r.delta_theta_cr) << sep
           << format_double(r.delta_theta_het) << sep << status << '\n';
    }
}

inline json fit_summary(const SweepResult& res) {
    json j;
    j["scenario"] = res.scenario.name;
    j["column"] = column_name(res.column);
    j["exponent"] = res.fit.exponent;
    j["stderr"] = res.fit.stderr_exponent;
    j["intercept"] = res.fit.intercept;
    j["n_points"] = res.fit.n_points;
    j["fit_range"] = {res.fit_range.min, res.fit_range.max};
    j["rows"] = res.rows.size();
    j["failed_points"] = res.failed;
    j["detuning"] = res.scenario.model.params.detuning;
    if (res.cutoff_theta) j["cutoff_theta"] = *res.cutoff_theta;
    if (res.upper_bound) j["upper_bound_I"] = *res.upper_bound;
    return j;
}

inline json load_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline Matrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a non-empty list of rows");
    const auto rows = j.size();
    const auto cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) throw ConfigError(what + " rows must be non-empty lists");
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw ConfigError(what + " is ragged");
        for (std::size_t k = 0; k < cols; ++k) {
            if (!j[i][k].is_number()) throw ConfigError(what + " has a non-numeric entry");
            m(i, k) = j[i][k].get<double>();
        }
    }
    return m;
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(row);
    }
    return rows;
}

inline std::string scenario_names() {
    std::string out;
    for (const auto& s : builtin_scenarios()) out += (out.empty() ? "" : ", ") + s.name;
    return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ']';
    return os.str();
}

struct SweepFlags {
    std::string scenario;
    std::string config;
    double theta_min = 0.0, theta_max = 0.0, delta = 0.0;
    int points_per_decade = 0;
    std::uint64_t seed = 0;
    std::string output;
    std::string format = "csv";
    std::string column = "cr";
    CLI::Option* o_theta_min = nullptr;
    CLI::Option* o_theta_max = nullptr;
    CLI::Option* o_ppd = nullptr;
    CLI::Option* o_delta = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_format = nullptr;
    CLI::Option* o_output = nullptr;
};

/// Document values first, flags on top.
inline Scenario scenario_from(const SweepFlags& f, std::string& output, std::string& format) {
    json doc = f.config.empty() ? json::object() : load_document(f.config);
    std::string name = f.scenario.empty() ? doc.value("scenario", std::string()) : f.scenario;

    Scenario s;
    if (!name.empty()) {
        const auto found = find_scenario(name);
        if (!found) throw ConfigError("unknown scenario '" + name + "'; valid names: " + scenario_names());
        s = *found;
    } else if (doc.contains("model") && doc["model"].contains("M")) {
        s.name = doc.value("name", std::string("custom"));
        s.model.kind = ModelKind::custom;
        s.probe.kind = ProbeKind::jordan_probe;
    } else {
        throw ConfigError("no scenario given; valid names: " + scenario_names());
    }

    try {
        if (doc.contains("model")) {
            const json& m = doc["model"];
            if (m.contains("M")) {
                s.model.kind = ModelKind::custom;
                s.model.custom_m = matrix_from_json(m["M"], "model.M");
            }
            if (m.contains("Pi")) s.model.pi = matrix_from_json(m["Pi"], "model.Pi");
            if (m.contains("params")) {
                const json& p = m["params"];
                s.model.params.gamma1 = p.value("gamma1", s.model.params.gamma1);
                s.model.params.gamma2 = p.value("gamma2", s.model.params.gamma2);
                s.model.params.coupling = p.value("coupling", s.model.params.coupling);
                s.model.params.kappa = p.value("kappa", s.model.params.kappa);
            }
        }
        if (doc.contains("grid")) {
            const json& g = doc["grid"];
            s.grid.min = g.value("theta_min", s.grid.min);
            s.grid.max = g.value("theta_max", s.grid.max);
            s.grid.points_per_decade = g.value("points_per_decade", s.grid.points_per_decade);
        }
        if (doc.contains("delta")) s.model.params.detuning = doc["delta"].get<double>();
        if (doc.contains("probe")) {
            const json& p = doc["probe"];
            const std::string kind = p.value("kind", std::string("jordan"));
            if (kind == "jordan") {
                s.probe.kind = ProbeKind::jordan_probe;
            } else if (kind == "random") {
                s.probe.kind = ProbeKind::seeded_random;
                s.probe.seed = p.value("seed", std::uint64_t{0});
            } else if (kind == "vector") {
                s.probe.kind = ProbeKind::fixed_vector;
                const auto v = p.at("vector").get<std::vector<double>>();
                s.probe.vector = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
            } else {
                throw ConfigError("probe.kind must be jordan, random or vector");
            }
        }
        if (doc.contains("seed")) s.probe.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("fit_range")) {
            const auto r = doc["fit_range"].get<std::vector<double>>();
            if (r.size() != 2) throw ConfigError("fit_range must be [min, max]");
            s.fit_range = FitRange{r[0], r[1]};
        }
        output = doc.value("output", output);
        format = doc.value("format", format);
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    }

    if (f.o_theta_min && f.o_theta_min->count()) s.grid.min = f.theta_min;
    if (f.o_theta_max && f.o_theta_max->count()) s.grid.max = f.theta_max;
    if (f.o_ppd && f.o_ppd->count()) s.grid.points_per_decade = f.points_per_decade;
    if (f.o_delta && f.o_delta->count()) s.model.params.detuning = f.delta;
    if (f.o_seed && f.o_seed->count()) s.probe.seed = f.seed;
    if (f.o_output && f.o_output->count()) output = f.output;
    if (f.o_format && f.o_format->count()) format = f.format;
    if (format != "csv" && format != "tsv") throw ConfigError("format must be csv or tsv");
    return s;
}

inline int cmd_sweep(const SweepFlags& f, std::ostream& out, std::ostream& err) {
    std::string output, format = "csv";
    Scenario s;
    SweepColumn column = SweepColumn::delta_theta_cr;
    try {
        s = scenario_from(f, output, format);
        if (f.column == "I1") column = SweepColumn::I1;
        else if (f.column == "het") column = SweepColumn::delta_theta_het;
        else if (f.column != "cr") throw ConfigError("column must be cr, het or I1");
        (void)s.grid.points();
    } catch (const Error& e) {
        err << e.what() << '\n';
        return kConfigError;
    }

    SweepResult res;
    try {
        res = run_sweep(s, SweepOptions{0, column});
    } catch (const SweepFailure& e) {
        err << e.what() << '\n';
        return kFailure;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return kConfigError;
    }

    const char sep = format == "tsv" ? '\t' : ',';
    const json summary = fit_summary(res);
    if (output.empty()) {
        write_rows(out, res.rows, sep);
        err << summary.dump(2) << '\n';
    } else {
        std::ofstream csv(output);
        if (!csv) {
            err << "cannot write " << output << '\n';
            return kConfigError;
        }
        write_rows(csv, res.rows, sep);
        std::ofstream side(output + ".fit.json");
        side << summary.dump(2) << '\n';
        out << "wrote " << res.rows.size() << " rows to " << output << "; exponent " << format_double(res.fit.exponent)
            << " +- " << format_double(res.fit.stderr_exponent) << '\n';
    }
    return kOk;
}

inline int cmd_jordan(const std::string& input, double tol, std::ostream& out, std::ostream& err) {
    Matrix m, pi;
    try {
        const json doc = load_document(input);
        if (!doc.contains("M")) throw ConfigError("document needs a matrix under key M");
        m = matrix_from_json(doc["M"], "M");
        if (m.rows() != m.cols()) throw ConfigError("M is not square");
        pi = doc.contains("Pi") ? matrix_from_json(doc["Pi"], "Pi") : Matrix::Identity(m.rows(), m.cols());
        if (pi.rows() != m.rows() || pi.cols() != m.cols()) throw ConfigError("Pi must match M");
    } catch (const Error& e) {
        err << e.what() << '\n';
        return kConfigError;
    }
    try {
        const auto prof = jordan_profile(m, pi, tol);
        out << "blocks: " << join(prof.block_sizes) << "; EP order: " << prof.ep_order() << '\n';
        out << "N_max: " << prof.n_max << '\n';
        out << "rank sequence: " << join(prof.rank_sequence) << '\n';
        if (prof.ambiguous_rank) out << "warning: " << prof.warning << '\n';
        const auto dec = jordan_decompose(detail::apply_pi_inverse(m, pi), tol);
        out << "residual: " << format_double(dec.residual) << '\n';
        if (dec.ill_conditioned) out << "warning: transformation P has condition " << dec.p_condition << '\n';
    } catch (const PreconditionError& e) {
        err << e.what() << '\n';
        return kConfigError;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return kFailure;
    }
    return kOk;
}

inline int cmd_synth(int order, std::uint64_t seed, const std::string& output, std::ostream& out, std::ostream& err) {
    try {
        const auto s = synth_jordan_model(order, std::nullopt, seed);
        json doc;
        doc["M"] = matrix_to_json(s.M);
        doc["P"] = matrix_to_json(s.P);
        doc["order"] = order;
        doc["seed"] = seed;
        if (output.empty()) {
            out << doc.dump(2) << '\n';
        } else {
            std::ofstream f(output);
            if (!f) throw ConfigError("cannot write " + output);
            f << doc.dump(2) << '\n';
        }
    } catch (const Error& e) {
        err << e.what() << '\n';
        return kConfigError;
    }
    return kOk;
}

struct OracleFlags {
    std::string config;
    double delta = 0.2, theta = 0.1, duration = 1e4, dt = 0.01, bandwidth = 0.02, burn_in = 0.05;
    double gamma = 1.0, coupling = 1.0;
    std::uint64_t seed = 1;
    int trajectories = 1;
    std::vector<std::pair<std::string, CLI::Option*>> given;
};

inline int cmd_oracle(const OracleFlags& f0, std::ostream& out, std::ostream& err) {
    OracleFlags f = f0;
    try {
        if (!f.config.empty()) {
            const json doc = load_document(f.config);
            auto take = [&](const char* key, auto& field) {
                const auto it = std::find_if(f.given.begin(), f.given.end(),
                                             [&](const auto& p) { return p.first == key; });
                const bool flagged = it != f.given.end() && it->second->count() > 0;
                if (!flagged && doc.contains(key)) field = doc[key].get<std::decay_t<decltype(field)>>();
            };
            take("delta", f.delta);
            take("theta", f.theta);
            take("duration", f.duration);
            take("dt", f.dt);
            take("bandwidth", f.bandwidth);
            take("burn_in", f.burn_in);
            take("gamma", f.gamma);
            take("coupling", f.coupling);
            take("seed", f.seed);
            take("trajectories", f.trajectories);
        }
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return kConfigError;
    }

    try {
        SdeConfig c(build_model(SensorParams{f.gamma, f.gamma, f.coupling, f.delta, 1.0}));
        c.theta = f.theta;
        c.duration = f.duration;
        c.dt = f.dt;
        c.carrier_bandwidth = f.bandwidth;
        c.burn_in = f.burn_in;
        c.seed = f.seed;
        const auto rep = run_oracle(c, f.trajectories);
        out << "segments: " << rep.estimate.n_segments << '\n';
        out << "entry analytic estimated stderr pass\n";
        for (const auto& e : rep.entries)
            out << "V[" << e.row << "," << e.col << "] " << format_double(e.analytic) << ' '
                << format_double(e.estimated) << ' ' << format_double(e.stderr_est) << ' '
                << (e.pass ? "pass" : "FAIL") << '\n';
        out << (rep.all_pass ? "oracle: all entries agree\n" : "oracle: comparison failed\n");
        return rep.all_pass ? kOk : kFailure;
    } catch (const InstabilityError& e) {
        err << e.what() << '\n';
        return kInstability;
    } catch (const InsufficientDataError& e) {
        err << e.what() << '\n';
        return kFailure;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return kConfigError;
    }
}

inline int cmd_bound(double delta, double gamma, double coupling, bool scan, std::ostream& out, std::ostream& err) {
    try {
        const auto model = build_model(SensorParams{gamma, gamma, coupling, delta, 1.0});
        out << "I_UB: " << format_double(fisher_upper_bound(model)) << '\n';
        if (scan) {
            std::vector<double> ds, ub;
            for (double d : ThetaGrid{1e-3, 1e-1, 10}.points()) {
                ds.push_back(d);
                ub.push_back(fisher_upper_bound(build_model(SensorParams{gamma, gamma, coupling, d, 1.0})));
            }
            const auto fit = fit_power_law(ds, ub);
            out << "exponent in delta: " << format_double(fit.exponent) << " +- " << format_double(fit.stderr_exponent)
                << '\n';
        }
    } catch (const SingularResponseError& e) {
        err << e.what() << " (at the lasing threshold G_0 does not exist)\n";
        return kInstability;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return kConfigError;
    }
    return kOk;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantum-noise simulation of exceptional-point sensors"};
    app.require_subcommand(1);

    SweepFlags sf;
    auto* sweep = app.add_subcommand("sweep", "theta sweep of I1 and uncertainties; CSV plus fit summary");
    sweep->add_option("--scenario", sf.scenario, "built-in scenario name");
    sweep->add_option("--config", sf.config, "JSON experiment document");
    sf.o_theta_min = sweep->add_option("--theta-min", sf.theta_min);
    sf.o_theta_max = sweep->add_option("--theta-max", sf.theta_max);
    sf.o_ppd = sweep->add_option("--points-per-decade", sf.points_per_decade);
    sf.o_delta = sweep->add_option("--delta", sf.delta, "detuning below threshold");
    sf.o_seed = sweep->add_option("--seed", sf.seed, "seed for random probes");
    sf.o_output = sweep->add_option("--output", sf.output, "CSV path; the fit summary goes to <path>.fit.json");
    sf.o_format = sweep->add_option("--format", sf.format, "csv or tsv");
    sweep->add_option("--column", sf.column, "fitted column: cr, het or I1");

    std::string jordan_input;
    double jordan_tol = kDefaultRankTolerance;
    auto* jordan = app.add_subcommand("jordan", "zero-eigenvalue Jordan structure of M Pi^-1");
    jordan->add_option("--input", jordan_input, "JSON document with M (and optional Pi)")->required();
    jordan->add_option("--tol", jordan_tol, "relative singular-value threshold");

    int synth_order = 3;
    std::uint64_t synth_seed = 0;
    std::string synth_output;
    auto* synth = app.add_subcommand("synth", "write a synthetic nilpotent model with one N-block");
    synth->add_option("--order", synth_order, "Jordan block size N");
    synth->add_option("--seed", synth_seed);
    synth->add_option("--output", synth_output);

    OracleFlags of;
    auto* oracle = app.add_subcommand("oracle", "time-domain Langevin check of the output covariance");
    oracle->add_option("--config", of.config, "JSON document");
    of.given = {{"delta", oracle->add_option("--delta", of.delta)},
                {"theta", oracle->add_option("--theta", of.theta)},
                {"duration", oracle->add_option("--duration", of.duration, "units of 1/kappa")},
                {"dt", oracle->add_option("--dt", of.dt)},
                {"bandwidth", oracle->add_option("--bandwidth", of.bandwidth, "carrier bandwidth (angular)")},
                {"burn_in", oracle->add_option("--burn-in", of.burn_in)},
                {"gamma", oracle->add_option("--gamma", of.gamma)},
                {"coupling", oracle->add_option("--coupling", of.coupling)},
                {"seed", oracle->add_option("--seed", of.seed)},
                {"trajectories", oracle->add_option("--trajectories", of.trajectories)}};

    double bound_delta = 0.05, bound_gamma = 1.0, bound_coupling = 1.0;
    bool bound_scan = false;
    auto* bound = app.add_subcommand("bound", "below-threshold Fisher-information upper bound");
    bound->add_option("--delta", bound_delta);
    bound->add_option("--gamma", bound_gamma);
    bound->add_option("--coupling", bound_coupling);
    bound->add_flag("--scan", bound_scan, "fit the exponent over delta in [1e-3, 1e-1]");

    auto* list = app.add_subcommand("scenarios", "list built-in scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kConfigError;
    }

    if (*sweep) return cmd_sweep(sf, out, err);
    if (*jordan) return cmd_jordan(jordan_input, jordan_tol, out, err);
    if (*synth) return cmd_synth(synth_order, synth_seed, synth_output, out, err);
    if (*oracle) return cmd_oracle(of, out, err);
    if (*bound) return cmd_bound(bound_delta, bound_gamma, bound_coupling, bound_scan, out, err);
    if (*list) {
        for (const auto& s : builtin_scenarios()) out << s.name << "  " << s.description << '\n';
        return kOk;
    }
    return kConfigError;
}

}  // namespace epsense::cli

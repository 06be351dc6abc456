// star_spectra: command-line studies of the ground state of a planar
// delta-interaction supported on a star of N segments.
//
// Subcommands: solve, scan, optimize, inequality, converge, limit, validate.
// Every output file starts with a header echoing the fully resolved
// configuration, so a run can be reproduced from its artifact alone.
// Identical configuration and seed produce byte-identical output.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "starspec/starspec.hpp"

namespace {

constexpr const char* program_version = "1.0.0";

using nlohmann::json;
using namespace starspec;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct RunConfig {
    std::string command;
    int num_edges = 3;
    double edge_length = 1.0;
    std::vector<double> angles;  // in the units given by `units`
    bool symmetric = false;
    std::string units = "rad";  // rad | frac (fractions of the full circle)
    double alpha = 5.0;
    int panels = 8;
    int order = 6;
    double grading = 2.0;
    std::uint64_t seed = 12345;
    int samples = 50;
    int starts = 5;
    int evaluations = 400;
    std::vector<double> initial;  // optimize start, in `units`
    std::vector<double> lengths;  // limit study
    int cells = 96;               // oracle resolution (validate)
    std::string study = "mesh";   // converge: mesh | kappa
    double kappa_min = 0.0;
    double kappa_max = 0.0;
    int points = 20;
    int steps = 4;
    int threads = 1;
    std::string output;      // CSV/JSON destination ("" = stdout)
    std::string summary;     // optimize JSON summary destination
    std::string psi_output;  // solve eigenfunction CSV destination
    std::string format = "json";
    std::string config_path;
    bool format_from_file = false;  // keeps a file-supplied format from being
                                    // clobbered by the per-command CSV default
};

std::vector<double> to_radians(const std::vector<double>& raw, const std::string& units) {
    if (units != "rad" && units != "frac")
        throw std::invalid_argument("units: must be 'rad' or 'frac'");
    std::vector<double> out = raw;
    if (units == "frac")
        for (double& a : out) a *= two_pi;
    return out;
}

// Flat "key = value" configuration files.  Values land in RunConfig before the
// command line is re-applied, so flags override the file.  Every diagnostic
// names the offending key.
namespace cfgfile {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& key, const std::string& why) {
    throw std::invalid_argument("config: " + key + ": " + why);
}

double as_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) fail(key, "invalid number '" + v + "'");
        return d;
    } catch (const std::invalid_argument&) {
    } catch (const std::out_of_range&) {
    }
    fail(key, "invalid number '" + v + "'");
}

long as_long(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        long n = std::stol(v, &used);
        if (used != v.size()) fail(key, "invalid integer '" + v + "'");
        return n;
    } catch (const std::invalid_argument&) {
    } catch (const std::out_of_range&) {
    }
    fail(key, "invalid integer '" + v + "'");
}

bool as_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    fail(key, "invalid boolean '" + v + "'");
}

std::vector<double> as_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string part;
    while (std::getline(ss, part, ','))
        out.push_back(as_double(key, trim(part)));
    if (out.empty()) fail(key, "expected a comma separated list");
    return out;
}

void apply(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open file '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                        ": empty key");
        if (key == "num-edges") {
            long n = as_long(key, val);
            if (n < 2) fail(key, "N must be >= 2");
            cfg.num_edges = static_cast<int>(n);
        } else if (key == "edge-length") {
            double d = as_double(key, val);
            if (!(d > 0.0)) fail(key, "value must be > 0");
            cfg.edge_length = d;
        } else if (key == "angles") {
            cfg.angles = as_list(key, val);
        } else if (key == "symmetric") {
            cfg.symmetric = as_bool(key, val);
        } else if (key == "units") {
            if (val != "rad" && val != "frac") fail(key, "must be 'rad' or 'frac'");
            cfg.units = val;
        } else if (key == "alpha") {
            double d = as_double(key, val);
            if (!(d > 0.0)) fail(key, "value must be > 0");
            cfg.alpha = d;
        } else if (key == "panels") {
            long n = as_long(key, val);
            if (n < 1) fail(key, "value must be >= 1");
            cfg.panels = static_cast<int>(n);
        } else if (key == "order") {
            long n = as_long(key, val);
            if (n < 1) fail(key, "value must be >= 1");
            cfg.order = static_cast<int>(n);
        } else if (key == "grading") {
            double d = as_double(key, val);
            if (!(d > 0.0)) fail(key, "value must be > 0");
            cfg.grading = d;
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(as_long(key, val));
        } else if (key == "samples") {
            long n = as_long(key, val);
            if (n < 0) fail(key, "value must be >= 0");
            cfg.samples = static_cast<int>(n);
        } else if (key == "starts") {
            long n = as_long(key, val);
            if (n < 1) fail(key, "value must be >= 1");
            cfg.starts = static_cast<int>(n);
        } else if (key == "evaluations") {
            long n = as_long(key, val);
            if (n < 1) fail(key, "value must be >= 1");
            cfg.evaluations = static_cast<int>(n);
        } else if (key == "initial") {
            cfg.initial = as_list(key, val);
        } else if (key == "lengths") {
            cfg.lengths = as_list(key, val);
        } else if (key == "cells") {
            long n = as_long(key, val);
            if (n < 2) fail(key, "value must be >= 2");
            cfg.cells = static_cast<int>(n);
        } else if (key == "study") {
            if (val != "mesh" && val != "kappa") fail(key, "must be 'mesh' or 'kappa'");
            cfg.study = val;
        } else if (key == "kappa-min") {
            cfg.kappa_min = as_double(key, val);
        } else if (key == "kappa-max") {
            cfg.kappa_max = as_double(key, val);
        } else if (key == "points") {
            long n = as_long(key, val);
            if (n < 2) fail(key, "value must be >= 2");
            cfg.points = static_cast<int>(n);
        } else if (key == "steps") {
            long n = as_long(key, val);
            if (n < 1) fail(key, "value must be >= 1");
            cfg.steps = static_cast<int>(n);
        } else if (key == "threads") {
            long n = as_long(key, val);
            if (n < 1) fail(key, "value must be >= 1");
            cfg.threads = static_cast<int>(n);
        } else if (key == "output") {
            cfg.output = val;
        } else if (key == "summary") {
            cfg.summary = val;
        } else if (key == "psi") {
            cfg.psi_output = val;
        } else if (key == "format") {
            if (val != "json" && val != "csv") fail(key, "must be 'json' or 'csv'");
            cfg.format = val;
            cfg.format_from_file = true;
        } else {
            fail(key, "unknown key");
        }
    }
}

}  // namespace cfgfile

StarGraph resolve_graph(const RunConfig& cfg) {
    if (cfg.symmetric) {
        if (!cfg.angles.empty())
            throw std::invalid_argument("angles: cannot combine --angles with --symmetric");
        return symmetric_graph(cfg.num_edges, cfg.edge_length);
    }
    if (cfg.angles.empty())
        throw std::invalid_argument("angles: provide --angles or --symmetric");
    return make_star_graph(cfg.num_edges, cfg.edge_length,
                           to_radians(cfg.angles, cfg.units));
}

// Fixed-order key/value echo of the resolved configuration; shared by the
// CSV headers and the JSON summaries so both carry identical information.
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("command", cfg.command);
    kv.emplace_back("num-edges", std::to_string(cfg.num_edges));
    kv.emplace_back("edge-length", fmt17(cfg.edge_length));
    if (cfg.symmetric) {
        kv.emplace_back("symmetric", "true");
    } else if (!cfg.angles.empty()) {
        std::string list;
        for (std::size_t i = 0; i < cfg.angles.size(); ++i) {
            if (i) list += ',';
            list += fmt17(cfg.angles[i]);
        }
        kv.emplace_back("angles", list);
        kv.emplace_back("units", cfg.units);
    }
    kv.emplace_back("alpha", fmt17(cfg.alpha));
    kv.emplace_back("panels", std::to_string(cfg.panels));
    kv.emplace_back("order", std::to_string(cfg.order));
    kv.emplace_back("grading", fmt17(cfg.grading));
    if (cfg.command == "scan" || cfg.command == "optimize")
        kv.emplace_back("seed", std::to_string(cfg.seed));
    if (cfg.command == "scan") kv.emplace_back("samples", std::to_string(cfg.samples));
    if (cfg.command == "optimize") {
        kv.emplace_back("starts", std::to_string(cfg.starts));
        kv.emplace_back("evaluations", std::to_string(cfg.evaluations));
    }
    if (cfg.command == "converge") {
        kv.emplace_back("study", cfg.study);
        if (cfg.study == "mesh") kv.emplace_back("steps", std::to_string(cfg.steps));
        if (cfg.study == "kappa") {
            kv.emplace_back("points", std::to_string(cfg.points));
            if (cfg.kappa_min > 0.0 && cfg.kappa_max > cfg.kappa_min) {
                kv.emplace_back("kappa-min", fmt17(cfg.kappa_min));
                kv.emplace_back("kappa-max", fmt17(cfg.kappa_max));
            }
        }
    }
    if (cfg.command == "limit" && !cfg.lengths.empty()) {
        std::string list;
        for (std::size_t i = 0; i < cfg.lengths.size(); ++i) {
            if (i) list += ',';
            list += fmt17(cfg.lengths[i]);
        }
        kv.emplace_back("lengths", list);
    }
    if (cfg.command == "validate") kv.emplace_back("cells", std::to_string(cfg.cells));
    kv.emplace_back("threads", std::to_string(cfg.threads));
    return kv;
}

json config_json(const RunConfig& cfg) {
    json j = json::object();
    for (const auto& [key, value] : config_echo(cfg)) j[key] = value;
    return j;
}

struct OutputTarget {
    std::ofstream file;
    std::ostream* stream = nullptr;

    explicit OutputTarget(const std::string& path) {
        if (path.empty() || path == "-") {
            stream = &std::cout;
        } else {
            file.open(path, std::ios::binary);
            if (!file) throw std::runtime_error("output: cannot open file: " + path);
            stream = &file;
        }
    }
    std::ostream& out() { return *stream; }
};

void write_csv_header(std::ostream& os, const RunConfig& cfg) {
    os << "# star_spectra " << program_version << "\n";
    for (const auto& [key, value] : config_echo(cfg)) os << "# " << key << " = " << value << "\n";
}

json mesh_json(const QuadratureRule& rule) {
    return json{{"edge_length", rule.edge_length},
                {"num_panels", rule.num_panels},
                {"local_order", rule.local_order},
                {"points_per_edge", rule.points_per_edge()}};
}

QuadratureRule make_rule(const RunConfig& cfg, double edge_length) {
    return build_rule_graded_both_ends(edge_length, cfg.panels, cfg.order, cfg.grading);
}

SolverOptions make_solver_options(const RunConfig& cfg) {
    SolverOptions opts;
    opts.panels = cfg.panels;
    opts.order = cfg.order;
    opts.threads = cfg.threads;
    return opts;
}

// ---- solve ----------------------------------------------------------------

int run_solve(const RunConfig& cfg) {
    const StarGraph g = resolve_graph(cfg);
    const QuadratureRule rule = make_rule(cfg, g.edge_length);
    const SpectralResult res = lowest_eigenvalue(g, cfg.alpha, rule, make_solver_options(cfg));

    if (!cfg.psi_output.empty()) {
        OutputTarget psi(cfg.psi_output);
        write_csv_header(psi.out(), cfg);
        psi.out() << "edge,s,value\n";
        const int points = rule.points_per_edge();
        for (int e = 0; e < g.num_edges; ++e)
            for (int k = 0; k < points; ++k)
                psi.out() << e << ',' << fmt17(rule.nodes[k]) << ','
                          << fmt17(res.psi_star[static_cast<std::size_t>(e) * points + k])
                          << "\n";
    }

    OutputTarget target(cfg.output);
    if (cfg.format == "csv") {
        write_csv_header(target.out(), cfg);
        target.out() << "key,value\n";
        target.out() << "lambda1," << fmt17(res.lambda1) << "\n";
        target.out() << "kappa_star," << fmt17(res.kappa_star) << "\n";
        target.out() << "bs_residual," << fmt17(res.bs_residual) << "\n";
    } else {
        json j;
        j["version"] = program_version;
        j["config"] = config_json(cfg);
        j["mesh"] = mesh_json(rule);
        j["lambda1"] = res.lambda1;
        j["kappa_star"] = res.kappa_star;
        j["bs_residual"] = res.bs_residual;
        j["bracket"] = {res.kappa_lo, res.kappa_hi};
        target.out() << j.dump(2) << "\n";
    }
    return 0;
}

// ---- scan -----------------------------------------------------------------

int run_scan(const RunConfig& cfg) {
    const QuadratureRule rule = make_rule(cfg, cfg.edge_length);
    const ScanReport rep = scan(cfg.num_edges, cfg.edge_length, cfg.alpha, cfg.samples,
                                cfg.seed, rule, make_solver_options(cfg));

    OutputTarget target(cfg.output);
    if (cfg.format == "json") {
        json rows = json::array();
        for (const ScanRow& row : rep.rows)
            rows.push_back({{"seed", row.seed},
                            {"phi", row.phi},
                            {"lambda1", row.lambda1},
                            {"symmetric_reference", row.symmetric_reference},
                            {"is_best", row.best}});
        json j;
        j["version"] = program_version;
        j["config"] = config_json(cfg);
        j["mesh"] = mesh_json(rule);
        j["symmetric_lambda1"] = rep.symmetric_lambda1;
        j["violations"] = rep.violations;
        j["rows"] = std::move(rows);
        target.out() << j.dump(2) << "\n";
    } else {
        write_csv_header(target.out(), cfg);
        target.out() << "# first row is the symmetric reference\n";
        target.out() << "seed";
        for (int n = 1; n <= cfg.num_edges; ++n) target.out() << ",phi_" << n;
        target.out() << ",lambda1,is_best\n";
        for (const ScanRow& row : rep.rows) {
            target.out() << row.seed;
            for (double a : row.phi) target.out() << ',' << fmt17(a);
            target.out() << ',' << fmt17(row.lambda1) << ',' << (row.best ? 1 : 0) << "\n";
        }
    }

    if (rep.violations > 0) {
        std::cerr << "failed-theorem report: " << rep.violations
                  << " sample(s) at or above the symmetric value; this signals a"
                     " discretization problem, not a counterexample.\n";
        for (const ScanRow& row : rep.rows)
            if (!row.symmetric_reference && row.lambda1 >= rep.symmetric_lambda1)
                std::cerr << "  seed " << row.seed << " lambda1 " << fmt17(row.lambda1)
                          << " vs symmetric " << fmt17(rep.symmetric_lambda1) << "\n";
        return 2;
    }
    return 0;
}

// ---- optimize -------------------------------------------------------------

int run_optimize(const RunConfig& cfg) {
    const QuadratureRule rule = make_rule(cfg, cfg.edge_length);
    OptimizeOptions opts;
    opts.starts = cfg.starts;
    opts.max_evaluations = cfg.evaluations;
    opts.seed = cfg.seed;
    if (!cfg.initial.empty()) opts.initial_phi = to_radians(cfg.initial, cfg.units);

    const OptimizationTrace trace = maximize_lambda1(cfg.num_edges, cfg.edge_length, cfg.alpha,
                                                     rule, opts, make_solver_options(cfg));

    if (!cfg.output.empty()) {
        OutputTarget target(cfg.output);
        write_csv_header(target.out(), cfg);
        target.out() << "seed";
        for (int n = 1; n <= cfg.num_edges; ++n) target.out() << ",phi_" << n;
        target.out() << ",lambda1,is_best\n";
        for (const EvaluationRecord& rec : trace.evaluated) {
            const bool is_best = rec.improved && rec.lambda1 == trace.best_lambda1;
            target.out() << rec.seed;
            for (double a : rec.phi) target.out() << ',' << fmt17(a);
            target.out() << ',' << fmt17(rec.lambda1) << ',' << (is_best ? 1 : 0) << "\n";
        }
    }

    json j;
    j["version"] = program_version;
    j["config"] = config_json(cfg);
    j["mesh"] = mesh_json(rule);
    j["converged"] = trace.converged;
    j["evaluations"] = trace.evaluations;
    j["best"] = {{"phi", trace.best_phi}, {"lambda1", trace.best_lambda1}};
    j["distance_to_symmetric"] = trace.distance_to_symmetric;
    json iterates = json::array();
    for (const auto& [phi, lambda] : trace.iterates)
        iterates.push_back({{"phi", phi}, {"lambda1", lambda}});
    j["iterates"] = std::move(iterates);
    json per_start = json::array();
    for (std::size_t r = 0; r < trace.per_start_phi.size(); ++r)
        per_start.push_back(
            {{"phi", trace.per_start_phi[r]}, {"lambda1", trace.per_start_lambda1[r]}});
    j["per_start"] = std::move(per_start);

    OutputTarget target(cfg.summary);
    target.out() << j.dump(2) << "\n";
    return 0;
}

// ---- inequality -----------------------------------------------------------

int run_inequality(const RunConfig& cfg) {
    const StarGraph g = resolve_graph(cfg);
    const ChordReport rep = verify_inequality(g);

    OutputTarget target(cfg.output);
    if (cfg.format == "json") {
        json j;
        j["version"] = program_version;
        j["config"] = config_json(cfg);
        j["all_nonneg"] = rep.all_nonneg;
        j["strict_at_1"] = rep.strict_at_1;
        json rows = json::array();
        for (std::size_t i = 0; i < rep.lhs.size(); ++i)
            rows.push_back({{"m", i + 1},
                            {"lhs", rep.lhs[i]},
                            {"rhs", rep.rhs[i]},
                            {"slack", rep.slack[i]}});
        j["rows"] = std::move(rows);
        target.out() << j.dump(2) << "\n";
    } else {
        write_csv_header(target.out(), cfg);
        target.out() << "m,lhs,rhs,slack\n";
        for (std::size_t i = 0; i < rep.lhs.size(); ++i)
            target.out() << (i + 1) << ',' << fmt17(rep.lhs[i]) << ',' << fmt17(rep.rhs[i])
                         << ',' << fmt17(rep.slack[i]) << "\n";
    }
    return 0;
}

// ---- converge -------------------------------------------------------------

int run_converge(const RunConfig& cfg) {
    const StarGraph g = resolve_graph(cfg);
    const SolverOptions base_opts = make_solver_options(cfg);

    OutputTarget target(cfg.output);
    if (cfg.study == "mesh") {
        if (cfg.steps < 1) throw std::invalid_argument("steps: must be >= 1");
        write_csv_header(target.out(), cfg);
        target.out() << "panels,lambda1,delta\n";
        double prev = 0.0;
        bool first = true;
        for (int i = 0; i < cfg.steps; ++i) {
            const int panels = cfg.panels << i;
            const QuadratureRule rule =
                build_rule_graded_both_ends(g.edge_length, panels, cfg.order, cfg.grading);
            const double lambda = lowest_eigenvalue(g, cfg.alpha, rule, base_opts).lambda1;
            target.out() << panels << ',' << fmt17(lambda) << ',';
            if (!first) target.out() << fmt17(lambda - prev);
            target.out() << "\n";
            prev = lambda;
            first = false;
        }
    } else if (cfg.study == "kappa") {
        if (cfg.points < 2) throw std::invalid_argument("points: must be >= 2");
        const QuadratureRule rule = make_rule(cfg, g.edge_length);
        double lo = cfg.kappa_min, hi = cfg.kappa_max;
        if (!(lo > 0.0) || !(hi > lo)) {
            const double kappa_star =
                lowest_eigenvalue(g, cfg.alpha, rule, base_opts).kappa_star;
            lo = 0.25 * kappa_star;
            hi = 4.0 * kappa_star;
        }
        write_csv_header(target.out(), cfg);
        target.out() << "kappa,bs_value\n";
        for (int i = 0; i < cfg.points; ++i) {
            const double kappa = lo + (hi - lo) * i / (cfg.points - 1);
            const double value = bs_value(g, cfg.alpha, kappa, rule, base_opts);
            target.out() << fmt17(kappa) << ',' << fmt17(value) << "\n";
        }
    } else {
        throw std::invalid_argument("study: must be 'mesh' or 'kappa'");
    }
    return 0;
}

// ---- limit ----------------------------------------------------------------

int run_limit(const RunConfig& cfg) {
    std::vector<double> phi;
    if (cfg.symmetric) {
        phi.assign(static_cast<std::size_t>(cfg.num_edges), two_pi / cfg.num_edges);
    } else if (!cfg.angles.empty()) {
        phi = to_radians(cfg.angles, cfg.units);
    } else {
        throw std::invalid_argument("angles: provide --angles or --symmetric");
    }

    const LimitReport rep = infinite_length_estimate(cfg.num_edges, phi, cfg.alpha,
                                                     cfg.lengths, make_solver_options(cfg));

    OutputTarget target(cfg.output);
    if (cfg.format == "json") {
        json j;
        j["version"] = program_version;
        j["config"] = config_json(cfg);
        j["lengths"] = rep.lengths;
        j["lambdas"] = rep.lambdas;
        j["limit_estimate"] = rep.limit_estimate;
        j["threshold"] = rep.threshold;
        j["below_threshold"] = rep.below_threshold;
        target.out() << j.dump(2) << "\n";
    } else {
        write_csv_header(target.out(), cfg);
        target.out() << "# limit_estimate = " << fmt17(rep.limit_estimate) << "\n";
        target.out() << "# threshold = " << fmt17(rep.threshold) << "\n";
        target.out() << "# below_threshold = " << (rep.below_threshold ? "true" : "false")
                     << "\n";
        target.out() << "L,lambda1\n";
        for (std::size_t i = 0; i < rep.lengths.size(); ++i)
            target.out() << fmt17(rep.lengths[i]) << ',' << fmt17(rep.lambdas[i]) << "\n";
    }
    return 0;
}

// ---- validate -------------------------------------------------------------

int run_validate(const RunConfig& cfg) {
    int failures = 0;
    auto report = [&](const char* name, bool ok, const std::string& detail) {
        std::cout << (ok ? "[ok]   " : "[fail] ") << name;
        if (!detail.empty()) std::cout << "  (" << detail << ")";
        std::cout << "\n";
        if (!ok) ++failures;
    };

    const StarGraph g = symmetric_graph(3, 1.0);
    const QuadratureRule rule = build_rule_graded_both_ends(1.0, 8, 6);
    SolverOptions opts;
    opts.threads = cfg.threads;

    // Ground-state positivity and residual quality.
    const SpectralResult res = lowest_eigenvalue(g, 5.0, rule, opts);
    const EigenfunctionReport ef = eigenfunction_report(res, g);
    report("eigenfunction positivity", ef.min_entry > 0.0 && res.bs_residual <= 1e-10,
           "min entry " + fmt17(ef.min_entry));

    // Strict decrease of the coupling value along a kappa grid.
    bool monotone = true;
    double prev = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double kappa =
            0.25 * res.kappa_star + (4.0 - 0.25) * res.kappa_star * i / 7.0;
        const double value = bs_value(g, 5.0, kappa, rule, opts);
        if (i > 0 && value >= prev) monotone = false;
        prev = value;
    }
    report("coupling monotonicity", monotone, "");

    // Random-angle sweep of the chord inequality where it holds (N <= 3).
    double min_slack = 0.0;
    bool chord_ok = true;
    for (int n = 2; n <= 3; ++n)
        for (int s = 0; s < 2000; ++s) {
            const StarGraph sample = random_graph(n, 1.0, 40000 + static_cast<std::uint64_t>(s));
            const ChordReport chord = verify_inequality(sample);
            for (double slack : chord.slack) min_slack = std::min(min_slack, slack);
            chord_ok = chord_ok && chord.all_nonneg;
        }
    report("chord inequality sweep", chord_ok, "min slack " + fmt17(min_slack));

    // Independent discretization agreement.
    const CrossValidation cross = cross_validate(g, 5.0, rule, cfg.cells, 200000, cfg.threads);
    report("discretization cross-check", !cross.flagged,
           "discrepancy " + fmt17(cross.discrepancy));

    std::cout << (failures == 0 ? "all checks passed" : "checks FAILED") << "\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"Spectral studies of attractive delta interactions on star graphs"};
    app.set_version_flag("--version", program_version);
    app.require_subcommand(1);

    const auto check_edges = CLI::Validator(
        [](std::string& s) -> std::string {
            try {
                if (std::stoi(s) < 2) return "N must be >= 2";
            } catch (...) {
                return "N must be an integer >= 2";
            }
            return {};
        },
        "N>=2");
    const auto check_positive = CLI::Validator(
        [](std::string& s) -> std::string {
            try {
                if (!(std::stod(s) > 0.0)) return "value must be > 0";
            } catch (...) {
                return "value must be a positive number";
            }
            return {};
        },
        "POSITIVE");

    auto add_graph_options = [&](CLI::App* sub, bool with_length = true) {
        sub->add_option("-N,--num-edges", cfg.num_edges, "number of edges")
            ->check(check_edges);
        if (with_length)
            sub->add_option("-L,--edge-length", cfg.edge_length, "edge length")
                ->check(check_positive);
        auto* angles = sub->add_option("--angles", cfg.angles,
                                       "consecutive angles, comma separated")
                           ->delimiter(',');
        auto* sym = sub->add_flag("--symmetric", cfg.symmetric, "equal angles 2*pi/N");
        angles->excludes(sym);
        sub->add_option("--units", cfg.units, "angle units: rad | frac")
            ->check(CLI::IsMember({"rad", "frac"}));
    };
    auto add_mesh_options = [&](CLI::App* sub) {
        sub->add_option("--panels", cfg.panels, "quadrature panels per edge")
            ->check(CLI::PositiveNumber);
        sub->add_option("--order", cfg.order, "quadrature order per panel")
            ->check(CLI::PositiveNumber);
        sub->add_option("--grading", cfg.grading, "mesh grading exponent")
            ->check(check_positive);
    };
    auto add_common_options = [&](CLI::App* sub) {
        sub->add_option("--alpha", cfg.alpha, "interaction strength")->check(check_positive);
        sub->add_option("--threads", cfg.threads, "worker thread cap")
            ->check(CLI::PositiveNumber);
        sub->add_option("-o,--output", cfg.output, "output path (default stdout)");
        sub->add_option("--config", cfg.config_path,
                        "flat key = value configuration file; flags override it");
    };
    auto add_seed_option = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "random seed")->envname("STAR_SPECTRA_SEED");
    };

    CLI::App* solve = app.add_subcommand("solve", "ground state of one star graph");
    add_graph_options(solve);
    add_mesh_options(solve);
    add_common_options(solve);
    solve->add_option("--format", cfg.format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}));
    solve->add_option("--psi", cfg.psi_output, "also write the eigenfunction as CSV");

    CLI::App* scan_cmd = app.add_subcommand("scan", "random shapes against the symmetric star");
    add_graph_options(scan_cmd);
    add_mesh_options(scan_cmd);
    add_common_options(scan_cmd);
    add_seed_option(scan_cmd);
    scan_cmd->add_option("--samples", cfg.samples, "number of random graphs")
        ->check(CLI::NonNegativeNumber);
    CLI::Option* scan_format = scan_cmd->add_option("--format", cfg.format, "json | csv")
                                   ->check(CLI::IsMember({"json", "csv"}));

    CLI::App* optimize = app.add_subcommand("optimize", "ascend lambda1 over the angles");
    add_graph_options(optimize);
    add_mesh_options(optimize);
    add_common_options(optimize);
    add_seed_option(optimize);
    optimize->add_option("--starts", cfg.starts, "multi-start count")
        ->check(CLI::PositiveNumber);
    optimize->add_option("--evaluations", cfg.evaluations, "evaluation budget per start")
        ->check(CLI::PositiveNumber);
    optimize->add_option("--initial", cfg.initial, "explicit first start angles")
        ->delimiter(',');
    optimize->add_option("--summary", cfg.summary, "JSON summary path (default stdout)");

    CLI::App* inequality = app.add_subcommand("inequality", "chord-sum inequality table");
    add_graph_options(inequality);
    add_common_options(inequality);
    CLI::Option* inequality_format = inequality->add_option("--format", cfg.format, "json | csv")
                                        ->check(CLI::IsMember({"json", "csv"}));

    CLI::App* converge = app.add_subcommand("converge", "mesh or kappa sweep studies");
    add_graph_options(converge);
    add_mesh_options(converge);
    add_common_options(converge);
    converge->add_option("--study", cfg.study, "mesh | kappa")
        ->check(CLI::IsMember({"mesh", "kappa"}));
    converge->add_option("--steps", cfg.steps, "mesh study: number of panel doublings");
    converge->add_option("--points", cfg.points, "kappa study: grid size");
    converge->add_option("--kappa-min", cfg.kappa_min, "kappa study: grid start");
    converge->add_option("--kappa-max", cfg.kappa_max, "kappa study: grid end");

    CLI::App* limit = app.add_subcommand("limit", "long-edge limit of lambda1");
    add_graph_options(limit, false);
    add_mesh_options(limit);
    add_common_options(limit);
    limit->add_option("--lengths", cfg.lengths, "edge lengths to sweep, ascending")
        ->delimiter(',');
    CLI::Option* limit_format = limit->add_option("--format", cfg.format, "json | csv")
                                    ->check(CLI::IsMember({"json", "csv"}));

    CLI::App* validate = app.add_subcommand("validate", "one-shot property health check");
    validate->add_option("--cells", cfg.cells, "oracle cells per edge")
        ->check(CLI::PositiveNumber);
    validate->add_option("--threads", cfg.threads, "worker thread cap")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (!cfg.config_path.empty()) {
        // File values become the new defaults, then the command line is applied
        // a second time on top so explicit flags win.
        const std::string path = cfg.config_path;
        cfg = RunConfig{};
        try {
            cfgfile::apply(path, cfg);
        } catch (const std::exception& ex) {
            std::cerr << "error: " << ex.what() << "\n";
            return 1;
        }
        app.clear();
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            app.exit(e);
            return 1;
        }
    }

    try {
        if (app.got_subcommand(solve)) {
            cfg.command = "solve";
            return run_solve(cfg);
        }
        if (app.got_subcommand(scan_cmd)) {
            cfg.command = "scan";
            if (scan_format->count() == 0 && !cfg.format_from_file) cfg.format = "csv";
            return run_scan(cfg);
        }
        if (app.got_subcommand(optimize)) {
            cfg.command = "optimize";
            return run_optimize(cfg);
        }
        if (app.got_subcommand(inequality)) {
            cfg.command = "inequality";
            if (inequality_format->count() == 0 && !cfg.format_from_file) cfg.format = "csv";
            return run_inequality(cfg);
        }
        if (app.got_subcommand(converge)) {
            cfg.command = "converge";
            cfg.format = "csv";
            return run_converge(cfg);
        }
        if (app.got_subcommand(limit)) {
            cfg.command = "limit";
            if (limit_format->count() == 0 && !cfg.format_from_file) cfg.format = "csv";
            return run_limit(cfg);
        }
        cfg.command = "validate";
        return run_validate(cfg);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}

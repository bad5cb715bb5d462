#include "depbound/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "depbound/dependence_info.hpp"
#include "depbound/errors.hpp"
#include "depbound/extremal.hpp"
#include "depbound/parallel.hpp"
#include "depbound/rearrangement.hpp"
#include "depbound/scenarios.hpp"
#include "depbound/var_bounds.hpp"

namespace depbound {

namespace {

using json = nlohmann::json;

constexpr int kConfigVersion = 1;

// ------------------------------------------------------------ config access

struct Config {
    json doc;
    std::filesystem::path dir;
};

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

Config load_config(const RunConfig& run, bool required) {
    Config cfg;
    if (run.config.empty()) {
        if (required) throw ConfigError("--config is required for " + run.subcommand);
        cfg.doc = json::object();
        return cfg;
    }
    std::ifstream in(run.config);
    if (!in) throw ConfigError("cannot open config " + run.config.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    try {
        cfg.doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(run.config.string() + ":" + std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
    }
    if (!cfg.doc.is_object()) throw ConfigError(run.config.string() + ": top level must be an object");
    if (!cfg.doc.contains("version")) throw ConfigError(run.config.string() + ": field 'version' is required");
    if (!cfg.doc["version"].is_number_integer() || cfg.doc["version"].get<int>() != kConfigVersion)
        throw ConfigError(run.config.string() + ": field 'version' must be " + std::to_string(kConfigVersion));
    cfg.dir = run.config.parent_path();
    return cfg;
}

std::string join(const std::string& where, const std::string& field) { return where.empty() ? field : where + "." + field; }

const json* find(const json& j, const std::string& field) {
    if (!j.is_object()) return nullptr;
    auto it = j.find(field);
    return it == j.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& field, const std::string& where, std::optional<double> fallback = {}) {
    const json* v = find(j, field);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError("config field '" + join(where, field) + "' is required");
    }
    if (!v->is_number()) throw ConfigError("config field '" + join(where, field) + "' must be a number");
    return v->get<double>();
}

std::size_t count(const json& j, const std::string& field, const std::string& where, std::size_t fallback) {
    const json* v = find(j, field);
    if (!v) return fallback;
    if (v->is_number_unsigned() || (v->is_number_integer() && v->get<long long>() >= 0))
        return v->get<std::size_t>();
    if (v->is_number_float() && v->get<double>() >= 0 && std::floor(v->get<double>()) == v->get<double>())
        return static_cast<std::size_t>(v->get<double>());
    throw ConfigError("config field '" + join(where, field) + "' must be a nonnegative integer");
}

std::string text(const json& j, const std::string& field, const std::string& where, std::optional<std::string> fallback = {}) {
    const json* v = find(j, field);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError("config field '" + join(where, field) + "' is required");
    }
    if (!v->is_string()) throw ConfigError("config field '" + join(where, field) + "' must be a string");
    return v->get<std::string>();
}

bool flag(const json& j, const std::string& field, const std::string& where, bool fallback) {
    const json* v = find(j, field);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError("config field '" + join(where, field) + "' must be true or false");
    return v->get<bool>();
}

std::vector<double> numbers(const json& j, const std::string& field, const std::string& where,
                            std::optional<std::vector<double>> fallback = {}) {
    const json* v = find(j, field);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError("config field '" + join(where, field) + "' is required");
    }
    if (!v->is_array()) throw ConfigError("config field '" + join(where, field) + "' must be an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v->size(); ++k) {
        if (!(*v)[k].is_number())
            throw ConfigError("config field '" + join(where, field) + "[" + std::to_string(k) + "]' must be a number");
        out.push_back((*v)[k].get<double>());
    }
    return out;
}

std::vector<double> levels_of(const Config& cfg) {
    const auto levels = numbers(cfg.doc, "levels", "");
    if (levels.empty()) throw ConfigError("config field 'levels' must not be empty");
    for (std::size_t k = 0; k < levels.size(); ++k)
        if (!(levels[k] > 0.0 && levels[k] < 1.0))
            throw ConfigError("config field 'levels[" + std::to_string(k) + "]' must lie in (0, 1)");
    return levels;
}

std::filesystem::path resolve(const Config& cfg, const std::string& file) {
    std::filesystem::path p(file);
    return p.is_absolute() || cfg.dir.empty() ? p : cfg.dir / p;
}

std::vector<double> read_column(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sample file " + path.string());
    std::vector<double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        try {
            out.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": not a number");
        }
    }
    return out;
}

Marginal parse_marginal(const Config& cfg, const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError("config field '" + where + "' must be an object");
    const std::string kind = text(j, "kind", where);
    Marginal m = Marginal::pareto2();
    try {
        if (kind == "pareto2") {
            m = Marginal::pareto2();
        } else if (kind == "uniform") {
            // uniform(0,1) as a fine quantile table
            const std::size_t nodes = count(j, "nodes", where, 100000);
            if (nodes < 2) throw ConfigError("config field '" + join(where, "nodes") + "' must be at least 2");
            std::vector<double> p(nodes), q(nodes);
            for (std::size_t k = 0; k < nodes; ++k) p[k] = q[k] = static_cast<double>(k + 1) / static_cast<double>(nodes);
            m = Marginal::quantile_table(std::move(p), std::move(q));
        } else if (kind == "empirical") {
            if (find(j, "samples")) m = Marginal::empirical(numbers(j, "samples", where));
            else m = Marginal::empirical(read_column(resolve(cfg, text(j, "file", where))));
        } else if (kind == "quantile_table") {
            m = Marginal::quantile_table(numbers(j, "probabilities", where), numbers(j, "quantiles", where));
        } else {
            throw ConfigError("config field '" + join(where, "kind") + "': unknown marginal kind '" + kind + "'");
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config field '" + where + "': " + e.what());
    }
    const double factor = number(j, "scale", where, 1.0);
    if (!(factor >= 0.0)) throw ConfigError("config field '" + join(where, "scale") + "' must be nonnegative");
    return factor == 1.0 ? m : scale(m, factor);
}

// "marginals": [ {...}, ... ] or { ..., "count": d }
std::vector<Marginal> parse_marginals(const Config& cfg, const json& parent, const std::string& field = "marginals") {
    const json* v = find(parent, field);
    if (!v) throw ConfigError("config field '" + field + "' is required");
    std::vector<Marginal> out;
    if (v->is_array()) {
        for (std::size_t k = 0; k < v->size(); ++k)
            out.push_back(parse_marginal(cfg, (*v)[k], field + "[" + std::to_string(k) + "]"));
    } else if (v->is_object()) {
        const std::size_t n = count(*v, "count", field, 1);
        const Marginal m = parse_marginal(cfg, *v, field);
        out.assign(n, m);
    } else {
        throw ConfigError("config field '" + field + "' must be an array or an object");
    }
    if (out.empty()) throw ConfigError("config field '" + field + "' must not be empty");
    return out;
}

AggregationKind parse_aggregation(const Config& cfg, AggregationKind fallback) {
    const std::string name = text(cfg.doc, "aggregation", "", std::string(to_string(fallback)));
    if (name == "sum") return AggregationKind::Sum;
    if (name == "max") return AggregationKind::Max;
    if (name == "min") return AggregationKind::Min;
    throw ConfigError("config field 'aggregation' must be sum, max or min");
}

std::uint64_t master_seed(const RunConfig& run, const Config& cfg, std::uint64_t fallback) {
    if (run.seed) return *run.seed;
    const json* v = find(cfg.doc, "seed");
    if (!v) return fallback;
    if (!v->is_number_unsigned()) throw ConfigError("config field 'seed' must be an unsigned 64-bit integer");
    return v->get<std::uint64_t>();
}

RaConfig parse_ra(const Config& cfg, std::uint64_t seed, std::size_t default_restarts) {
    const json* j = find(cfg.doc, "ra");
    const json empty = json::object();
    const json& r = j ? *j : empty;
    RaConfig ra;
    ra.N = count(r, "N", "ra", 10000);
    ra.max_sweeps = count(r, "max_sweeps", "ra", 1000);
    ra.restarts = count(r, "restarts", "ra", default_restarts);
    ra.seed = seed;
    if (flag(r, "dump", "ra", false)) ra.dump_dir = text(r, "dump_dir", "ra", std::string("ra_matrices"));
    try {
        validate(ra);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config field 'ra': ") + e.what());
    }
    return ra;
}

DistanceSpec parse_distance(const json& j, const std::string& where) {
    DistanceSpec d;
    const std::string kind = text(j, "distance", where, std::string("ks"));
    if (kind == "ks") d.kind = DistanceKind::KolmogorovSmirnov;
    else if (kind == "cvm") d.kind = DistanceKind::CramerVonMises;
    else if (kind == "lp") d.kind = DistanceKind::Lp;
    else throw ConfigError("config field '" + join(where, "distance") + "' must be ks, cvm or lp");
    d.p = number(j, "p", where, 2.0);
    d.grid = count(j, "grid", where, 32);
    try {
        validate(d);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config field '" + where + "': " + e.what());
    }
    return d;
}

// ------------------------------------------------------------ output

std::ofstream open_output(const RunConfig& run, const std::string& name) {
    std::filesystem::create_directories(run.out_dir);
    const auto path = run.out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string display(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

void note(const RunConfig& run, const std::string& msg) {
    if (run.verbosity >= 0) std::cerr << "depbound: " << msg << '\n';
}

void require_convergence(const RunConfig& run, bool converged, const std::string& what) {
    if (converged) return;
    if (run.strict) throw ConvergenceError(what + " stopped at its sweep cap");
    note(run, "warning: " + what + " stopped at its sweep cap (results flagged converged=false)");
}

std::pair<double, double> bracket_for(const std::vector<Marginal>& marginals) { return default_bracket(marginals); }

}  // namespace

// ------------------------------------------------------------ subcommands

int cmd_standard(const RunConfig& run) {
    const Config cfg = load_config(run, true);
    if (parse_aggregation(cfg, AggregationKind::Sum) != AggregationKind::Sum)
        throw ConfigError("config field 'aggregation': the standard subcommand handles sums only");
    const auto marginals = parse_marginals(cfg, cfg.doc);
    if (marginals.size() < 2) throw ConfigError("config field 'marginals' needs at least two entries");
    const auto levels = levels_of(cfg);
    const std::uint64_t seed = master_seed(run, cfg, 0);
    const RaConfig ra = parse_ra(cfg, seed, 5);
    const double tol = number(cfg.doc, "tolerance", "", 1e-9);
    const std::size_t threads = resolve_threads(run.threads);

    struct Row {
        VarInterval std_var, ra_var;
        bool converged = true;
    };
    std::vector<Row> rows(levels.size());
    parallel_for(levels.size(), threads, [&](std::size_t k) {
        rows[k].std_var = standard_var_bounds(marginals, levels[k], tol);
        const auto worst = ra_var_upper(marginals, levels[k], ra);
        const auto best = ra_var_lower(marginals, levels[k], ra);
        rows[k].ra_var = {levels[k], best.lower_part.value, worst.upper_part.value};
        rows[k].converged = worst.converged() && best.converged();
    });
    auto out = open_output(run, "standard.csv");
    out << "level,std_var_lo,std_var_hi,ra_var_lo,ra_var_hi,display,meta_json\n";
    bool all_converged = true;
    for (const auto& r : rows) {
        json meta = {{"N", ra.N}, {"restarts", ra.restarts}, {"seed", ra.seed}, {"max_sweeps", ra.max_sweeps},
                     {"tolerance", tol}, {"converged", r.converged}, {"marginals", marginals.size()}};
        out << format_number(r.std_var.level) << ',' << format_number(r.std_var.low) << ','
            << format_number(r.std_var.high) << ',' << format_number(r.ra_var.low) << ',' << format_number(r.ra_var.high)
            << ',' << csv_quote("std (" + display(r.std_var.low) + " : " + display(r.std_var.high) + ") ra (" +
                                display(r.ra_var.low) + " : " + display(r.ra_var.high) + ")")
            << ',' << csv_quote(meta.dump()) << '\n';
        all_converged = all_converged && r.converged;
    }
    require_convergence(run, all_converged, "rearrangement");
    return kExitOk;
}

int cmd_prescription(const RunConfig& run) {
    const Config cfg = load_config(run, true);
    const json* pj = find(cfg.doc, "prescription");
    if (!pj || !pj->is_object()) throw ConfigError("config field 'prescription' is required");
    const std::size_t dim = count(cfg.doc, "dim", "", 0) ? count(cfg.doc, "dim", "", 0)
                                                         : (find(cfg.doc, "marginals") ? parse_marginals(cfg, cfg.doc).size() : 0);
    if (dim < 2) throw ConfigError("config needs 'dim' >= 2 or a marginals list");
    const bool survival = flag(*pj, "survival", "prescription", false);
    const Prescription p = Prescription::load_csv(resolve(cfg, text(*pj, "file", "prescription")), dim, survival);
    const std::size_t grid = count(*pj, "grid", "prescription", 8);
    if (grid < 1) throw ConfigError("config field 'prescription.grid' must be positive");
    check_prescription_feasible(survival ? p.reflected() : p, count(*pj, "probe_grid", "prescription", grid));

    {
        auto out = open_output(run, "prescription_surface.csv");
        for (std::size_t i = 0; i < dim; ++i) out << 'u' << i + 1 << ',';
        out << "lower,upper,fh_lower,fh_upper\n";
        const Lattice lattice = Lattice::uniform(dim, grid);
        std::vector<double> u(dim);
        for (std::size_t k = 0; k < lattice.size(); ++k) {
            lattice.point(k, u);
            Interval b;
            double fl, fu;
            if (survival) {
                b = improved_fh_survival(p, u);
                std::vector<double> v(dim);
                for (std::size_t i = 0; i < dim; ++i) v[i] = 1.0 - u[i];
                fl = frechet_lower(v);
                fu = frechet_upper(v);
            } else {
                b = {improved_fh_lower(p, u), improved_fh_upper(p, u)};
                fl = frechet_lower(u);
                fu = frechet_upper(u);
            }
            for (double x : u) out << format_number(x) << ',';
            out << format_number(b.lower) << ',' << format_number(b.upper) << ',' << format_number(fl) << ','
                << format_number(fu) << '\n';
        }
    }

    const AggregationKind agg = parse_aggregation(cfg, AggregationKind::Sum);
    if (agg == AggregationKind::Sum) return kExitOk;
    if ((agg == AggregationKind::Min) != survival)
        throw ConfigError(agg == AggregationKind::Min ? "aggregation 'min' needs a survival prescription (prescription.survival = true)"
                                                      : "aggregation 'max' needs a copula prescription (prescription.survival = false)");
    const auto marginals = parse_marginals(cfg, cfg.doc);
    if (marginals.size() != dim) throw ConfigError("config field 'marginals' must have 'dim' entries");
    const auto levels = levels_of(cfg);
    const double tol = number(cfg.doc, "tolerance", "", 1e-9);
    const auto bracket = bracket_for(marginals);
    std::function<DfBounds(double)> improved, plain;
    if (agg == AggregationKind::Max) {
        const auto lo = improved_fh_lower_fn(p), hi = improved_fh_upper_fn(p);
        const auto W = lower_frechet_copula(dim), M = upper_frechet_copula(dim);
        improved = [=](double s) { return max_aggregation_bounds(marginals, lo, hi, s); };
        plain = [=](double s) { return max_aggregation_bounds(marginals, W, M, s); };
    } else {
        const SurvivalFn s_lo(dim, "improved_survival_lower", [p](Point u) { return improved_fh_survival(p, u).lower; });
        const SurvivalFn s_hi(dim, "improved_survival_upper", [p](Point u) { return improved_fh_survival(p, u).upper; });
        const Prescription none(dim);
        const SurvivalFn f_lo(dim, "fh_survival_lower", [none](Point u) { return improved_fh_survival(none, u).lower; });
        const SurvivalFn f_hi(dim, "fh_survival_upper", [none](Point u) { return improved_fh_survival(none, u).upper; });
        improved = [=](double s) { return min_aggregation_bounds(marginals, s_lo, s_hi, s); };
        plain = [=](double s) { return min_aggregation_bounds(marginals, f_lo, f_hi, s); };
    }
    auto out = open_output(run, "prescription_var.csv");
    out << "level,unc_lo,unc_hi,imp_lo,imp_hi,impr_pct,display,meta_json\n";
    for (double alpha : levels) {
        const auto unc = var_interval_from_df(plain, alpha, bracket, tol);
        const auto imp = var_interval_from_df(improved, alpha, bracket, tol);
        const json meta = {{"aggregation", to_string(agg)}, {"points", p.size()}, {"grid", grid}, {"tolerance", tol}};
        out << format_number(alpha) << ',' << format_number(unc.low) << ',' << format_number(unc.high) << ','
            << format_number(imp.low) << ',' << format_number(imp.high) << ','
            << format_number(improvement_percent(unc.low, unc.high, imp.low, imp.high)) << ','
            << csv_quote("(" + display(imp.low) + " : " + display(imp.high) + ")") << ',' << csv_quote(meta.dump()) << '\n';
    }
    return kExitOk;
}

namespace {

QuasiCopulaFn parse_reference(const Config& cfg, std::size_t dim, std::uint64_t seed, json& meta) {
    const json* rj = find(cfg.doc, "reference");
    if (!rj || !rj->is_object()) throw ConfigError("config field 'reference' is required");
    const std::string kind = text(*rj, "kind", "reference");
    meta["reference"] = kind;
    if (kind == "independence") return independence_copula(dim);
    if (kind == "comonotone") return upper_frechet_copula(dim);
    EmpiricalCopula emp = [&] {
        if (kind == "t") {
            TCopulaSpec t{dim, number(*rj, "rho", "reference"), number(*rj, "nu", "reference", 2.0)};
            const std::size_t n = count(*rj, "samples", "reference", 100000);
            meta["reference_samples"] = n;
            meta["reference_seed"] = seed;
            try {
                return sample_t_copula(t, n, seed);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("config field 'reference': ") + e.what());
            }
        }
        if (kind == "empirical") return EmpiricalCopula::load_csv(resolve(cfg, text(*rj, "file", "reference")));
        throw ConfigError("config field 'reference.kind' must be independence, comonotone, t or empirical");
    }();
    if (emp.dim() != dim) throw ConfigError("reference copula dimension does not match the marginals");
    if (flag(*rj, "checkerboard", "reference", false)) {
        meta["reference_checkerboard"] = true;
        return emp.as_checkerboard_function("checkerboard_reference");
    }
    return emp.as_function("empirical_reference");
}

}  // namespace

int cmd_distance_ball(const RunConfig& run) {
    const Config cfg = load_config(run, true);
    const auto marginals = parse_marginals(cfg, cfg.doc);
    const std::size_t dim = marginals.size();
    if (dim < 2) throw ConfigError("config field 'marginals' needs at least two entries");
    const AggregationKind agg = parse_aggregation(cfg, AggregationKind::Max);
    if (agg == AggregationKind::Sum) throw ConfigError("config field 'aggregation': distance balls support max or min");
    const auto levels = levels_of(cfg);
    const json* bj = find(cfg.doc, "ball");
    const json empty = json::object();
    const json& ball_cfg = bj ? *bj : empty;
    const DistanceSpec distance = parse_distance(ball_cfg, "ball");
    std::vector<double> deltas = find(ball_cfg, "deltas") ? numbers(ball_cfg, "deltas", "ball")
                                                          : std::vector<double>{number(ball_cfg, "delta", "ball")};
    for (double d : deltas)
        if (!(d >= 0.0)) throw ConfigError("config field 'ball.delta' must be nonnegative");
    const double tol = number(cfg.doc, "tolerance", "", 1e-9);
    const double ball_tol = number(ball_cfg, "tol", "ball", 1e-6);
    json meta_base;
    const auto reference = parse_reference(cfg, dim, master_seed(run, cfg, 0), meta_base);
    const auto bracket = bracket_for(marginals);
    const auto W = lower_frechet_copula(dim), M = upper_frechet_copula(dim);
    const Prescription none(dim);
    const SurvivalFn f_lo(dim, "fh_survival_lower", [none](Point u) { return improved_fh_survival(none, u).lower; });
    const SurvivalFn f_hi(dim, "fh_survival_upper", [none](Point u) { return improved_fh_survival(none, u).upper; });

    auto out = open_output(run, "distance_ball.csv");
    out << "level,delta,unc_lo,unc_hi,imp_lo,imp_hi,impr_pct,display,meta_json\n";
    for (double delta : deltas) {
        const DistanceBall ball{reference, distance, delta};
        std::function<DfBounds(double)> improved, plain;
        const bool ks = distance.kind == DistanceKind::KolmogorovSmirnov;
        if (agg == AggregationKind::Max) {
            const QuasiCopulaFn lo = ks ? ks_ball_lower_fn(ball)
                                        : QuasiCopulaFn::from_function(dim, "ball_lower", [ball, ball_tol](Point u) {
                                              return distance_ball_lower(ball, u, ball_tol);
                                          });
            const QuasiCopulaFn hi = ks ? ks_ball_upper_fn(ball)
                                        : QuasiCopulaFn::from_function(dim, "ball_upper", [ball, ball_tol](Point u) {
                                              return distance_ball_upper(ball, u, ball_tol);
                                          });
            improved = [=](double s) { return max_aggregation_bounds(marginals, lo, hi, s); };
            plain = [=](double s) { return max_aggregation_bounds(marginals, W, M, s); };
        } else {
            std::function<Interval(Point)> env;
            if (ks) {
                env = [ball, dim](Point u) {
                    std::vector<double> v(dim);
                    for (std::size_t i = 0; i < dim; ++i) v[i] = 1.0 - u[i];
                    const double c = survival(ball.reference, u);
                    return Interval{std::max(c - ball.radius, frechet_lower(v)), std::min(c + ball.radius, frechet_upper(v))};
                };
            } else {
                env = [ball, ball_tol](Point u) { return distance_ball_survival(ball, u, ball_tol); };
            }
            const SurvivalFn s_lo(dim, "ball_survival_lower", [env](Point u) { return env(u).lower; });
            const SurvivalFn s_hi(dim, "ball_survival_upper", [env](Point u) { return env(u).upper; });
            improved = [=](double s) { return min_aggregation_bounds(marginals, s_lo, s_hi, s); };
            plain = [=](double s) { return min_aggregation_bounds(marginals, f_lo, f_hi, s); };
        }
        for (double alpha : levels) {
            const auto unc = var_interval_from_df(plain, alpha, bracket, tol);
            const auto imp = var_interval_from_df(improved, alpha, bracket, tol);
            json meta = meta_base;
            meta["aggregation"] = to_string(agg);
            meta["distance"] = ks ? "ks" : distance.kind == DistanceKind::CramerVonMises ? "cvm" : "lp";
            meta["grid"] = distance.grid;
            meta["p"] = distance.p;
            meta["tolerance"] = tol;
            out << format_number(alpha) << ',' << format_number(delta) << ',' << format_number(unc.low) << ','
                << format_number(unc.high) << ',' << format_number(imp.low) << ',' << format_number(imp.high) << ','
                << format_number(improvement_percent(unc.low, unc.high, imp.low, imp.high)) << ','
                << csv_quote("(" + display(imp.low) + " : " + display(imp.high) + ")") << ',' << csv_quote(meta.dump())
                << '\n';
        }
    }
    return kExitOk;
}

namespace {

// Laws of the partial maxima/minima of Pareto-type risks under a t copula.
Marginal simulate_subset_law(const std::vector<Marginal>& marginals, const std::vector<std::size_t>& subset,
                             ExtremalMode mode, double rho, double nu, std::size_t n, std::uint64_t seed) {
    if (subset.size() == 1) return marginals[subset[0]];
    std::mt19937_64 rng(seed);
    const auto u = sample_t_copula_uniforms(TCopulaSpec{subset.size(), rho, nu}, n, rng);
    std::vector<double> values(n);
    const std::size_t d = subset.size();
    for (std::size_t k = 0; k < n; ++k) {
        double e = marginals[subset[0]].quantile(u[k * d]);
        for (std::size_t i = 1; i < d; ++i) {
            const double x = marginals[subset[i]].quantile(u[k * d + i]);
            e = mode == ExtremalMode::Max ? std::max(e, x) : std::min(e, x);
        }
        values[k] = e;
    }
    return empirical_from_simulation(std::move(values));
}

}  // namespace

int cmd_extremal(const RunConfig& run) {
    const Config cfg = load_config(run, true);
    const auto marginals = parse_marginals(cfg, cfg.doc);
    const std::size_t dim = marginals.size();
    const auto levels = levels_of(cfg);
    const std::uint64_t seed = master_seed(run, cfg, 0);
    const std::string mode_name = text(cfg.doc, "mode", "", std::string("max"));
    if (mode_name != "max" && mode_name != "min") throw ConfigError("config field 'mode' must be max or min");
    const ExtremalMode mode = mode_name == "max" ? ExtremalMode::Max : ExtremalMode::Min;

    const json* sj = find(cfg.doc, "subsets");
    if (!sj || !sj->is_array()) throw ConfigError("config field 'subsets' must be an array of index arrays");
    std::vector<std::vector<std::size_t>> subsets;
    for (std::size_t n = 0; n < sj->size(); ++n) {
        const json& s = (*sj)[n];
        const std::string where = "subsets[" + std::to_string(n) + "]";
        if (!s.is_array() || s.empty()) throw ConfigError("config field '" + where + "' must be a nonempty index array");
        std::vector<std::size_t> j;
        for (const auto& v : s) {
            if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > static_cast<long long>(dim))
                throw ConfigError("config field '" + where + "' holds an index outside 1.." + std::to_string(dim));
            j.push_back(v.get<std::size_t>() - 1);
        }
        subsets.push_back(std::move(j));
    }

    const std::string attach = text(cfg.doc, "attach", "", std::string("simulate"));
    std::vector<Marginal> laws;
    json meta_base = {{"attach", attach}, {"mode", mode_name}};
    if (attach == "simulate") {
        const json* simj = find(cfg.doc, "simulate");
        const json empty = json::object();
        const json& sim = simj ? *simj : empty;
        const double rho = subsets.empty() ? 0.0 : number(sim, "rho", "simulate");
        const double nu = number(sim, "nu", "simulate", 2.0);
        const std::size_t n = count(sim, "samples", "simulate", 1000000);
        meta_base["rho"] = rho;
        meta_base["nu"] = nu;
        meta_base["samples"] = n;
        for (std::size_t k = 0; k < subsets.size(); ++k) {
            try {
                laws.push_back(simulate_subset_law(marginals, subsets[k], mode, rho, nu, n, seed + 1000 + k));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("config field 'simulate': ") + e.what());
            }
        }
    } else if (attach == "file") {
        laws = parse_marginals(cfg, cfg.doc, "laws");
        if (laws.size() != subsets.size()) throw ConfigError("config field 'laws' needs one law per subset");
    } else {
        throw ConfigError("config field 'attach' must be simulate or file");
    }
    SubsetSystem sys(dim, subsets, mode, laws);
    const std::size_t added = sys.add_singletons(marginals);
    if (added) note(run, "added " + std::to_string(added) + " singleton subsets");

    const RaConfig ra = parse_ra(cfg, seed, 5);
    const json* searchj = find(cfg.doc, "search");
    const json empty = json::object();
    const json& sc = searchj ? *searchj : empty;
    SearchConfig search;
    search.candidates = count(sc, "candidates", "search", 200);
    search.polish_rounds = count(sc, "polish_rounds", "search", 3);
    search.screen_N = count(sc, "screen_N", "search", 1000);
    search.finalists = count(sc, "finalists", "search", 3);
    search.ra = ra;
    search.ra.restarts = 1;
    search.ra.dump_dir.clear();
    search.var_tol = number(cfg.doc, "tolerance", "", 1e-9);
    search.threads = resolve_threads(run.threads);
    const std::string inner_name = text(sc, "inner", "search", std::string("ra"));
    if (inner_name != "ra" && inner_name != "standard") throw ConfigError("config field 'search.inner' must be ra or standard");
    const InnerSolver inner = inner_name == "ra" ? InnerSolver::RA : InnerSolver::StandardBounds;
    // one-sided results when a sign condition of the theorems does not hold
    search.compute_lower = flag(sc, "lower", "search", true);
    search.compute_upper = flag(sc, "upper", "search", true);

    auto out = open_output(run, "extremal.csv");
    out << "level,unc_lo,unc_hi,imp_lo,imp_hi,impr_pct,display,meta_json\n";
    bool all_converged = true;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const double alpha = levels[l];
        search.seed = seed + 100 * (l + 1);
        const auto worst = ra_var_upper(marginals, alpha, ra);
        const auto best = ra_var_lower(marginals, alpha, ra);
        ReducedVar red;
        try {
            red = reduced_var(sys, alpha, inner, search);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        const double unc_lo = best.lower_part.value, unc_hi = worst.upper_part.value;
        const bool converged = worst.converged() && best.converged() && red.lower.converged && red.upper.converged;
        all_converged = all_converged && converged;
        json meta = meta_base;
        meta["N"] = ra.N;
        meta["restarts"] = ra.restarts;
        meta["ra_seed"] = ra.seed;
        meta["search_seed"] = search.seed;
        meta["inner"] = inner_name;
        meta["candidates"] = {{"lower", red.lower.candidates}, {"upper", red.upper.candidates}};
        meta["evaluations"] = {{"lower", red.lower.evaluations}, {"upper", red.upper.evaluations}};
        meta["weights_lower"] = red.lower.weights;
        meta["weights_upper"] = red.upper.weights;
        meta["subsets"] = sys.subsets();
        meta["converged"] = converged;
        meta["label"] = red.label;
        out << format_number(alpha) << ',' << format_number(unc_lo) << ',' << format_number(unc_hi) << ','
            << format_number(red.var.low) << ',' << format_number(red.var.high) << ','
            << format_number(improvement_percent(unc_lo, unc_hi, red.var.low, red.var.high)) << ','
            << csv_quote("(" + display(red.var.low) + " : " + display(red.var.high) + ")") << ','
            << csv_quote(meta.dump()) << '\n';
    }
    require_convergence(run, all_converged, "rearrangement");
    return kExitOk;
}

int cmd_reproduce(const RunConfig& run) {
    const ScenarioId id = scenario_from_string(run.table);
    if (id == ScenarioId::Custom) throw ConfigError("reproduce expects table1, table2 or table3");
    const Config cfg = load_config(run, false);
    ScenarioSpec spec = default_spec(id);
    spec.seed = master_seed(run, cfg, spec.seed);
    spec.threads = resolve_threads(run.threads);
    if (const json* sj = find(cfg.doc, "scenario")) {
        const std::string where = "scenario";
        spec.levels = numbers(*sj, "levels", where, spec.levels);
        spec.rhos = numbers(*sj, "rhos", where, spec.rhos);
        spec.deltas = numbers(*sj, "deltas", where, spec.deltas);
        spec.nu = number(*sj, "nu", where, spec.nu);
        spec.mc_samples = count(*sj, "mc_samples", where, spec.mc_samples);
        spec.ra.N = count(*sj, "N", where, spec.ra.N);
        spec.ra.restarts = count(*sj, "restarts", where, spec.ra.restarts);
        spec.search.ra.N = spec.ra.N;
        spec.search.candidates = count(*sj, "candidates", where, spec.search.candidates);
        spec.search.polish_rounds = count(*sj, "polish_rounds", where, spec.search.polish_rounds);
        spec.search.screen_N = count(*sj, "screen_N", where, spec.search.screen_N);
    }
    spec.search.threads = 1;  // rows are already spread over the workers
    const auto start = std::chrono::steady_clock::now();
    ScenarioResult result = run_scenario(spec);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& w : result.warnings) note(run, "warning: " + w);

    const std::string name = to_string(id);
    write_csv(result, run.out_dir / (name + ".csv"));
    write_sidecar(result, run.out_dir / (name + ".json"));
    const auto checks = compare_with_published(result);
    write_comparison_csv(checks, run.out_dir / (name + "_comparison.csv"));

    std::size_t targets = 0, passed = 0;
    for (const auto& c : checks)
        if (c.target) {
            ++targets;
            passed += c.pass ? 1 : 0;
        }
    if (run.verbosity < 0) {
        require_convergence(run, result.converged, "rearrangement");
        return kExitOk;
    }
    std::cout << name << ": " << result.rows.size() << " rows, " << passed << "/" << targets
              << " published cells within tolerance";
    char buf[64];
    std::snprintf(buf, sizeof buf, " (%.1f s)\n", seconds);
    std::cout << buf;
    for (const auto& row : result.rows)
        std::cout << "  " << display(row.level * 100) << "%  " << row.meta.value("display", std::string()) << "  "
                  << display(row.impr_pct) << "%\n";
    require_convergence(run, result.converged, "rearrangement");
    return kExitOk;
}

int execute(const RunConfig& run) {
    try {
        if (run.subcommand == "standard") return cmd_standard(run);
        if (run.subcommand == "prescription") return cmd_prescription(run);
        if (run.subcommand == "distance-ball") return cmd_distance_ball(run);
        if (run.subcommand == "extremal") return cmd_extremal(run);
        if (run.subcommand == "reproduce") return cmd_reproduce(run);
        throw ConfigError("unknown subcommand '" + run.subcommand + "'");
    } catch (const ConfigError& e) {
        std::cerr << "depbound: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InfeasibleError& e) {
        std::cerr << "depbound: infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const ConvergenceError& e) {
        std::cerr << "depbound: not converged: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const std::exception& e) {
        std::cerr << "depbound: error: " << e.what() << '\n';
        return kExitFailure;
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Bounds on Value-at-Risk under partial dependence information"};
    app.require_subcommand(1);
    RunConfig run;
    std::uint64_t seed = 0;
    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", run.config, "JSON run configuration");
        if (config_required) opt->required();
        sub->add_option("--out", run.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_flag("--strict", run.strict, "exit with code 4 when a solver hits its iteration cap");
        sub->add_option("--threads", run.threads, "worker threads (fallback: DEPBOUND_THREADS)");
        sub->add_flag("-q,--quiet", [&](std::int64_t) { run.verbosity = -1; }, "suppress diagnostics");
    };
    add_common(app.add_subcommand("standard", "marginals-only VaR bounds for a sum"), true);
    add_common(app.add_subcommand("prescription", "improved bounds from prescribed copula values"), true);
    add_common(app.add_subcommand("distance-ball", "bounds over a distance ball around a reference copula"), true);
    add_common(app.add_subcommand("extremal", "bounds from laws of partial maxima or minima"), true);
    auto* reproduce = app.add_subcommand("reproduce", "recompute one of the published tables");
    reproduce->add_option("table", run.table, "table1, table2 or table3")
        ->required()
        ->check(CLI::IsMember({"table1", "table2", "table3"}));
    add_common(reproduce, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    for (auto* sub : app.get_subcommands()) {
        run.subcommand = sub->get_name();
        if (sub->count("--seed")) run.seed = seed;
    }
    return execute(run);
}

}  // namespace depbound

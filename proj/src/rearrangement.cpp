#include "depbound/rearrangement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace depbound {

void validate(const RaConfig& cfg) {
    if (cfg.N < 2) throw std::invalid_argument("rearrangement needs N >= 2 rows");
    if (cfg.max_sweeps < 1) throw std::invalid_argument("rearrangement needs max_sweeps >= 1");
    if (cfg.restarts < 1) throw std::invalid_argument("rearrangement needs at least one restart");
}

std::vector<double> RaMatrix::row_sums() const {
    std::vector<double> sums(rows(), 0.0);
    for (const auto& col : columns)
        for (std::size_t k = 0; k < col.size(); ++k) sums[k] += col[k];
    return sums;
}

double RaMatrix::objective(RaObjective obj) const {
    const auto sums = row_sums();
    return obj == RaObjective::MinRowSum ? *std::min_element(sums.begin(), sums.end())
                                         : *std::max_element(sums.begin(), sums.end());
}

RaMatrix build_ra_matrix(const std::vector<Marginal>& marginals, double level, DiscretizationPart part,
                         RaObjective obj, const RaConfig& cfg) {
    validate(cfg);
    if (marginals.size() < 2) throw std::invalid_argument("rearrangement needs at least two marginals");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("rearrangement: level must lie in (0, 1)");
    const ProbabilityRange range = obj == RaObjective::MinRowSum ? ProbabilityRange{level, 1.0} : ProbabilityRange{0.0, level};
    RaMatrix m;
    m.part = part;
    m.level = level;
    m.columns.reserve(marginals.size());
    for (const auto& marg : marginals) m.columns.push_back(discretize(marg, cfg.N, part, range, cfg.clip).values);
    return m;
}

void shuffle_columns(RaMatrix& m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& col : m.columns) std::shuffle(col.begin(), col.end(), rng);
}

namespace {

// One pass over all columns; returns the number of entries that changed.
std::size_t sweep(RaMatrix& m, std::vector<double>& sums, std::vector<std::size_t>& order,
                  std::vector<double>& complement, std::vector<double>& sorted) {
    const std::size_t n = m.rows();
    std::size_t changes = 0;
    for (auto& col : m.columns) {
        for (std::size_t k = 0; k < n; ++k) complement[k] = sums[k] - col[k];
        std::iota(order.begin(), order.end(), std::size_t{0});
        // tied complements keep their current values, so ties cannot cycle
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (complement[a] != complement[b]) return complement[a] < complement[b];
            if (col[a] != col[b]) return col[a] > col[b];
            return a < b;
        });
        sorted = col;
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t k = order[r];
            if (col[k] != sorted[r]) {
                col[k] = sorted[r];
                ++changes;
            }
            sums[k] = complement[k] + col[k];
        }
    }
    return changes;
}

}  // namespace

void rearrange(RaMatrix& m, RaObjective obj, const RaConfig& cfg, const std::function<void(const RaMatrix&)>& on_sweep) {
    m.converged = false;
    m.iterations = 0;
    if (m.cols() <= 1) {
        m.converged = true;
        return;
    }
    const std::size_t n = m.rows();
    std::vector<std::size_t> order(n);
    std::vector<double> complement(n), sorted(n);
    double previous = m.objective(obj);
    while (m.iterations < cfg.max_sweeps) {
        auto sums = m.row_sums();
        const std::size_t changes = sweep(m, sums, order, complement, sorted);
        ++m.iterations;
        if (on_sweep) on_sweep(m);
        const double current = m.objective(obj);
        const double gain = obj == RaObjective::MinRowSum ? current - previous : previous - current;
        previous = current;
        // a flat objective alone can hide rows that are still out of order
        if (changes == 0 || (std::abs(gain) < cfg.objective_tol && is_antitonic(m))) {
            m.converged = true;
            return;
        }
    }
}

bool is_antitonic(const RaMatrix& m) {
    if (m.cols() <= 1) return true;
    const auto sums = m.row_sums();
    const std::size_t n = m.rows();
    std::vector<std::size_t> order(n);
    for (const auto& col : m.columns) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::vector<double> complement(n);
        for (std::size_t k = 0; k < n; ++k) complement[k] = sums[k] - col[k];
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return complement[a] < complement[b]; });
        // along increasing complement sums the column must not increase, up to rounding in the complements
        for (std::size_t r = 1; r < n; ++r) {
            const std::size_t a = order[r - 1], b = order[r];
            const double slack = 1e-9 * std::max(1.0, std::abs(complement[b]));
            if (col[b] > col[a] && complement[b] - complement[a] > slack) return false;
        }
    }
    return true;
}

void save_matrix_csv(const RaMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(17);
    for (std::size_t k = 0; k < m.rows(); ++k) {
        for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m.columns[j][k];
        out << '\n';
    }
}

namespace {

RaRun run_part(const std::vector<Marginal>& marginals, double level, DiscretizationPart part, RaObjective obj,
               const RaConfig& cfg, std::uint64_t seed) {
    RaMatrix m = build_ra_matrix(marginals, level, part, obj, cfg);
    shuffle_columns(m, seed);
    rearrange(m, obj, cfg);
    if (!cfg.dump_dir.empty()) {
        std::filesystem::create_directories(cfg.dump_dir);
        std::ostringstream name;
        name << "ra_" << (obj == RaObjective::MinRowSum ? "worst" : "best") << "_"
             << (part == DiscretizationPart::Lower ? "lower" : "upper") << "_" << std::setprecision(6) << level << "_s"
             << seed << ".csv";
        save_matrix_csv(m, cfg.dump_dir / name.str());
    }
    return {m.objective(obj), m.converged, m.iterations};
}

RaResult run_both_parts(const std::vector<Marginal>& marginals, double level, RaObjective obj, const RaConfig& cfg) {
    validate(cfg);
    RaResult out;
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        const std::uint64_t seed = cfg.seed + r;
        const RaRun lower = run_part(marginals, level, DiscretizationPart::Lower, obj, cfg, seed);
        const RaRun upper = run_part(marginals, level, DiscretizationPart::Upper, obj, cfg, seed);
        if (r == 0) {
            out.lower_part = lower;
            out.upper_part = upper;
            continue;
        }
        // widest bracket over the restarts
        out.lower_part.value = std::min(out.lower_part.value, lower.value);
        out.upper_part.value = std::max(out.upper_part.value, upper.value);
        out.lower_part.converged = out.lower_part.converged && lower.converged;
        out.upper_part.converged = out.upper_part.converged && upper.converged;
        out.lower_part.sweeps = std::max(out.lower_part.sweeps, lower.sweeps);
        out.upper_part.sweeps = std::max(out.upper_part.sweeps, upper.sweeps);
    }
    return out;
}

}  // namespace

RaResult ra_var_upper(const std::vector<Marginal>& marginals, double level, const RaConfig& cfg) {
    return run_both_parts(marginals, level, RaObjective::MinRowSum, cfg);
}

RaResult ra_var_lower(const std::vector<Marginal>& marginals, double level, const RaConfig& cfg) {
    return run_both_parts(marginals, level, RaObjective::MaxRowSum, cfg);
}

VarInterval ra_var_interval(const std::vector<Marginal>& marginals, double level, const RaConfig& cfg) {
    return {level, ra_var_lower(marginals, level, cfg).lower_part.value, ra_var_upper(marginals, level, cfg).upper_part.value};
}

DfBounds ra_df_bounds(const std::vector<Marginal>& marginals, double s, const RaConfig& cfg) {
    validate(cfg);
    double min_sum = 0.0, max_sum = 0.0;
    bool bounded = true;
    for (const auto& m : marginals) {
        min_sum += m.support_min();
        if (m.bounded_above()) max_sum += m.support_max();
        else bounded = false;
    }
    if (s < min_sum) return {0.0, 0.0};
    if (bounded && s >= max_sum) return {1.0, 1.0};
    constexpr int kDepth = 20;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < kDepth; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ra_var_upper(marginals, mid, cfg).upper_part.value <= s) lo = mid;
        else hi = mid;
    }
    DfBounds out;
    out.lower = lo;
    lo = 0.0;
    hi = 1.0;
    for (int it = 0; it < kDepth; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ra_var_lower(marginals, mid, cfg).lower_part.value > s) hi = mid;
        else lo = mid;
    }
    out.upper = hi;
    return out;
}

}  // namespace depbound

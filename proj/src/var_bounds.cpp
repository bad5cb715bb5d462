#include "depbound/var_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace depbound {

const char* to_string(AggregationKind kind) {
    switch (kind) {
        case AggregationKind::Sum: return "sum";
        case AggregationKind::Max: return "max";
        case AggregationKind::Min: return "min";
    }
    return "?";
}

namespace {

std::size_t default_lattice(std::size_t d) {
    if (d <= 3) return 64;
    if (d <= 8) return 16;
    return 6;
}

// Calls visit(k) for every composition k of total into k.size() nonnegative parts.
template <class Visit>
void for_each_composition(std::vector<std::size_t>& k, std::size_t pos, std::size_t remaining, Visit&& visit) {
    if (pos + 1 == k.size()) {
        k[pos] = remaining;
        visit(k);
        return;
    }
    for (std::size_t v = 0; v <= remaining; ++v) {
        k[pos] = v;
        for_each_composition(k, pos + 1, remaining - v, visit);
    }
}

struct Candidate {
    double value;
    std::vector<double> x;
};

}  // namespace

HyperplaneResult optimize_hyperplane(const std::vector<double>& lo, double s,
                                     const std::function<double(std::span<const double>)>& f, bool maximize,
                                     const HyperplaneConfig& cfg) {
    const std::size_t d = lo.size();
    if (d == 0) throw std::invalid_argument("optimize_hyperplane: empty dimension");
    const double sign = maximize ? 1.0 : -1.0;
    HyperplaneResult out;
    auto score = [&](std::span<const double> x) {
        ++out.evaluations;
        return sign * f(x);
    };

    const double base = std::accumulate(lo.begin(), lo.end(), 0.0);
    const double slack = s - base;
    if (slack <= 0.0 || d == 1) {
        // no room to move: the only candidates sit on (or below) the lower corner
        out.best_point = lo;
        for (double& v : out.best_point) v += slack / static_cast<double>(d);
        out.value = sign * score(out.best_point);
        return out;
    }

    const std::size_t K = cfg.lattice ? cfg.lattice : default_lattice(d);
    const std::size_t keep = std::max<std::size_t>(1, cfg.polish_starts);
    std::vector<Candidate> best;  // sorted by descending score
    std::vector<std::size_t> k(d);
    std::vector<double> x(d);
    for_each_composition(k, 0, K, [&](const std::vector<std::size_t>& comp) {
        for (std::size_t i = 0; i < d; ++i) x[i] = lo[i] + slack * static_cast<double>(comp[i]) / static_cast<double>(K);
        const double v = score(x);
        if (best.size() < keep || v > best.back().value) {
            Candidate c{v, x};
            auto it = std::upper_bound(best.begin(), best.end(), c,
                                       [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
            best.insert(it, std::move(c));
            if (best.size() > keep) best.pop_back();
        }
    });

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (auto& cand : best) {
        for (std::size_t round = 0; round < cfg.polish_rounds; ++round) {
            bool moved = false;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    if (i == j) continue;
                    // move mass t from coordinate j to coordinate i
                    double a = 0.0, b = cand.x[j] - lo[j];
                    if (b <= 0.0) continue;
                    std::vector<double> y = cand.x;
                    auto along = [&](double t) {
                        y[i] = cand.x[i] + t;
                        y[j] = cand.x[j] - t;
                        return score(y);
                    };
                    double c = b - inv_phi * (b - a), e = a + inv_phi * (b - a);
                    double fc = along(c), fe = along(e);
                    for (std::size_t it = 0; it < cfg.golden_iterations; ++it) {
                        if (fc >= fe) {
                            b = e;
                            e = c;
                            fe = fc;
                            c = b - inv_phi * (b - a);
                            fc = along(c);
                        } else {
                            a = c;
                            c = e;
                            fc = fe;
                            e = a + inv_phi * (b - a);
                            fe = along(e);
                        }
                    }
                    const double t_best = fc >= fe ? c : e;
                    const double f_best = std::max(fc, fe);
                    const double f_end = along(cand.x[j] - lo[j]);
                    double t = t_best, ft = f_best;
                    if (f_end > ft) {
                        t = cand.x[j] - lo[j];
                        ft = f_end;
                    }
                    if (ft > cand.value) {
                        cand.x[i] += t;
                        cand.x[j] -= t;
                        // re-evaluate at the stored point so the value is exactly attained
                        cand.value = score(cand.x);
                        moved = true;
                    }
                }
            if (!moved) break;
        }
    }
    const auto top = std::max_element(best.begin(), best.end(),
                                      [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
    out.value = sign * top->value;
    out.best_point = top->x;
    return out;
}

namespace {

std::vector<double> lower_ends(const std::vector<Marginal>& marginals) {
    std::vector<double> lo;
    lo.reserve(marginals.size());
    for (const auto& m : marginals) lo.push_back(m.support_min());
    return lo;
}

void require_dim(const std::vector<Marginal>& marginals, std::size_t min_dim) {
    if (marginals.size() < min_dim)
        throw std::invalid_argument("need at least " + std::to_string(min_dim) + " marginals");
}

std::vector<double> cdf_at(const std::vector<Marginal>& marginals, double s) {
    std::vector<double> u;
    u.reserve(marginals.size());
    for (const auto& m : marginals) u.push_back(m.cdf(s));
    return u;
}

}  // namespace

StandardBounds standard_bounds_sum(const std::vector<Marginal>& marginals, double s, const HyperplaneConfig& cfg) {
    require_dim(marginals, 2);
    const auto lo = lower_ends(marginals);
    const double d = static_cast<double>(marginals.size());
    StandardBounds out;
    if (s < std::accumulate(lo.begin(), lo.end(), 0.0)) {
        // the sum cannot fall below the sum of the lower support ends
        out.lower.best_point = out.upper.best_point = lo;
        return out;
    }
    out.lower = optimize_hyperplane(
        lo, s,
        [&](std::span<const double> x) {
            double v = marginals[0].left_cdf(x[0]);
            for (std::size_t i = 1; i < x.size(); ++i) v += marginals[i].cdf(x[i]);
            return v - d + 1.0;
        },
        true, cfg);
    out.lower.value = std::max(out.lower.value, 0.0);
    out.upper = optimize_hyperplane(
        lo, s,
        [&](std::span<const double> x) {
            double v = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) v += marginals[i].left_cdf(x[i]);
            return v;
        },
        false, cfg);
    out.upper.value = std::min(out.upper.value, 1.0);
    return out;
}

double improved_standard_lower(AggregationKind kind, const std::vector<Marginal>& marginals, const QuasiCopulaFn& q0,
                               double s, const HyperplaneConfig& cfg) {
    require_dim(marginals, 2);
    if (q0.dim() != marginals.size()) throw std::invalid_argument("improved_standard_lower: dimension mismatch");
    switch (kind) {
        case AggregationKind::Max: return q0(cdf_at(marginals, s));
        case AggregationKind::Min: throw std::invalid_argument("improved lower bound for min: use survival variant");
        case AggregationKind::Sum: break;
    }
    std::vector<double> u(marginals.size());
    const auto res = optimize_hyperplane(
        lower_ends(marginals), s,
        [&](std::span<const double> x) {
            for (std::size_t i = 0; i < x.size(); ++i) u[i] = marginals[i].cdf(x[i]);
            return q0(u);
        },
        true, cfg);
    return std::clamp(res.value, 0.0, 1.0);
}

double improved_standard_upper(AggregationKind kind, const std::vector<Marginal>& marginals, const SurvivalFn& s1,
                               double s, const HyperplaneConfig& cfg) {
    require_dim(marginals, 2);
    if (s1.dim() != marginals.size()) throw std::invalid_argument("improved_standard_upper: dimension mismatch");
    switch (kind) {
        case AggregationKind::Min: return std::clamp(1.0 - s1(cdf_at(marginals, s)), 0.0, 1.0);
        case AggregationKind::Max:
            throw std::invalid_argument("improved upper bound for max takes a copula upper bound, not a survival bound");
        case AggregationKind::Sum: break;
    }
    const auto lo = lower_ends(marginals);
    if (s < std::accumulate(lo.begin(), lo.end(), 0.0)) return 0.0;
    std::vector<double> u(marginals.size());
    const auto res = optimize_hyperplane(
        lo, s,
        [&](std::span<const double> x) {
            for (std::size_t i = 0; i < x.size(); ++i) u[i] = marginals[i].left_cdf(x[i]);
            return 1.0 - s1(u);
        },
        false, cfg);
    return std::clamp(res.value, 0.0, 1.0);
}

double improved_standard_upper(AggregationKind kind, const std::vector<Marginal>& marginals,
                               const QuasiCopulaFn& q_upper, double s) {
    require_dim(marginals, 2);
    if (kind != AggregationKind::Max)
        throw std::invalid_argument("a copula upper bound yields the improved upper bound only for max");
    if (q_upper.dim() != marginals.size()) throw std::invalid_argument("improved_standard_upper: dimension mismatch");
    return q_upper(cdf_at(marginals, s));
}

DfBounds max_aggregation_bounds(const std::vector<Marginal>& marginals, const QuasiCopulaFn& q_lower,
                                const QuasiCopulaFn& q_upper, double s) {
    require_dim(marginals, 2);
    const auto u = cdf_at(marginals, s);
    return {q_lower(u), q_upper(u)};
}

DfBounds min_aggregation_bounds(const std::vector<Marginal>& marginals, const SurvivalFn& s_lower,
                                const SurvivalFn& s_upper, double s) {
    require_dim(marginals, 2);
    const auto u = cdf_at(marginals, s);
    return {1.0 - s_upper(u), 1.0 - s_lower(u)};
}

double invert_to_var(const BoundFunction& b, double alpha, double tol) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("invert_to_var: level must lie in (0, 1)");
    if (!(tol > 0.0)) throw std::invalid_argument("invert_to_var: tolerance must be positive");
    double lo = b.s_min;
    if (b.eval(lo) > alpha) return lo;
    double width = std::max(b.s_max - b.s_min, 1.0);
    double hi = lo + width;
    int doublings = 0;
    while (!(b.eval(hi) > alpha)) {
        if (++doublings > 60) throw std::runtime_error("level unattainable on bracket");
        lo = hi;
        width *= 2.0;
        hi = b.s_min + width;
    }
    while (hi - lo > tol * std::max(1.0, std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (b.eval(mid) > alpha) hi = mid;
        else lo = mid;
    }
    return hi;
}

std::pair<double, double> default_bracket(const std::vector<Marginal>& marginals) {
    double lo = 0.0, hi = 0.0;
    for (const auto& m : marginals) {
        lo += std::min(0.0, m.support_min());
        hi += m.quantile(1.0 - 1e-6);
    }
    return {lo, std::max(hi, lo + 1.0)};
}

VarInterval standard_var_bounds(const std::vector<Marginal>& marginals, double alpha, double tol,
                                const HyperplaneConfig& cfg) {
    const auto [a, b] = default_bracket(marginals);
    BoundFunction upper_df{[&](double s) { return standard_bounds_sum(marginals, s, cfg).upper.value; },
                           BoundDirection::UpperDf, a, b};
    BoundFunction lower_df{[&](double s) { return standard_bounds_sum(marginals, s, cfg).lower.value; },
                           BoundDirection::LowerDf, a, b};
    return {alpha, invert_to_var(upper_df, alpha, tol), invert_to_var(lower_df, alpha, tol)};
}

VarInterval var_interval_from_df(const std::function<DfBounds(double)>& df, double alpha,
                                 std::pair<double, double> bracket, double tol) {
    BoundFunction upper_df{[&](double s) { return df(s).upper; }, BoundDirection::UpperDf, bracket.first, bracket.second};
    BoundFunction lower_df{[&](double s) { return df(s).lower; }, BoundDirection::LowerDf, bracket.first, bracket.second};
    return {alpha, invert_to_var(upper_df, alpha, tol), invert_to_var(lower_df, alpha, tol)};
}

}  // namespace depbound

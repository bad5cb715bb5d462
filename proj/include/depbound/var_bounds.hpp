#pragma once

#include <functional>
#include <vector>

#include "depbound/copula.hpp"
#include "depbound/marginals.hpp"

namespace depbound {

enum class AggregationKind { Sum, Max, Min };

const char* to_string(AggregationKind kind);

enum class BoundDirection { LowerDf, UpperDf };

/// Nondecreasing bound on s -> P(phi(X) <= s) with an initial search bracket.
struct BoundFunction {
    std::function<double(double)> eval;
    BoundDirection direction = BoundDirection::LowerDf;
    double s_min = 0.0;
    double s_max = 1.0;
};

struct VarInterval {
    double level = 0.0;
    double low = 0.0;
    double high = 0.0;
};

struct DfBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Multi-start search over the hyperplane x_1 + ... + x_d = s.
struct HyperplaneConfig {
    std::size_t lattice = 0;        // points per axis of the start lattice; 0 picks by dimension
    std::size_t polish_starts = 4;
    std::size_t polish_rounds = 3;
    std::size_t golden_iterations = 48;
};

struct HyperplaneResult {
    double value = 0.0;
    std::size_t evaluations = 0;
    std::vector<double> best_point;
};

/// Maximizes (or minimizes) f over {x : sum x = s, x_i >= lo_i}. The reported
/// value is f at the returned point, so it is attained and one-sided.
HyperplaneResult optimize_hyperplane(const std::vector<double>& lo, double s,
                                     const std::function<double(std::span<const double>)>& f, bool maximize,
                                     const HyperplaneConfig& cfg = {});

struct StandardBounds {
    HyperplaneResult lower;
    HyperplaneResult upper;
    DfBounds df() const { return {lower.value, upper.value}; }
};

/// Marginals-only bounds on P(X_1 + ... + X_d <= s).
StandardBounds standard_bounds_sum(const std::vector<Marginal>& marginals, double s, const HyperplaneConfig& cfg = {});

/// Lower DF bound from a componentwise nondecreasing lower bound Q0 on the copula.
/// Throws for Min, which needs the survival form.
double improved_standard_lower(AggregationKind kind, const std::vector<Marginal>& marginals, const QuasiCopulaFn& q0,
                               double s, const HyperplaneConfig& cfg = {});

/// Upper DF bound from a lower bound on the survival function (Sum, Min).
double improved_standard_upper(AggregationKind kind, const std::vector<Marginal>& marginals, const SurvivalFn& s1,
                               double s, const HyperplaneConfig& cfg = {});
/// Upper DF bound for Max from a pointwise upper bound on the copula.
double improved_standard_upper(AggregationKind kind, const std::vector<Marginal>& marginals,
                               const QuasiCopulaFn& q_upper, double s);

/// Max: (Q_lower(F(s)), Q_upper(F(s))).
DfBounds max_aggregation_bounds(const std::vector<Marginal>& marginals, const QuasiCopulaFn& q_lower,
                                const QuasiCopulaFn& q_upper, double s);
/// Min: (1 - S_upper(F(s)), 1 - S_lower(F(s))) for a pair of survival bounds.
DfBounds min_aggregation_bounds(const std::vector<Marginal>& marginals, const SurvivalFn& s_lower,
                                const SurvivalFn& s_upper, double s);

/// inf{s : B(s) > alpha}, bracket doubled up to 60 times until B(s_max) > alpha.
double invert_to_var(const BoundFunction& b, double alpha, double tol = 1e-9);

/// Initial bracket [min(0, sum of lower support ends), sum of quantiles at 1 - 1e-6].
std::pair<double, double> default_bracket(const std::vector<Marginal>& marginals);

/// VaR interval for the sum implied by the standard bounds.
VarInterval standard_var_bounds(const std::vector<Marginal>& marginals, double alpha, double tol = 1e-9,
                                const HyperplaneConfig& cfg = {});

/// VaR interval for max or min from a DF bound pair evaluator.
VarInterval var_interval_from_df(const std::function<DfBounds(double)>& df, double alpha,
                                 std::pair<double, double> bracket, double tol = 1e-9);

}  // namespace depbound

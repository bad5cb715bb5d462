#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace depbound {

enum class MarginalKind { Pareto2, EmpiricalSamples, QuantileTable };

enum class DiscretizationPart { Lower, Upper, Midpoint };

/// Closed probability sub-interval [a, b] of [0, 1].
struct ProbabilityRange {
    double a = 0.0;
    double b = 1.0;
};

struct DiscretizedMarginal {
    std::vector<double> values;
    DiscretizationPart part = DiscretizationPart::Midpoint;
    ProbabilityRange range;
};

/// Univariate law with generalized-inverse machinery.
///
/// Immutable value type: copies share the underlying sample or table storage.
/// A nonnegative scale factor is carried alongside the base law so that the
/// distribution of a*X is available without copying the data; quantiles of a
/// scaled marginal are exactly a times the base quantiles.
class Marginal {
public:
    /// F(x) = 1 - (1 + x)^-2 on x >= 0.
    static Marginal pareto2();
    /// Right-continuous empirical step function; the input is copied and sorted.
    static Marginal empirical(std::vector<double> samples);
    /// Discrete law with mass at q_k so that F(q_k) = p_k; the last node
    /// absorbs the remaining mass. Probabilities must be strictly increasing
    /// in (0, 1], quantiles nondecreasing.
    static Marginal quantile_table(std::vector<double> probabilities, std::vector<double> quantiles);

    MarginalKind kind() const noexcept;
    double scale_factor() const noexcept { return scale_; }
    std::string describe() const;

    double cdf(double x) const;
    double left_cdf(double x) const;
    /// inf{x : F(x) > p} for p in [0, 1).
    double quantile(double p) const;

    /// Lower end of the support, i.e. quantile(0).
    double support_min() const { return quantile(0.0); }
    /// True when the law has a finite upper support end.
    bool bounded_above() const noexcept;
    /// Upper support end; only meaningful when bounded_above().
    double support_max() const;

    /// Sorted sample vector for empirical laws (empty otherwise); unscaled.
    std::span<const double> samples() const;

    struct Data;

private:
    Marginal(std::shared_ptr<const Data> data, double scale) : data_(std::move(data)), scale_(scale) {}

    double base_cdf(double x) const;
    double base_left_cdf(double x) const;
    double base_quantile(double p) const;

    std::shared_ptr<const Data> data_;
    double scale_ = 1.0;

    friend Marginal scale(const Marginal& m, double a);
};

/// Law of a*X for a >= 0; a = 0 is the point mass at zero.
Marginal scale(const Marginal& m, double a);

/// EmpiricalSamples marginal from simulated draws.
Marginal empirical_from_simulation(std::vector<double> samples);

/// values[j] = quantile(a + (b - a)(j + o)/N) with o = 0, 1, 0.5 for the lower,
/// upper and midpoint parts. Upper-part probabilities are capped at 1 - clip.
DiscretizedMarginal discretize(const Marginal& m, std::size_t n, DiscretizationPart part,
                               ProbabilityRange range, double clip = 1e-9);

}  // namespace depbound

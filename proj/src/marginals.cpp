#include "depbound/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace depbound {

struct Marginal::Data {
    MarginalKind kind = MarginalKind::Pareto2;
    std::vector<double> samples;        // EmpiricalSamples, sorted
    std::vector<double> probabilities;  // QuantileTable
    std::vector<double> quantiles;      // QuantileTable
};

Marginal Marginal::pareto2() {
    auto data = std::make_shared<Data>();
    data->kind = MarginalKind::Pareto2;
    return Marginal(std::move(data), 1.0);
}

Marginal Marginal::empirical(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("empirical marginal needs at least one sample");
    for (double v : samples)
        if (!std::isfinite(v)) throw std::invalid_argument("empirical marginal: non-finite sample");
    std::sort(samples.begin(), samples.end());
    auto data = std::make_shared<Data>();
    data->kind = MarginalKind::EmpiricalSamples;
    data->samples = std::move(samples);
    return Marginal(std::move(data), 1.0);
}

Marginal Marginal::quantile_table(std::vector<double> probabilities, std::vector<double> quantiles) {
    if (probabilities.empty() || probabilities.size() != quantiles.size())
        throw std::invalid_argument("quantile table: probability and quantile columns must be nonempty and equal length");
    for (std::size_t k = 0; k < probabilities.size(); ++k) {
        if (!(probabilities[k] > 0.0 && probabilities[k] <= 1.0))
            throw std::invalid_argument("quantile table: probabilities must lie in (0, 1]");
        if (!std::isfinite(quantiles[k])) throw std::invalid_argument("quantile table: non-finite quantile");
        if (k > 0 && !(probabilities[k] > probabilities[k - 1]))
            throw std::invalid_argument("quantile table: probabilities must be strictly increasing");
        if (k > 0 && quantiles[k] < quantiles[k - 1])
            throw std::invalid_argument("quantile table: quantiles must be nondecreasing");
    }
    auto data = std::make_shared<Data>();
    data->kind = MarginalKind::QuantileTable;
    data->probabilities = std::move(probabilities);
    data->probabilities.back() = 1.0;  // last node absorbs the remaining mass
    data->quantiles = std::move(quantiles);
    return Marginal(std::move(data), 1.0);
}

MarginalKind Marginal::kind() const noexcept { return data_->kind; }

std::string Marginal::describe() const {
    std::ostringstream os;
    switch (data_->kind) {
        case MarginalKind::Pareto2: os << "pareto2"; break;
        case MarginalKind::EmpiricalSamples: os << "empirical(n=" << data_->samples.size() << ")"; break;
        case MarginalKind::QuantileTable: os << "quantile_table(k=" << data_->quantiles.size() << ")"; break;
    }
    if (scale_ != 1.0) os << "*" << scale_;
    return os.str();
}

std::span<const double> Marginal::samples() const { return data_->samples; }

double Marginal::base_cdf(double x) const {
    const Data& d = *data_;
    switch (d.kind) {
        case MarginalKind::Pareto2: {
            if (x <= 0.0) return 0.0;
            const double t = 1.0 + x;
            return 1.0 - 1.0 / (t * t);
        }
        case MarginalKind::EmpiricalSamples: {
            auto it = std::upper_bound(d.samples.begin(), d.samples.end(), x);
            return static_cast<double>(it - d.samples.begin()) / static_cast<double>(d.samples.size());
        }
        case MarginalKind::QuantileTable: {
            auto it = std::upper_bound(d.quantiles.begin(), d.quantiles.end(), x);
            if (it == d.quantiles.begin()) return 0.0;
            return d.probabilities[static_cast<std::size_t>(it - d.quantiles.begin()) - 1];
        }
    }
    return 0.0;
}

double Marginal::base_left_cdf(double x) const {
    const Data& d = *data_;
    switch (d.kind) {
        case MarginalKind::Pareto2: return base_cdf(x);
        case MarginalKind::EmpiricalSamples: {
            auto it = std::lower_bound(d.samples.begin(), d.samples.end(), x);
            return static_cast<double>(it - d.samples.begin()) / static_cast<double>(d.samples.size());
        }
        case MarginalKind::QuantileTable: {
            auto it = std::lower_bound(d.quantiles.begin(), d.quantiles.end(), x);
            if (it == d.quantiles.begin()) return 0.0;
            return d.probabilities[static_cast<std::size_t>(it - d.quantiles.begin()) - 1];
        }
    }
    return 0.0;
}

double Marginal::base_quantile(double p) const {
    const Data& d = *data_;
    switch (d.kind) {
        case MarginalKind::Pareto2: return 1.0 / std::sqrt(1.0 - p) - 1.0;
        case MarginalKind::EmpiricalSamples: {
            const auto n = d.samples.size();
            auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * p));
            return d.samples[std::min(k, n - 1)];
        }
        case MarginalKind::QuantileTable: {
            auto it = std::upper_bound(d.probabilities.begin(), d.probabilities.end(), p);
            auto k = static_cast<std::size_t>(it - d.probabilities.begin());
            return d.quantiles[std::min(k, d.quantiles.size() - 1)];
        }
    }
    return 0.0;
}

double Marginal::cdf(double x) const {
    if (scale_ == 0.0) return x >= 0.0 ? 1.0 : 0.0;
    return base_cdf(x / scale_);
}

double Marginal::left_cdf(double x) const {
    if (scale_ == 0.0) return x > 0.0 ? 1.0 : 0.0;
    return base_left_cdf(x / scale_);
}

double Marginal::quantile(double p) const {
    if (!(p >= 0.0)) throw std::domain_error("quantile: probability must be >= 0");
    if (p >= 1.0) throw std::domain_error("quantile undefined at 1 for unbounded support");
    if (scale_ == 0.0) return 0.0;
    return scale_ * base_quantile(p);
}

bool Marginal::bounded_above() const noexcept { return scale_ == 0.0 || data_->kind != MarginalKind::Pareto2; }

double Marginal::support_max() const {
    if (scale_ == 0.0) return 0.0;
    switch (data_->kind) {
        case MarginalKind::Pareto2: return std::numeric_limits<double>::infinity();
        case MarginalKind::EmpiricalSamples: return scale_ * data_->samples.back();
        case MarginalKind::QuantileTable: return scale_ * data_->quantiles.back();
    }
    return 0.0;
}

Marginal scale(const Marginal& m, double a) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("scale: weight must be a finite nonnegative number");
    return Marginal(m.data_, m.scale_ * a);
}

Marginal empirical_from_simulation(std::vector<double> samples) { return Marginal::empirical(std::move(samples)); }

DiscretizedMarginal discretize(const Marginal& m, std::size_t n, DiscretizationPart part, ProbabilityRange range,
                               double clip) {
    if (n == 0) throw std::invalid_argument("discretize: need at least one point");
    if (!(range.a >= 0.0 && range.b <= 1.0 && range.a <= range.b))
        throw std::invalid_argument("discretize: range must be a sub-interval of [0, 1]");
    if (range.a == range.b) throw std::invalid_argument("discretize: degenerate probability range");
    const double offset = part == DiscretizationPart::Lower ? 0.0 : part == DiscretizationPart::Upper ? 1.0 : 0.5;
    const double cap = 1.0 - clip;
    DiscretizedMarginal out;
    out.part = part;
    out.range = range;
    out.values.resize(n);
    const double width = range.b - range.a;
    for (std::size_t j = 0; j < n; ++j) {
        double p = range.a + width * (static_cast<double>(j) + offset) / static_cast<double>(n);
        p = std::min(p, cap);
        out.values[j] = m.quantile(p);
    }
    return out;
}

}  // namespace depbound

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "depbound/copula.hpp"

namespace depbound {

namespace {

// Closed form for two degrees of freedom; the regularized incomplete beta
// route otherwise.
double t_cdf(double t, double nu) {
    if (nu == 2.0) return 0.5 + t / (2.0 * std::sqrt(2.0 + t * t));
    boost::math::students_t_distribution<double> dist(nu);
    return boost::math::cdf(dist, t);
}

constexpr double kTiny = 1e-300;
const double kBelowOne = std::nextafter(1.0, 0.0);

void validate(const TCopulaSpec& spec, std::size_t n) {
    if (spec.dim < 2) throw std::invalid_argument("t copula: dimension must be at least 2");
    if (!(spec.rho >= 0.0 && spec.rho < 1.0))
        throw std::invalid_argument("t copula: equicorrelation must lie in [0, 1) for the one-factor sampler");
    if (!(spec.nu > 0.0) || !std::isfinite(spec.nu)) throw std::invalid_argument("t copula: degrees of freedom must be positive");
    if (n < 1) throw std::invalid_argument("t copula: sample size must be positive");
}

}  // namespace

std::vector<double> sample_t_copula_uniforms(const TCopulaSpec& spec, std::size_t n, std::mt19937_64& rng) {
    validate(spec, n);
    const std::size_t d = spec.dim;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::gamma_distribution<double> chi2(spec.nu / 2.0, 2.0);
    const double common = std::sqrt(spec.rho);
    const double idio = std::sqrt(1.0 - spec.rho);
    std::vector<double> out(n * d);
    for (std::size_t k = 0; k < n; ++k) {
        const double z0 = normal(rng);
        const double w = chi2(rng);
        const double mix = std::sqrt(spec.nu / w);
        for (std::size_t i = 0; i < d; ++i) {
            const double z = common * z0 + idio * normal(rng);
            // keep draws strictly inside (0, 1) so unbounded quantiles stay finite
            out[k * d + i] = std::clamp(t_cdf(z * mix, spec.nu), kTiny, kBelowOne);
        }
    }
    return out;
}

EmpiricalCopula sample_t_copula(const TCopulaSpec& spec, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto uniforms = sample_t_copula_uniforms(spec, n, rng);
    return EmpiricalCopula::from_samples(spec.dim, uniforms);
}

}  // namespace depbound

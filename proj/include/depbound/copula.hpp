#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace depbound {

using Point = std::span<const double>;

/// Lower Frechet-Hoeffding bound W_d(u) = max{0, sum u_i - d + 1}.
double frechet_lower(Point u);
/// Upper Frechet-Hoeffding bound M_d(u) = min{u_1, ..., u_d}.
double frechet_upper(Point u);

/// Product grid on [0,1]^d given by one sorted node list per axis.
class Lattice {
public:
    explicit Lattice(std::vector<std::vector<double>> axes);

    /// Nodes k/resolution, k = 0..resolution, on every axis.
    static Lattice uniform(std::size_t dim, std::size_t resolution);
    /// Cell midpoints (k + 1/2)/resolution, k = 0..resolution-1.
    static Lattice midpoint(std::size_t dim, std::size_t resolution);
    /// Uniform nodes with the coordinates of `anchor` inserted on each axis.
    static Lattice aligned(std::size_t dim, std::size_t resolution, Point anchor);

    std::size_t dim() const noexcept { return axes_.size(); }
    std::size_t size() const noexcept { return size_; }
    const std::vector<double>& axis(std::size_t i) const { return axes_[i]; }

    /// Writes the coordinates of flat index `flat` (last axis fastest) into out.
    void point(std::size_t flat, std::span<double> out) const;
    /// Flat index stride of axis i.
    std::size_t stride(std::size_t i) const { return strides_[i]; }

private:
    std::vector<std::vector<double>> axes_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 1;
};

/// Evaluable d-variate function on the unit cube. Quasi-copulas, copulas and
/// the bound constructions built from them all share this handle.
class QuasiCopulaFn {
public:
    struct Impl {
        virtual ~Impl() = default;
        virtual double eval(Point u) const = 0;
        /// Values at every lattice node in flat order.
        virtual std::vector<double> tabulate(const Lattice& lattice) const;
    };

    QuasiCopulaFn(std::size_t dim, std::string label, std::shared_ptr<const Impl> impl);

    static QuasiCopulaFn from_function(std::size_t dim, std::string label, std::function<double(Point)> fn);

    double operator()(Point u) const { return impl_->eval(u); }
    double operator()(std::initializer_list<double> u) const {
        return impl_->eval(Point(u.begin(), u.size()));
    }
    std::vector<double> tabulate(const Lattice& lattice) const;

    std::size_t dim() const noexcept { return dim_; }
    const std::string& label() const noexcept { return label_; }

private:
    std::size_t dim_;
    std::string label_;
    std::shared_ptr<const Impl> impl_;
};

QuasiCopulaFn independence_copula(std::size_t dim);
QuasiCopulaFn upper_frechet_copula(std::size_t dim);
QuasiCopulaFn lower_frechet_copula(std::size_t dim);

/// Survival-type function u -> value on [0,1]^d (Ĉ for a copula C).
class SurvivalFn {
public:
    SurvivalFn(std::size_t dim, std::string label, std::function<double(Point)> fn);

    /// Ĉ(u) = V_C([u_1,1] x ... x [u_d,1]).
    static SurvivalFn of_copula(const QuasiCopulaFn& c);
    /// u -> Q(1 - u); the quasi-survival function whose reflection is Q.
    static SurvivalFn from_reflected(const QuasiCopulaFn& q);

    double operator()(Point u) const { return fn_(u); }
    double operator()(std::initializer_list<double> u) const { return fn_(Point(u.begin(), u.size())); }
    std::size_t dim() const noexcept { return dim_; }
    const std::string& label() const noexcept { return label_; }

    /// u -> Ŝ(1 - u), a quasi-copula whenever this is a quasi-survival function.
    QuasiCopulaFn reflected() const;

private:
    std::size_t dim_;
    std::string label_;
    std::function<double(Point)> fn_;
};

/// Axis-aligned box with lower corner a and upper corner b.
struct Box {
    std::vector<double> a;
    std::vector<double> b;

    Box(std::vector<double> lower, std::vector<double> upper);
    std::size_t dim() const noexcept { return a.size(); }
};

/// f-volume of H: inclusion-exclusion over the 2^d corners.
double volume(const std::function<double(Point)>& f, const Box& h);
double volume(const QuasiCopulaFn& f, const Box& h);

/// Ĉ(u): the C-volume of the upper box anchored at u.
double survival(const QuasiCopulaFn& c, Point u);

/// The survival copula v -> Ĉ(1 - v).
QuasiCopulaFn survival_copula(const QuasiCopulaFn& c);

QuasiCopulaFn min_convolution(const QuasiCopulaFn& q, const QuasiCopulaFn& r);
QuasiCopulaFn max_convolution(const QuasiCopulaFn& q, const QuasiCopulaFn& r);

/// Worst violation per axiom on the uniform lattice with step 1/resolution.
struct QuasiCopulaReport {
    double boundary = 0.0;   // QC1: groundedness and uniform margins
    double monotone = 0.0;   // QC2: largest decrease along an axis step
    double lipschitz = 0.0;  // QC3: largest excess of |Δf| over the step length
    double tolerance = 0.0;

    bool boundary_ok() const { return boundary <= tolerance; }
    bool monotone_ok() const { return monotone <= tolerance; }
    bool lipschitz_ok() const { return lipschitz <= tolerance; }
    bool passed() const { return boundary_ok() && monotone_ok() && lipschitz_ok(); }
};

QuasiCopulaReport check_quasicopula(const QuasiCopulaFn& f, std::size_t resolution, double tol);

/// Most negative volume over the lattice cells (QC4); 0 when d-increasing on the grid.
double worst_cell_volume(const QuasiCopulaFn& f, std::size_t resolution);

/// True iff q(u) <= r(u) + 1e-12 at every lattice node.
bool pointwise_leq_on_grid(const QuasiCopulaFn& q, const QuasiCopulaFn& r, std::size_t resolution);

/// Empirical copula of n pseudo-observations in [0,1]^d.
class EmpiricalCopula {
public:
    /// Rank-transforms each column of the row-major sample matrix to
    /// {1/n, ..., n/n}; ties receive their average rank.
    static EmpiricalCopula from_samples(std::size_t dim, std::span<const double> rows);
    /// Uses the row-major values as pseudo-observations without re-ranking.
    static EmpiricalCopula from_pseudo_observations(std::size_t dim, std::vector<double> rows);
    static EmpiricalCopula load_csv(const std::filesystem::path& path);

    void save_csv(const std::filesystem::path& path) const;

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return n_; }
    /// Row-major pseudo-observations, sorted by the first coordinate.
    std::span<const double> rows() const noexcept { return rows_; }

    /// Fraction of rows that are componentwise <= u.
    double eval(Point u) const;
    std::vector<double> tabulate(const Lattice& lattice) const;

    QuasiCopulaFn as_function(std::string label = "empirical") const;

    /// Checkerboard extension: each row spreads its mass uniformly over the
    /// cell of side 1/n ending at the row. Unlike eval(), a genuine copula.
    double eval_checkerboard(Point u) const;
    QuasiCopulaFn as_checkerboard_function(std::string label = "checkerboard") const;

private:
    EmpiricalCopula(std::size_t dim, std::vector<double> rows);

    std::size_t dim_ = 0;
    std::size_t n_ = 0;
    std::shared_ptr<const std::vector<double>> storage_;
    std::span<const double> rows_;
};

double empirical_copula_eval(const EmpiricalCopula& e, Point u);

/// Student-t copula with equicorrelation rho >= 0 and nu degrees of freedom.
struct TCopulaSpec {
    std::size_t dim = 3;
    double rho = 0.9;
    double nu = 2.0;
};

/// Raw t-copula draws (row-major n x d uniforms) from the one-factor normal
/// representation and a chi-square mixing variable.
std::vector<double> sample_t_copula_uniforms(const TCopulaSpec& spec, std::size_t n, std::mt19937_64& rng);

/// Seeded t-copula draws, rank transformed into an empirical copula.
EmpiricalCopula sample_t_copula(const TCopulaSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace depbound

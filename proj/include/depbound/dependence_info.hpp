#pragma once

#include <filesystem>
#include <vector>

#include "depbound/copula.hpp"

namespace depbound {

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Finite point set S in [0,1]^d with prescribed values Q*(x).
///
/// Construction checks W_d(x) <= Q*(x) <= M_d(x) and the crosswise consistency
/// of the improved bounds at the prescribed points; violations raise
/// InfeasibleError.
class Prescription {
public:
    explicit Prescription(std::size_t dim);
    /// With survival = true the values are P(U > x) and are checked against the
    /// Frechet bounds at 1 - x.
    Prescription(std::size_t dim, std::vector<std::vector<double>> points, std::vector<double> values,
                 bool survival = false);

    /// CSV rows x_1,...,x_d,value. An empty file gives an empty prescription.
    static Prescription load_csv(const std::filesystem::path& path, std::size_t dim, bool survival = false);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    const std::vector<std::vector<double>>& points() const noexcept { return points_; }
    const std::vector<double>& values() const noexcept { return values_; }

    bool survival() const noexcept { return survival_; }

    /// Point set reflected through x -> 1 - x with the same values; the kind flips.
    Prescription reflected() const;

private:
    std::size_t dim_;
    bool survival_ = false;
    std::vector<std::vector<double>> points_;
    std::vector<double> values_;
};

double improved_fh_lower(const Prescription& p, Point u);
double improved_fh_upper(const Prescription& p, Point u);

QuasiCopulaFn improved_fh_lower_fn(const Prescription& p);
QuasiCopulaFn improved_fh_upper_fn(const Prescription& p);

/// Checks lower <= upper on the uniform probe lattice; throws InfeasibleError.
void check_prescription_feasible(const Prescription& p, std::size_t probe_resolution);

/// Bounds on Ĉ(u) when the prescription carries survival values Ĉ*(x).
Interval improved_fh_survival(const Prescription& survival_values, Point u);

enum class DistanceKind { KolmogorovSmirnov, CramerVonMises, Lp };

struct DistanceSpec {
    DistanceKind kind = DistanceKind::KolmogorovSmirnov;
    double p = 2.0;
    /// Lattice resolution per axis: nodes k/grid for the supremum,
    /// midpoints (k + 1/2)/grid for integral distances.
    std::size_t grid = 32;
};

void validate(const DistanceSpec& spec);

double distance_eval(const DistanceSpec& spec, const QuasiCopulaFn& q, const QuasiCopulaFn& r);

struct DistanceBall {
    QuasiCopulaFn reference;
    DistanceSpec distance;
    double radius = 0.0;
};

/// Closed form for the Kolmogorov-Smirnov ball.
Interval ks_ball_bounds(const DistanceBall& ball, Point u);
QuasiCopulaFn ks_ball_lower_fn(const DistanceBall& ball);
QuasiCopulaFn ks_ball_upper_fn(const DistanceBall& ball);

/// Pointwise bounds over the ball by bisection on the single-point
/// prescription value. The sup-distance lattice is aligned with u so the
/// supremum is attained on the grid.
double distance_ball_lower(const DistanceBall& ball, Point u, double tol = 1e-6);
double distance_ball_upper(const DistanceBall& ball, Point u, double tol = 1e-6);

/// Bounds on Ĉ(u) for copulas whose survival copula lies in the ball around
/// the survival copula of the reference.
Interval distance_ball_survival(const DistanceBall& ball, Point u, double tol = 1e-6);

}  // namespace depbound

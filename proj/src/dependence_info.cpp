#include "depbound/dependence_info.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "depbound/errors.hpp"

namespace depbound {

namespace {

constexpr double kFeasibilityTol = 1e-12;

double positive_excess(Point x, Point u) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::max(0.0, x[i] - u[i]);
    return s;
}

void check_point(std::size_t dim, Point u) {
    if (u.size() != dim) throw std::invalid_argument("point dimension does not match the prescription");
}

}  // namespace

Prescription::Prescription(std::size_t dim) : dim_(dim) {
    if (dim_ < 2) throw std::invalid_argument("prescription dimension must be at least 2");
}

Prescription::Prescription(std::size_t dim, std::vector<std::vector<double>> points, std::vector<double> values,
                           bool survival)
    : dim_(dim), survival_(survival), points_(std::move(points)), values_(std::move(values)) {
    if (dim_ < 2) throw std::invalid_argument("prescription dimension must be at least 2");
    if (points_.size() != values_.size()) throw std::invalid_argument("prescription: points and values differ in length");
    for (std::size_t k = 0; k < points_.size(); ++k) {
        const auto& x = points_[k];
        if (x.size() != dim_) throw std::invalid_argument("prescription: point dimension mismatch");
        for (double v : x)
            if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("prescription: points must lie in [0,1]^d");
        std::vector<double> y = x;
        if (survival_)
            for (double& v : y) v = 1.0 - v;
        if (values_[k] < frechet_lower(y) - kFeasibilityTol || values_[k] > frechet_upper(y) + kFeasibilityTol)
            throw InfeasibleError("prescription infeasible: value outside [W_d(x), M_d(x)] at point " + std::to_string(k));
    }
    // crosswise: every prescribed value must respect the Lipschitz cones of the others
    for (std::size_t j = 0; j < points_.size(); ++j)
        for (std::size_t k = 0; k < points_.size(); ++k) {
            if (j == k) continue;
            const double gap = survival_ ? positive_excess(points_[k], points_[j]) : positive_excess(points_[j], points_[k]);
            if (values_[j] - gap > values_[k] + kFeasibilityTol)
                throw InfeasibleError("prescription infeasible: points " + std::to_string(j) + " and " +
                                      std::to_string(k) + " are inconsistent");
        }
}

Prescription Prescription::load_csv(const std::filesystem::path& path, std::size_t dim, bool survival) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open prescription file " + path.string());
    std::vector<std::vector<double>> points;
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        try {
            while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": not a number");
        }
        if (row.size() != dim + 1)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(dim + 1) + " columns");
        values.push_back(row.back());
        row.pop_back();
        points.push_back(std::move(row));
    }
    return Prescription(dim, std::move(points), std::move(values), survival);
}

Prescription Prescription::reflected() const {
    auto pts = points_;
    for (auto& x : pts)
        for (double& v : x) v = 1.0 - v;
    return Prescription(dim_, std::move(pts), values_, !survival_);
}

double improved_fh_lower(const Prescription& p, Point u) {
    check_point(p.dim(), u);
    double best = frechet_lower(u);
    for (std::size_t k = 0; k < p.size(); ++k) best = std::max(best, p.values()[k] - positive_excess(p.points()[k], u));
    return best;
}

double improved_fh_upper(const Prescription& p, Point u) {
    check_point(p.dim(), u);
    double best = frechet_upper(u);
    for (std::size_t k = 0; k < p.size(); ++k) best = std::min(best, p.values()[k] + positive_excess(u, p.points()[k]));
    return best;
}

QuasiCopulaFn improved_fh_lower_fn(const Prescription& p) {
    return QuasiCopulaFn::from_function(p.dim(), "improved_fh_lower", [p](Point u) { return improved_fh_lower(p, u); });
}

QuasiCopulaFn improved_fh_upper_fn(const Prescription& p) {
    return QuasiCopulaFn::from_function(p.dim(), "improved_fh_upper", [p](Point u) { return improved_fh_upper(p, u); });
}

void check_prescription_feasible(const Prescription& p, std::size_t probe_resolution) {
    const Lattice lattice = Lattice::uniform(p.dim(), probe_resolution);
    std::vector<double> u(p.dim());
    for (std::size_t k = 0; k < lattice.size(); ++k) {
        lattice.point(k, u);
        if (improved_fh_lower(p, u) > improved_fh_upper(p, u) + kFeasibilityTol)
            throw InfeasibleError("prescription infeasible: lower bound exceeds upper bound on the probe grid");
    }
}

Interval improved_fh_survival(const Prescription& survival_values, Point u) {
    const Prescription reflected = survival_values.reflected();
    std::vector<double> v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) v[i] = 1.0 - u[i];
    return {improved_fh_lower(reflected, v), improved_fh_upper(reflected, v)};
}

// --------------------------------------------------------------- distances

void validate(const DistanceSpec& spec) {
    if (spec.kind == DistanceKind::Lp && !(spec.p >= 1.0)) throw std::invalid_argument("Lp distance needs p >= 1");
    if (spec.grid < 1) throw std::invalid_argument("distance lattice resolution must be positive");
}

namespace {

// Aggregates absolute differences the way the distance prescribes.
double aggregate(const DistanceSpec& spec, const std::vector<double>& diff) {
    switch (spec.kind) {
        case DistanceKind::KolmogorovSmirnov: {
            double m = 0.0;
            for (double v : diff) m = std::max(m, v);
            return m;
        }
        case DistanceKind::CramerVonMises: {
            double s = 0.0;
            for (double v : diff) s += v * v;
            return s / static_cast<double>(diff.size());
        }
        case DistanceKind::Lp: {
            double s = 0.0;
            for (double v : diff) s += std::pow(v, spec.p);
            return std::pow(s / static_cast<double>(diff.size()), 1.0 / spec.p);
        }
    }
    return 0.0;
}

Lattice distance_lattice(const DistanceSpec& spec, std::size_t dim) {
    return spec.kind == DistanceKind::KolmogorovSmirnov ? Lattice::uniform(dim, spec.grid)
                                                        : Lattice::midpoint(dim, spec.grid);
}

}  // namespace

double distance_eval(const DistanceSpec& spec, const QuasiCopulaFn& q, const QuasiCopulaFn& r) {
    validate(spec);
    if (q.dim() != r.dim()) throw std::invalid_argument("distance_eval: dimension mismatch");
    const Lattice lattice = distance_lattice(spec, q.dim());
    auto a = q.tabulate(lattice);
    const auto b = r.tabulate(lattice);
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::abs(a[k] - b[k]);
    return aggregate(spec, a);
}

// -------------------------------------------------------------- KS balls

Interval ks_ball_bounds(const DistanceBall& ball, Point u) {
    if (!(ball.radius >= 0.0)) throw std::invalid_argument("distance ball radius must be nonnegative");
    const double c = ball.reference(u);
    return {std::max(c - ball.radius, frechet_lower(u)), std::min(c + ball.radius, frechet_upper(u))};
}

namespace {

struct KsBallImpl final : QuasiCopulaFn::Impl {
    KsBallImpl(QuasiCopulaFn ref, double r, bool lower_side) : reference(std::move(ref)), radius(r), lower(lower_side) {}

    double eval(Point u) const override {
        const double c = reference(u);
        return lower ? std::max(c - radius, frechet_lower(u)) : std::min(c + radius, frechet_upper(u));
    }

    std::vector<double> tabulate(const Lattice& lattice) const override {
        auto values = reference.tabulate(lattice);
        std::vector<double> u(lattice.dim());
        for (std::size_t k = 0; k < values.size(); ++k) {
            lattice.point(k, u);
            values[k] = lower ? std::max(values[k] - radius, frechet_lower(u)) : std::min(values[k] + radius, frechet_upper(u));
        }
        return values;
    }

    QuasiCopulaFn reference;
    double radius;
    bool lower;
};

}  // namespace

QuasiCopulaFn ks_ball_lower_fn(const DistanceBall& ball) {
    if (!(ball.radius >= 0.0)) throw std::invalid_argument("distance ball radius must be nonnegative");
    return QuasiCopulaFn(ball.reference.dim(), "ks_lower", std::make_shared<KsBallImpl>(ball.reference, ball.radius, true));
}

QuasiCopulaFn ks_ball_upper_fn(const DistanceBall& ball) {
    if (!(ball.radius >= 0.0)) throw std::invalid_argument("distance ball radius must be nonnegative");
    return QuasiCopulaFn(ball.reference.dim(), "ks_upper", std::make_shared<KsBallImpl>(ball.reference, ball.radius, false));
}

// ------------------------------------------------------- general balls

namespace {

constexpr int kMaxBisection = 60;

// Lattice data reused across the bisection on alpha for a fixed probe point u.
class BallProbe {
public:
    BallProbe(const DistanceBall& ball, Point u) : spec_(ball.distance) {
        validate(spec_);
        if (!(ball.radius >= 0.0)) throw std::invalid_argument("distance ball radius must be nonnegative");
        if (u.size() != ball.reference.dim()) throw std::invalid_argument("distance ball: point dimension mismatch");
        const std::size_t d = u.size();
        const bool sup = spec_.kind == DistanceKind::KolmogorovSmirnov;
        const Lattice lattice = sup ? Lattice::aligned(d, spec_.grid, u) : anchored_midpoints(d, spec_.grid, u);
        reference_ = ball.reference.tabulate(lattice);
        const std::size_t n = lattice.size();
        if (!sup) weights_ = cell_weights(lattice);
        upper_fh_.resize(n);
        lower_fh_.resize(n);
        above_.resize(n);
        below_.resize(n);
        std::vector<double> x(d);
        for (std::size_t k = 0; k < n; ++k) {
            lattice.point(k, x);
            upper_fh_[k] = frechet_upper(x);
            lower_fh_[k] = frechet_lower(x);
            double a = 0.0, b = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                a += std::max(0.0, x[i] - u[i]);
                b += std::max(0.0, u[i] - x[i]);
            }
            above_[k] = a;
            below_[k] = b;
        }
        diff_.resize(n);
    }

    // D(min(Q-bar^{u,alpha}, C*), C*): nonincreasing in alpha.
    double lower_side_distance(double alpha) {
        for (std::size_t k = 0; k < diff_.size(); ++k) {
            const double bound = std::min(upper_fh_[k], alpha + above_[k]);
            diff_[k] = reference_[k] - std::min(reference_[k], bound);
        }
        return measure();
    }

    // D(max(Q-under^{u,alpha}, C*), C*): nondecreasing in alpha.
    double upper_side_distance(double alpha) {
        for (std::size_t k = 0; k < diff_.size(); ++k) {
            const double bound = std::max(lower_fh_[k], alpha - below_[k]);
            diff_[k] = std::max(reference_[k], bound) - reference_[k];
        }
        return measure();
    }

private:
    // Midpoint lattice with u spliced into each axis, so that any gap at u
    // itself carries positive weight and a zero radius pins C*(u).
    static Lattice anchored_midpoints(std::size_t d, std::size_t grid, Point u) {
        std::vector<std::vector<double>> axes(d);
        for (std::size_t i = 0; i < d; ++i) {
            axes[i] = Lattice::midpoint(1, grid).axis(0);
            axes[i].push_back(std::clamp(u[i], 0.0, 1.0));
            std::sort(axes[i].begin(), axes[i].end());
            axes[i].erase(std::unique(axes[i].begin(), axes[i].end()), axes[i].end());
        }
        return Lattice(std::move(axes));
    }

    // Product of per-axis cell lengths (nearest-node cells in [0,1]).
    static std::vector<double> cell_weights(const Lattice& lattice) {
        std::vector<std::vector<double>> len(lattice.dim());
        for (std::size_t i = 0; i < lattice.dim(); ++i) {
            const auto& a = lattice.axis(i);
            for (std::size_t k = 0; k < a.size(); ++k) {
                const double left = k == 0 ? 0.0 : 0.5 * (a[k - 1] + a[k]);
                const double right = k + 1 == a.size() ? 1.0 : 0.5 * (a[k] + a[k + 1]);
                len[i].push_back(right - left);
            }
        }
        std::vector<double> w(lattice.size(), 1.0);
        for (std::size_t k = 0; k < w.size(); ++k) {
            std::size_t flat = k;
            for (std::size_t i = 0; i < lattice.dim(); ++i) {
                w[k] *= len[i][flat / lattice.stride(i)];
                flat %= lattice.stride(i);
            }
        }
        return w;
    }

    double measure() const {
        if (weights_.empty()) return aggregate(spec_, diff_);
        const double p = spec_.kind == DistanceKind::CramerVonMises ? 2.0 : spec_.p;
        double s = 0.0;
        for (std::size_t k = 0; k < diff_.size(); ++k)
            if (diff_[k] > 0.0) s += weights_[k] * std::pow(diff_[k], p);
        return spec_.kind == DistanceKind::CramerVonMises ? s : std::pow(s, 1.0 / p);
    }

    DistanceSpec spec_;
    std::vector<double> reference_, upper_fh_, lower_fh_, above_, below_, diff_, weights_;
};

void check_tol(double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("bisection tolerance must be positive");
}

}  // namespace

double distance_ball_lower(const DistanceBall& ball, Point u, double tol) {
    check_tol(tol);
    BallProbe probe(ball, u);
    double lo = frechet_lower(u), hi = frechet_upper(u);
    if (probe.lower_side_distance(lo) <= ball.radius) return lo;
    if (probe.lower_side_distance(hi) > ball.radius) return hi;
    for (int it = 0; it < kMaxBisection && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (probe.lower_side_distance(mid) <= ball.radius) hi = mid;
        else lo = mid;
    }
    return lo;
}

double distance_ball_upper(const DistanceBall& ball, Point u, double tol) {
    check_tol(tol);
    BallProbe probe(ball, u);
    double lo = frechet_lower(u), hi = frechet_upper(u);
    if (probe.upper_side_distance(hi) <= ball.radius) return hi;
    if (probe.upper_side_distance(lo) > ball.radius) return lo;
    for (int it = 0; it < kMaxBisection && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (probe.upper_side_distance(mid) <= ball.radius) lo = mid;
        else hi = mid;
    }
    return hi;
}

Interval distance_ball_survival(const DistanceBall& ball, Point u, double tol) {
    const DistanceBall reflected{survival_copula(ball.reference), ball.distance, ball.radius};
    std::vector<double> v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) v[i] = 1.0 - u[i];
    return {distance_ball_lower(reflected, v, tol), distance_ball_upper(reflected, v, tol)};
}

}  // namespace depbound

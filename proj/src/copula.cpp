#include "depbound/copula.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace depbound {

double frechet_lower(Point u) {
    double s = 0.0;
    for (double v : u) s += v;
    return std::max(0.0, s - static_cast<double>(u.size()) + 1.0);
}

double frechet_upper(Point u) { return *std::min_element(u.begin(), u.end()); }

// ---------------------------------------------------------------- Lattice

Lattice::Lattice(std::vector<std::vector<double>> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw std::invalid_argument("lattice needs at least one axis");
    strides_.assign(axes_.size(), 1);
    for (std::size_t i = axes_.size(); i-- > 0;) {
        if (axes_[i].empty()) throw std::invalid_argument("lattice axis without nodes");
        strides_[i] = size_;
        size_ *= axes_[i].size();
    }
}

Lattice Lattice::uniform(std::size_t dim, std::size_t resolution) {
    if (resolution < 1) throw std::invalid_argument("lattice resolution must be positive");
    std::vector<double> nodes(resolution + 1);
    for (std::size_t k = 0; k <= resolution; ++k) nodes[k] = static_cast<double>(k) / static_cast<double>(resolution);
    return Lattice(std::vector<std::vector<double>>(dim, nodes));
}

Lattice Lattice::midpoint(std::size_t dim, std::size_t resolution) {
    if (resolution < 1) throw std::invalid_argument("lattice resolution must be positive");
    std::vector<double> nodes(resolution);
    for (std::size_t k = 0; k < resolution; ++k)
        nodes[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(resolution);
    return Lattice(std::vector<std::vector<double>>(dim, nodes));
}

Lattice Lattice::aligned(std::size_t dim, std::size_t resolution, Point anchor) {
    if (anchor.size() != dim) throw std::invalid_argument("lattice anchor dimension mismatch");
    Lattice base = uniform(dim, resolution);
    std::vector<std::vector<double>> axes(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        axes[i] = base.axis(i);
        axes[i].push_back(std::clamp(anchor[i], 0.0, 1.0));
        std::sort(axes[i].begin(), axes[i].end());
        axes[i].erase(std::unique(axes[i].begin(), axes[i].end()), axes[i].end());
    }
    return Lattice(std::move(axes));
}

void Lattice::point(std::size_t flat, std::span<double> out) const {
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        out[i] = axes_[i][flat / strides_[i]];
        flat %= strides_[i];
    }
}

// ---------------------------------------------------------- QuasiCopulaFn

std::vector<double> QuasiCopulaFn::Impl::tabulate(const Lattice& lattice) const {
    std::vector<double> out(lattice.size());
    std::vector<double> u(lattice.dim());
    for (std::size_t k = 0; k < lattice.size(); ++k) {
        lattice.point(k, u);
        out[k] = eval(u);
    }
    return out;
}

QuasiCopulaFn::QuasiCopulaFn(std::size_t dim, std::string label, std::shared_ptr<const Impl> impl)
    : dim_(dim), label_(std::move(label)), impl_(std::move(impl)) {
    if (dim_ < 1) throw std::invalid_argument("copula dimension must be positive");
}

std::vector<double> QuasiCopulaFn::tabulate(const Lattice& lattice) const {
    if (lattice.dim() != dim_) throw std::invalid_argument("lattice dimension mismatch");
    return impl_->tabulate(lattice);
}

namespace {

struct FunctionImpl final : QuasiCopulaFn::Impl {
    explicit FunctionImpl(std::function<double(Point)> f) : fn(std::move(f)) {}
    double eval(Point u) const override { return fn(u); }
    std::function<double(Point)> fn;
};

struct ConvolutionImpl final : QuasiCopulaFn::Impl {
    ConvolutionImpl(QuasiCopulaFn a, QuasiCopulaFn b, bool take_min) : q(std::move(a)), r(std::move(b)), use_min(take_min) {}
    double eval(Point u) const override { return use_min ? std::min(q(u), r(u)) : std::max(q(u), r(u)); }
    std::vector<double> tabulate(const Lattice& lattice) const override {
        auto lhs = q.tabulate(lattice);
        auto rhs = r.tabulate(lattice);
        for (std::size_t k = 0; k < lhs.size(); ++k) lhs[k] = use_min ? std::min(lhs[k], rhs[k]) : std::max(lhs[k], rhs[k]);
        return lhs;
    }
    QuasiCopulaFn q, r;
    bool use_min;
};

}  // namespace

QuasiCopulaFn QuasiCopulaFn::from_function(std::size_t dim, std::string label, std::function<double(Point)> fn) {
    return QuasiCopulaFn(dim, std::move(label), std::make_shared<FunctionImpl>(std::move(fn)));
}

QuasiCopulaFn independence_copula(std::size_t dim) {
    return QuasiCopulaFn::from_function(dim, "independence", [](Point u) {
        double p = 1.0;
        for (double v : u) p *= v;
        return p;
    });
}

QuasiCopulaFn upper_frechet_copula(std::size_t dim) {
    return QuasiCopulaFn::from_function(dim, "M", [](Point u) { return frechet_upper(u); });
}

QuasiCopulaFn lower_frechet_copula(std::size_t dim) {
    return QuasiCopulaFn::from_function(dim, "W", [](Point u) { return frechet_lower(u); });
}

// ------------------------------------------------------------- SurvivalFn

SurvivalFn::SurvivalFn(std::size_t dim, std::string label, std::function<double(Point)> fn)
    : dim_(dim), label_(std::move(label)), fn_(std::move(fn)) {}

SurvivalFn SurvivalFn::of_copula(const QuasiCopulaFn& c) {
    return SurvivalFn(c.dim(), "survival(" + c.label() + ")", [c](Point u) { return survival(c, u); });
}

SurvivalFn SurvivalFn::from_reflected(const QuasiCopulaFn& q) {
    return SurvivalFn(q.dim(), "reflected(" + q.label() + ")", [q](Point u) {
        std::vector<double> v(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) v[i] = 1.0 - u[i];
        return q(v);
    });
}

QuasiCopulaFn SurvivalFn::reflected() const {
    auto fn = fn_;
    return QuasiCopulaFn::from_function(dim_, "reflect(" + label_ + ")", [fn](Point u) {
        std::vector<double> v(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) v[i] = 1.0 - u[i];
        return fn(v);
    });
}

// ------------------------------------------------------------------ Volume

Box::Box(std::vector<double> lower, std::vector<double> upper) : a(std::move(lower)), b(std::move(upper)) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("box corners must have equal nonzero dimension");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] <= b[i])) throw std::invalid_argument("box lower corner must not exceed upper corner");
}

double volume(const std::function<double(Point)>& f, const Box& h) {
    const std::size_t d = h.dim();
    if (d >= 30) throw std::invalid_argument("volume: dimension too large for corner enumeration");
    std::vector<double> corner(d);
    double total = 0.0;
    const std::uint64_t corners = std::uint64_t{1} << d;
    for (std::uint64_t mask = 0; mask < corners; ++mask) {
        int lower_count = 0;
        for (std::size_t i = 0; i < d; ++i) {
            const bool lower = (mask >> i) & 1U;
            corner[i] = lower ? h.a[i] : h.b[i];
            lower_count += lower ? 1 : 0;
        }
        const double value = f(corner);
        total += (lower_count % 2 == 0) ? value : -value;
    }
    return total;
}

double volume(const QuasiCopulaFn& f, const Box& h) {
    if (h.dim() != f.dim()) throw std::invalid_argument("volume: dimension mismatch");
    return volume([&f](Point u) { return f(u); }, h);
}

double survival(const QuasiCopulaFn& c, Point u) {
    if (u.size() != c.dim()) throw std::invalid_argument("survival: dimension mismatch");
    return volume(c, Box(std::vector<double>(u.begin(), u.end()), std::vector<double>(u.size(), 1.0)));
}

QuasiCopulaFn survival_copula(const QuasiCopulaFn& c) {
    return QuasiCopulaFn::from_function(c.dim(), "survival_copula(" + c.label() + ")", [c](Point v) {
        std::vector<double> u(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) u[i] = 1.0 - v[i];
        return survival(c, u);
    });
}

QuasiCopulaFn min_convolution(const QuasiCopulaFn& q, const QuasiCopulaFn& r) {
    if (q.dim() != r.dim()) throw std::invalid_argument("min_convolution: dimension mismatch");
    return QuasiCopulaFn(q.dim(), "min(" + q.label() + "," + r.label() + ")", std::make_shared<ConvolutionImpl>(q, r, true));
}

QuasiCopulaFn max_convolution(const QuasiCopulaFn& q, const QuasiCopulaFn& r) {
    if (q.dim() != r.dim()) throw std::invalid_argument("max_convolution: dimension mismatch");
    return QuasiCopulaFn(q.dim(), "max(" + q.label() + "," + r.label() + ")", std::make_shared<ConvolutionImpl>(q, r, false));
}

// ------------------------------------------------------------ Axiom checks

QuasiCopulaReport check_quasicopula(const QuasiCopulaFn& f, std::size_t resolution, double tol) {
    if (resolution < 2) throw std::invalid_argument("check_quasicopula: resolution must be at least 2");
    const std::size_t d = f.dim();
    const Lattice lattice = Lattice::uniform(d, resolution);
    const auto values = f.tabulate(lattice);
    const double step = 1.0 / static_cast<double>(resolution);

    QuasiCopulaReport report;
    report.tolerance = tol;
    std::vector<std::size_t> index(d);
    for (std::size_t k = 0; k < lattice.size(); ++k) {
        std::size_t rest = k;
        bool grounded = false;
        std::size_t not_one = 0, free_axis = 0;
        for (std::size_t i = 0; i < d; ++i) {
            index[i] = rest / lattice.stride(i);
            rest %= lattice.stride(i);
            if (index[i] == 0) grounded = true;
            if (index[i] != resolution) {
                ++not_one;
                free_axis = i;
            }
        }
        const double v = values[k];
        if (grounded) report.boundary = std::max(report.boundary, std::abs(v));
        if (not_one <= 1) {
            const double target = not_one == 0 ? 1.0 : lattice.axis(free_axis)[index[free_axis]];
            report.boundary = std::max(report.boundary, std::abs(v - target));
        }
        for (std::size_t i = 0; i < d; ++i) {
            if (index[i] == resolution) continue;
            const double next = values[k + lattice.stride(i)];
            report.monotone = std::max(report.monotone, v - next);
            report.lipschitz = std::max(report.lipschitz, std::abs(next - v) - step);
        }
    }
    return report;
}

double worst_cell_volume(const QuasiCopulaFn& f, std::size_t resolution) {
    const std::size_t d = f.dim();
    const Lattice lattice = Lattice::uniform(d, resolution);
    const auto values = f.tabulate(lattice);
    double worst = 0.0;
    std::vector<std::size_t> index(d);
    for (std::size_t k = 0; k < lattice.size(); ++k) {
        std::size_t rest = k;
        bool interior = true;
        for (std::size_t i = 0; i < d; ++i) {
            index[i] = rest / lattice.stride(i);
            rest %= lattice.stride(i);
            if (index[i] == resolution) interior = false;
        }
        if (!interior) continue;
        double vol = 0.0;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
            std::size_t flat = k;
            int upper = 0;
            for (std::size_t i = 0; i < d; ++i)
                if ((mask >> i) & 1U) {
                    flat += lattice.stride(i);
                    ++upper;
                }
            vol += ((static_cast<int>(d) - upper) % 2 == 0) ? values[flat] : -values[flat];
        }
        worst = std::min(worst, vol);
    }
    return worst;
}

bool pointwise_leq_on_grid(const QuasiCopulaFn& q, const QuasiCopulaFn& r, std::size_t resolution) {
    if (q.dim() != r.dim()) throw std::invalid_argument("pointwise_leq_on_grid: dimension mismatch");
    const Lattice lattice = Lattice::uniform(q.dim(), resolution);
    const auto lhs = q.tabulate(lattice);
    const auto rhs = r.tabulate(lattice);
    for (std::size_t k = 0; k < lhs.size(); ++k)
        if (lhs[k] > rhs[k] + 1e-12) return false;
    return true;
}

// -------------------------------------------------------- EmpiricalCopula

EmpiricalCopula::EmpiricalCopula(std::size_t dim, std::vector<double> rows) : dim_(dim) {
    if (dim_ < 1) throw std::invalid_argument("empirical copula: dimension must be positive");
    if (rows.empty() || rows.size() % dim_ != 0)
        throw std::invalid_argument("empirical copula: row-major data must hold a positive multiple of dim values");
    n_ = rows.size() / dim_;
    for (double v : rows)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("empirical copula: pseudo-observations must lie in [0,1]");

    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return rows[x * dim_] < rows[y * dim_]; });
    auto sorted = std::make_shared<std::vector<double>>(rows.size());
    for (std::size_t k = 0; k < n_; ++k)
        std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(order[k] * dim_), dim_, sorted->begin() + static_cast<std::ptrdiff_t>(k * dim_));
    storage_ = std::move(sorted);
    rows_ = *storage_;
}

EmpiricalCopula EmpiricalCopula::from_pseudo_observations(std::size_t dim, std::vector<double> rows) {
    return EmpiricalCopula(dim, std::move(rows));
}

EmpiricalCopula EmpiricalCopula::from_samples(std::size_t dim, std::span<const double> rows) {
    if (dim < 1 || rows.empty() || rows.size() % dim != 0)
        throw std::invalid_argument("empirical copula: row-major data must hold a positive multiple of dim values");
    const std::size_t n = rows.size() / dim;
    std::vector<double> ranks(rows.size());
    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < dim; ++j) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return rows[x * dim + j] < rows[y * dim + j]; });
        std::size_t k = 0;
        while (k < n) {
            std::size_t end = k + 1;
            while (end < n && rows[order[end] * dim + j] == rows[order[k] * dim + j]) ++end;
            // positions k..end-1 hold ranks k+1..end; ties share the average
            const double rank = (static_cast<double>(k + 1) + static_cast<double>(end)) / 2.0 / static_cast<double>(n);
            for (std::size_t t = k; t < end; ++t) ranks[order[t] * dim + j] = rank;
            k = end;
        }
    }
    return EmpiricalCopula(dim, std::move(ranks));
}

EmpiricalCopula EmpiricalCopula::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open empirical copula file " + path.string());
    std::vector<double> values;
    std::size_t dim = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t count = 0;
        while (std::getline(ss, cell, ',')) {
            values.push_back(std::stod(cell));
            ++count;
        }
        if (dim == 0) dim = count;
        if (count != dim)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": inconsistent column count");
    }
    return EmpiricalCopula(dim, std::move(values));
}

void EmpiricalCopula::save_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write empirical copula file " + path.string());
    out.precision(17);
    for (std::size_t k = 0; k < n_; ++k) {
        for (std::size_t j = 0; j < dim_; ++j) out << (j ? "," : "") << rows_[k * dim_ + j];
        out << '\n';
    }
}

double EmpiricalCopula::eval(Point u) const {
    if (u.size() != dim_) throw std::invalid_argument("empirical copula: dimension mismatch");
    // rows are sorted by the first coordinate, so only a prefix can count
    std::size_t lo = 0, hi = n_;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (rows_[mid * dim_] <= u[0]) lo = mid + 1;
        else hi = mid;
    }
    std::size_t count = 0;
    for (std::size_t k = 0; k < lo; ++k) {
        const double* row = rows_.data() + k * dim_;
        bool inside = true;
        for (std::size_t j = 1; j < dim_ && inside; ++j) inside = row[j] <= u[j];
        count += inside ? 1 : 0;
    }
    return static_cast<double>(count) / static_cast<double>(n_);
}

std::vector<double> EmpiricalCopula::tabulate(const Lattice& lattice) const {
    if (lattice.dim() != dim_) throw std::invalid_argument("empirical copula: lattice dimension mismatch");
    std::vector<double> counts(lattice.size(), 0.0);
    for (std::size_t k = 0; k < n_; ++k) {
        std::size_t flat = 0;
        bool inside = true;
        for (std::size_t j = 0; j < dim_ && inside; ++j) {
            const auto& nodes = lattice.axis(j);
            auto it = std::lower_bound(nodes.begin(), nodes.end(), rows_[k * dim_ + j]);
            if (it == nodes.end()) inside = false;
            else flat += static_cast<std::size_t>(it - nodes.begin()) * lattice.stride(j);
        }
        if (inside) counts[flat] += 1.0;
    }
    // prefix sums along every axis turn cell counts into orthant counts
    for (std::size_t j = 0; j < dim_; ++j) {
        const std::size_t stride = lattice.stride(j);
        const std::size_t len = lattice.axis(j).size();
        for (std::size_t k = 0; k < counts.size(); ++k) {
            const std::size_t pos = (k / stride) % len;
            if (pos > 0) counts[k] += counts[k - stride];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (double& c : counts) c *= inv_n;
    return counts;
}

double EmpiricalCopula::eval_checkerboard(Point u) const {
    if (u.size() != dim_) throw std::invalid_argument("empirical copula: dimension mismatch");
    const double n = static_cast<double>(n_);
    // rows whose cell starts at or beyond u[0] contribute nothing
    std::size_t end = 0;
    while (end < n_ && rows_[end * dim_] - 1.0 / n < u[0]) ++end;
    double total = 0.0;
    for (std::size_t k = 0; k < end; ++k) {
        double mass = 1.0;
        for (std::size_t j = 0; j < dim_ && mass > 0.0; ++j)
            mass *= std::clamp(n * (u[j] - rows_[k * dim_ + j]) + 1.0, 0.0, 1.0);
        total += mass;
    }
    return total / n;
}

namespace {

struct CheckerboardImpl final : QuasiCopulaFn::Impl {
    explicit CheckerboardImpl(EmpiricalCopula e) : copula(std::move(e)) {}
    double eval(Point u) const override { return copula.eval_checkerboard(u); }
    EmpiricalCopula copula;
};

struct EmpiricalImpl final : QuasiCopulaFn::Impl {
    explicit EmpiricalImpl(EmpiricalCopula e) : copula(std::move(e)) {}
    double eval(Point u) const override { return copula.eval(u); }
    std::vector<double> tabulate(const Lattice& lattice) const override { return copula.tabulate(lattice); }
    EmpiricalCopula copula;
};

}  // namespace

QuasiCopulaFn EmpiricalCopula::as_function(std::string label) const {
    return QuasiCopulaFn(dim_, std::move(label), std::make_shared<EmpiricalImpl>(*this));
}

QuasiCopulaFn EmpiricalCopula::as_checkerboard_function(std::string label) const {
    return QuasiCopulaFn(dim_, std::move(label), std::make_shared<CheckerboardImpl>(*this));
}

double empirical_copula_eval(const EmpiricalCopula& e, Point u) { return e.eval(u); }

}  // namespace depbound

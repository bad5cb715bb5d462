#include <catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "depbound/copula.hpp"

using namespace depbound;
using Catch::Approx;

namespace {

std::vector<double> pt(std::initializer_list<double> u) { return std::vector<double>(u); }

}  // namespace

TEST_CASE("frechet bounds") {
    CHECK(frechet_lower(pt({0.9, 0.9, 0.9})) == Approx(0.7));
    CHECK(frechet_upper(pt({0.9, 0.9, 0.9})) == 0.9);
    CHECK(frechet_lower(pt({1.0, 0.3})) == Approx(0.3));
    CHECK(frechet_upper(pt({1.0, 0.3})) == 0.3);
    CHECK(frechet_lower(pt({0.2, 0.3, 0.4})) == 0.0);
    CHECK(frechet_upper(pt({0.2, 0.3, 0.4})) == 0.2);
}

TEST_CASE("volumes") {
    CHECK(volume(upper_frechet_copula(2), Box({0, 0}, {1, 1})) == Approx(1.0));
    CHECK(volume(independence_copula(2), Box({0, 0}, {0.5, 0.5})) == Approx(0.25));
    CHECK(volume(lower_frechet_copula(3), Box({0.5, 0.5, 0.5}, {1, 1, 1})) == -0.5);
    CHECK_THROWS(Box({0.5}, {0.2}));
}

TEST_CASE("survival function") {
    CHECK(survival(independence_copula(3), pt({0.5, 0.5, 0.5})) == Approx(0.125));
    CHECK(survival(lower_frechet_copula(2), pt({0.0, 0.0})) == Approx(1.0));
    CHECK(survival(upper_frechet_copula(2), pt({0.3, 0.6})) == Approx(0.4));
    const auto s = SurvivalFn::of_copula(independence_copula(2));
    CHECK(s({0.2, 0.5}) == Approx(0.4));
    // survival copula of independence is independence
    const auto sc = survival_copula(independence_copula(2));
    CHECK(sc({0.3, 0.7}) == Approx(0.21));
}

TEST_CASE("convolutions") {
    const auto pi = independence_copula(2);
    const auto M = upper_frechet_copula(2), W = lower_frechet_copula(2);
    const auto mn = min_convolution(M, pi), mx = max_convolution(W, pi);
    for (double a : {0.1, 0.4, 0.8})
        for (double b : {0.2, 0.5, 0.9}) {
            CHECK(mn({a, b}) == Approx(a * b));
            CHECK(mx({a, b}) == Approx(a * b));
        }
    CHECK(min_convolution(W, pi)({0.5, 0.5}) == 0.0);
    CHECK_THROWS(min_convolution(M, independence_copula(3)));
}

TEST_CASE("quasi-copula checks") {
    CHECK(check_quasicopula(independence_copula(3), 8, 1e-12).passed());
    const auto bad = QuasiCopulaFn::from_function(2, "u1*u2^2", [](Point u) { return u[0] * u[1] * u[1]; });
    const auto rep = check_quasicopula(bad, 8, 1e-9);
    CHECK_FALSE(rep.boundary_ok());
    const auto W3 = lower_frechet_copula(3);
    CHECK(check_quasicopula(W3, 16, 1e-12).passed());
    CHECK(worst_cell_volume(W3, 2) == Approx(-0.5));
    CHECK(worst_cell_volume(independence_copula(3), 8) >= -1e-15);
}

TEST_CASE("lower orthant order on grids") {
    for (std::size_t d : {2u, 3u}) {
        CHECK(pointwise_leq_on_grid(lower_frechet_copula(d), upper_frechet_copula(d), 8));
        CHECK(pointwise_leq_on_grid(independence_copula(d), upper_frechet_copula(d), 8));
    }
    CHECK_FALSE(pointwise_leq_on_grid(upper_frechet_copula(2), lower_frechet_copula(2), 4));
}

TEST_CASE("lattices") {
    const auto u = Lattice::uniform(2, 4);
    CHECK(u.size() == 25);
    std::vector<double> p(2);
    u.point(7, p);
    CHECK(p[0] == 0.25);
    CHECK(p[1] == 0.5);
    const auto m = Lattice::midpoint(3, 2);
    CHECK(m.size() == 8);
    CHECK(m.axis(0) == std::vector<double>{0.25, 0.75});
    const auto a = Lattice::aligned(2, 4, pt({0.3, 0.5}));
    CHECK(a.axis(0).size() == 6);
    CHECK(a.axis(1).size() == 5);
    // tabulate agrees with pointwise evaluation
    const auto pi = independence_copula(2);
    const auto vals = pi.tabulate(a);
    for (std::size_t k = 0; k < a.size(); ++k) {
        a.point(k, p);
        CHECK(vals[k] == Approx(pi(p)));
    }
}

TEST_CASE("empirical copula") {
    auto e = EmpiricalCopula::from_pseudo_observations(2, {0.25, 0.25, 0.5, 0.5, 0.75, 0.75, 1.0, 1.0});
    CHECK(e.eval(pt({0.6, 0.6})) == 0.5);
    CHECK(empirical_copula_eval(e, pt({1.0, 1.0})) == 1.0);
    CHECK(e.eval(pt({0.0, 0.7})) == 0.0);
    // ranks are 1/n..n/n so boundary values are exact on the sample grid
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    std::vector<double> rows(3 * 200);
    for (auto& v : rows) v = z(rng);
    const auto r = EmpiricalCopula::from_samples(3, rows);
    CHECK(r.eval(pt({1.0, 1.0, 1.0})) == 1.0);
    CHECK(r.eval(pt({0.5, 1.0, 1.0})) == Approx(0.5));
    const auto grid = Lattice::uniform(3, 5);
    const auto tab = r.tabulate(grid);
    std::vector<double> p(3);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        grid.point(k, p);
        CHECK(tab[k] == Approx(r.eval(p)));
    }
    const auto path = std::filesystem::temp_directory_path() / "depbound_emp_copula.csv";
    r.save_csv(path);
    const auto back = EmpiricalCopula::load_csv(path);
    CHECK(back.size() == r.size());
    CHECK(back.eval(pt({0.3, 0.6, 0.9})) == r.eval(pt({0.3, 0.6, 0.9})));
    std::filesystem::remove(path);
}

TEST_CASE("t copula sampler") {
    const auto indep = sample_t_copula({2, 0.0, 1e6}, 100000, 11);
    CHECK(indep.eval(pt({0.5, 0.5})) == Approx(0.25).margin(0.01));
    const auto como = sample_t_copula({2, 0.999, 2.0}, 100000, 12);
    CHECK(como.eval(pt({0.5, 0.5})) == Approx(0.5).margin(0.01));
    const auto a = sample_t_copula({3, 0.9, 2.0}, 1000, 5), b = sample_t_copula({3, 0.9, 2.0}, 1000, 5);
    CHECK(std::equal(a.rows().begin(), a.rows().end(), b.rows().begin(), b.rows().end()));
    CHECK_THROWS(sample_t_copula({3, -0.2, 2.0}, 10, 1));
    CHECK_THROWS(sample_t_copula({3, 0.5, 0.0}, 10, 1));
}

TEST_CASE("copula models stay within the frechet bounds") {
    std::vector<double> u(3);
    const auto emp = sample_t_copula({3, 0.6, 2.0}, 20000, 8);
    const auto grid = Lattice::uniform(3, 16);
    const double slack = 2.0 / std::sqrt(20000.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        grid.point(k, u);
        const double w = frechet_lower(u), m = frechet_upper(u);
        const double pi = independence_copula(3)(u);
        CHECK(pi >= w - 1e-9);
        CHECK(pi <= m + 1e-9);
        const double e = emp.eval(u);
        CHECK(e >= w - slack);
        CHECK(e <= m + slack);
    }
}

TEST_CASE("checkerboard extension of the empirical copula") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    std::vector<double> rows(3 * 50);
    for (auto& v : rows) v = z(rng);
    const auto e = EmpiricalCopula::from_samples(3, rows);
    const auto cb = e.as_checkerboard_function();
    // uniform margins everywhere, not only on the rank grid
    for (double t : {0.0, 0.013, 0.37, 0.5, 0.981, 1.0}) CHECK(cb(pt({t, 1.0, 1.0})) == Approx(t).margin(1e-12));
    // agrees with the step function on the rank grid
    CHECK(cb(pt({0.4, 0.6, 0.8})) == Approx(e.eval(pt({0.4, 0.6, 0.8}))));
    CHECK(check_quasicopula(cb, 16, 1e-9).passed());
    CHECK(worst_cell_volume(cb, 16) >= -1e-12);
}

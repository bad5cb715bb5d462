#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "depbound/dependence_info.hpp"
#include "depbound/errors.hpp"

using namespace depbound;
using Catch::Approx;

namespace {

std::vector<double> pt(std::initializer_list<double> u) { return std::vector<double>(u); }

std::vector<double> random_point(std::mt19937_64& rng, std::size_t d) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> u(d);
    for (auto& x : u) x = unif(rng);
    return u;
}

}  // namespace

TEST_CASE("improved frechet bounds at a single prescribed point") {
    const Prescription p(3, {pt({0.5, 0.5, 0.5})}, {0.1});
    CHECK(improved_fh_lower(p, pt({0.6, 0.6, 0.6})) == Approx(0.1));
    CHECK(improved_fh_upper(p, pt({0.4, 0.4, 0.4})) == Approx(0.1));
    CHECK(improved_fh_lower(p, pt({0.5, 0.5, 0.5})) == Approx(0.1));
    CHECK(improved_fh_upper(p, pt({0.5, 0.5, 0.5})) == Approx(0.1));
}

TEST_CASE("empty prescription reduces to frechet bounds") {
    const Prescription p(3);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
        const auto u = random_point(rng, 3);
        CHECK(improved_fh_lower(p, u) == Approx(frechet_lower(u)));
        CHECK(improved_fh_upper(p, u) == Approx(frechet_upper(u)));
    }
}

TEST_CASE("infeasible prescriptions are rejected") {
    CHECK_THROWS_AS(Prescription(2, {pt({0.5, 0.5})}, {0.6}), InfeasibleError);
    CHECK_THROWS_AS(Prescription(2, {pt({0.5, 0.5})}, {-0.1}), InfeasibleError);
    // monotonicity across two points cannot hold
    CHECK_THROWS_AS(Prescription(2, {pt({0.5, 0.5}), pt({0.6, 0.6})}, {0.4, 0.2}), InfeasibleError);
    CHECK_NOTHROW(Prescription(2, {pt({0.5, 0.5}), pt({0.6, 0.6})}, {0.25, 0.36}));
}

TEST_CASE("prescription csv") {
    const auto path = std::filesystem::temp_directory_path() / "depbound_prescription.csv";
    {
        std::ofstream out(path);
        out << "0.5,0.5,0.25\n0.2,0.8,0.16\n";
    }
    const auto p = Prescription::load_csv(path, 2);
    CHECK(p.size() == 2);
    CHECK(p.values()[1] == 0.16);
    {
        std::ofstream out(path);
    }
    CHECK(Prescription::load_csv(path, 2).empty());
    std::filesystem::remove(path);
}

TEST_CASE("survival bounds from prescribed survival values") {
    const Prescription none(2);
    const auto b = improved_fh_survival(none, pt({0.3, 0.6}));
    CHECK(b.lower == Approx(0.1));
    CHECK(b.upper == Approx(0.4));
    const Prescription pinned(2, {pt({0.5, 0.5})}, {0.25});
    const auto c = improved_fh_survival(pinned, pt({0.5, 0.5}));
    CHECK(c.lower == Approx(0.25));
    CHECK(c.upper == Approx(0.25));
}

TEST_CASE("adding prescribed points never widens the bounds") {
    std::mt19937_64 rng(2);
    const auto pi = independence_copula(3);
    std::vector<std::vector<double>> pts;
    std::vector<double> vals, surv;
    for (int k = 0; k < 4; ++k) {
        pts.push_back(random_point(rng, 3));
        vals.push_back(pi(pts.back()));
        // survival function of independent uniforms
        surv.push_back((1.0 - pts.back()[0]) * (1.0 - pts.back()[1]) * (1.0 - pts.back()[2]));
    }
    const Prescription small(3, {pts[0], pts[1]}, {vals[0], vals[1]});
    const Prescription big(3, pts, vals);
    const Prescription small_s(3, {pts[0], pts[1]}, {surv[0], surv[1]}, true);
    const Prescription big_s(3, pts, surv, true);
    CHECK_THROWS_AS(Prescription(3, pts, surv), InfeasibleError);
    const auto grid = Lattice::uniform(3, 8);
    std::vector<double> u(3);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        grid.point(k, u);
        CHECK(improved_fh_lower(big, u) >= improved_fh_lower(small, u) - 1e-15);
        CHECK(improved_fh_upper(big, u) <= improved_fh_upper(small, u) + 1e-15);
        const auto sb = improved_fh_survival(big_s, u), ss = improved_fh_survival(small_s, u);
        CHECK(sb.lower >= ss.lower - 1e-15);
        CHECK(sb.upper <= ss.upper + 1e-15);
    }
}

TEST_CASE("distances") {
    const DistanceSpec ks{DistanceKind::KolmogorovSmirnov, 2.0, 8};
    CHECK(distance_eval(ks, lower_frechet_copula(2), upper_frechet_copula(2)) == Approx(0.5));
    const DistanceSpec cvm{DistanceKind::CramerVonMises, 2.0, 8};
    CHECK(distance_eval(cvm, independence_copula(2), independence_copula(2)) == 0.0);
    const DistanceSpec lp{DistanceKind::Lp, 3.0, 8};
    CHECK(distance_eval(lp, upper_frechet_copula(3), upper_frechet_copula(3)) == 0.0);
    CHECK(distance_eval(cvm, lower_frechet_copula(2), upper_frechet_copula(2)) > 0.0);
    CHECK_THROWS(validate(DistanceSpec{DistanceKind::Lp, 0.5, 8}));
    CHECK_THROWS(validate(DistanceSpec{DistanceKind::KolmogorovSmirnov, 2.0, 0}));
}

TEST_CASE("kolmogorov-smirnov ball closed form") {
    const DistanceBall ball{independence_copula(2), {}, 0.05};
    const auto b = ks_ball_bounds(ball, pt({0.5, 0.5}));
    CHECK(b.lower == Approx(0.20));
    CHECK(b.upper == Approx(0.30));
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
        const auto u = random_point(rng, 3);
        const DistanceBall zero{independence_copula(3), {}, 0.0};
        const auto z = ks_ball_bounds(zero, u);
        CHECK(z.lower == Approx(u[0] * u[1] * u[2]));
        CHECK(z.upper == Approx(u[0] * u[1] * u[2]));
        const DistanceBall one{independence_copula(3), {}, 1.0};
        const auto o = ks_ball_bounds(one, u);
        CHECK(o.lower == Approx(frechet_lower(u)));
        CHECK(o.upper == Approx(frechet_upper(u)));
    }
}

TEST_CASE("bisection matches the kolmogorov-smirnov closed form") {
    std::mt19937_64 rng(4);
    for (double delta : {0.001, 0.05}) {
        const DistanceBall ball{independence_copula(2), {DistanceKind::KolmogorovSmirnov, 2.0, 16}, delta};
        for (int k = 0; k < 50; ++k) {
            const auto u = random_point(rng, 2);
            const auto exact = ks_ball_bounds(ball, u);
            CHECK(distance_ball_lower(ball, u, 1e-7) == Approx(exact.lower).margin(1e-6));
            CHECK(distance_ball_upper(ball, u, 1e-7) == Approx(exact.upper).margin(1e-6));
        }
    }
}

TEST_CASE("bisection edge cases") {
    const auto u = pt({0.7, 0.6});
    const DistanceBall wide{independence_copula(2), {DistanceKind::CramerVonMises, 2.0, 16}, 1.0};
    CHECK(distance_ball_lower(wide, u) == Approx(frechet_lower(u)).margin(1e-6));
    CHECK(distance_ball_upper(wide, u) == Approx(frechet_upper(u)).margin(1e-6));
    const DistanceBall none{independence_copula(2), {DistanceKind::CramerVonMises, 2.0, 16}, 0.0};
    CHECK(distance_ball_lower(none, u) == Approx(0.42).margin(1e-5));
    CHECK(distance_ball_upper(none, u) == Approx(0.42).margin(1e-5));
}

TEST_CASE("cramer-von mises balls grow with the radius") {
    const auto u = pt({0.6, 0.5, 0.7});
    double prev_lo = 2.0, prev_hi = -1.0;
    for (double delta : {0.0, 1e-5, 1e-4, 1e-3}) {
        const DistanceBall ball{independence_copula(3), {DistanceKind::CramerVonMises, 2.0, 8}, delta};
        const double lo = distance_ball_lower(ball, u), hi = distance_ball_upper(ball, u);
        CHECK(lo <= prev_lo + 1e-6);
        CHECK(hi >= prev_hi - 1e-6);
        CHECK(lo >= frechet_lower(u) - 1e-9);
        CHECK(hi <= frechet_upper(u) + 1e-9);
        prev_lo = lo;
        prev_hi = hi;
    }
}

TEST_CASE("survival balls") {
    const DistanceBall zero{independence_copula(2), {DistanceKind::KolmogorovSmirnov, 2.0, 16}, 0.0};
    const auto z = distance_ball_survival(zero, pt({0.5, 0.5}));
    CHECK(z.lower == Approx(0.25).margin(1e-5));
    CHECK(z.upper == Approx(0.25).margin(1e-5));
    const DistanceBall one{independence_copula(2), {DistanceKind::KolmogorovSmirnov, 2.0, 16}, 1.0};
    const auto u = pt({0.3, 0.6});
    const auto o = distance_ball_survival(one, u);
    CHECK(o.lower == Approx(frechet_lower(pt({0.7, 0.4}))).margin(1e-5));
    CHECK(o.upper == Approx(frechet_upper(pt({0.7, 0.4}))).margin(1e-5));
    std::mt19937_64 rng(5);
    const DistanceBall mid{independence_copula(2), {DistanceKind::KolmogorovSmirnov, 2.0, 16}, 0.03};
    for (int k = 0; k < 20; ++k) {
        const auto v = random_point(rng, 2);
        const std::vector<double> r = {1.0 - v[0], 1.0 - v[1]};
        const double s = survival(independence_copula(2), v);
        const auto b = distance_ball_survival(mid, v, 1e-7);
        CHECK(b.lower == Approx(std::max(s - 0.03, frechet_lower(r))).margin(1e-6));
        CHECK(b.upper == Approx(std::min(s + 0.03, frechet_upper(r))).margin(1e-6));
    }
}

TEST_CASE("bounds are quasi-copulas") {
    std::mt19937_64 rng(6);
    for (std::size_t d : {2u, 3u}) {
        const auto pi = independence_copula(d);
        std::vector<std::vector<double>> pts;
        std::vector<double> vals;
        for (int k = 0; k < 3; ++k) {
            pts.push_back(random_point(rng, d));
            vals.push_back(pi(pts.back()));
        }
        const Prescription p(d, pts, vals);
        CHECK(check_quasicopula(improved_fh_lower_fn(p), 16, 1e-9).passed());
        CHECK(check_quasicopula(improved_fh_upper_fn(p), 16, 1e-9).passed());
        const DistanceBall ball{pi, {}, 0.04};
        CHECK(check_quasicopula(ks_ball_lower_fn(ball), 16, 1e-9).passed());
        CHECK(check_quasicopula(ks_ball_upper_fn(ball), 16, 1e-9).passed());
    }
}

#include "depbound/extremal.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/edmonds_karp_max_flow.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <stdexcept>

#include "depbound/errors.hpp"
#include "depbound/parallel.hpp"

namespace depbound {

// ------------------------------------------------------------ subset system

SubsetSystem::SubsetSystem(std::size_t dim, std::vector<std::vector<std::size_t>> subsets, ExtremalMode mode,
                           std::vector<Marginal> laws)
    : dim_(dim), subsets_(std::move(subsets)), mode_(mode), laws_(std::move(laws)) {
    if (dim_ < 1) throw std::invalid_argument("subset system: dimension must be positive");
    for (auto& j : subsets_) {
        if (j.empty()) throw std::invalid_argument("subset system: subsets must be nonempty");
        std::sort(j.begin(), j.end());
        j.erase(std::unique(j.begin(), j.end()), j.end());
        if (j.back() >= dim_) throw std::invalid_argument("subset system: index outside the dimension");
    }
    if (!laws_.empty() && laws_.size() != subsets_.size())
        throw std::invalid_argument("subset system: one law per subset is required");
}

std::size_t SubsetSystem::add_singletons(const std::vector<Marginal>& marginals) {
    if (marginals.size() != dim_) throw std::invalid_argument("add_singletons: need one marginal per coordinate");
    if (!subsets_.empty() && !has_laws()) throw std::invalid_argument("add_singletons: existing subsets carry no laws");
    std::vector<bool> present(dim_, false);
    for (const auto& j : subsets_)
        if (j.size() == 1) present[j[0]] = true;
    std::size_t added = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
        if (present[i]) continue;
        subsets_.push_back({i});
        laws_.push_back(marginals[i]);
        ++added;
    }
    return added;
}

const char* to_string(WeightSet set) {
    switch (set) {
        case WeightSet::LowerA: return "A_lower";
        case WeightSet::UpperA: return "A_upper";
        case WeightSet::LowerB: return "B_lower";
        case WeightSet::UpperB: return "B_upper";
    }
    return "?";
}

namespace {

void check_weights(const SubsetSystem& sys, const WeightVector& w) {
    if (w.size() != sys.size()) throw std::invalid_argument("weight vector length does not match the subset system");
    for (double a : w)
        if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("weights must be finite and nonnegative");
}

void check_cover(const SubsetSystem& sys) {
    std::vector<bool> covered(sys.dim(), false);
    for (const auto& j : sys.subsets())
        for (std::size_t i : j) covered[i] = true;
    for (std::size_t i = 0; i < sys.dim(); ++i)
        if (!covered[i])
            throw std::invalid_argument("subset system does not cover coordinate " + std::to_string(i + 1) +
                                        "; add singletons");
}

void check_mode(const SubsetSystem& sys, ExtremalMode expected) {
    if (sys.mode() != expected)
        throw std::invalid_argument(expected == ExtremalMode::Max ? "membership in A needs a system of maxima"
                                                                  : "membership in B needs a system of minima");
}

bool is_max_form(WeightSet set) { return set == WeightSet::LowerA || set == WeightSet::UpperA; }

// Scales a violating point so that its violation is at least one.
MembershipResult non_member(const SubsetSystem& sys, const WeightVector& w, WeightSet set, std::vector<double> x) {
    MembershipResult out;
    double v = inequality_violation(sys, w, set, x);
    if (v > 0.0 && v < 1.0) {
        for (double& xi : x) xi /= v;
        v = inequality_violation(sys, w, set, x);
    }
    out.member = false;
    out.witness = std::move(x);
    out.violation = v;
    return out;
}

// sum alpha_n max_{J_n} y >= sum y on R^d; the witness is returned in y.
MembershipResult transport_test(const SubsetSystem& sys, const WeightVector& w, WeightSet set) {
    const std::size_t d = sys.dim(), m = sys.size();
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    const double tol = 1e-12 * std::max(1.0, static_cast<double>(d));
    const double sign = is_max_form(set) ? 1.0 : -1.0;  // min form uses x = -y
    if (total < static_cast<double>(d) - tol) return non_member(sys, w, set, std::vector<double>(d, sign));
    if (total > static_cast<double>(d) + tol) return non_member(sys, w, set, std::vector<double>(d, -sign));

    using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
    using Graph = boost::adjacency_list<
        boost::vecS, boost::vecS, boost::directedS,
        boost::property<boost::vertex_color_t, boost::default_color_type,
                        boost::property<boost::vertex_predecessor_t, Traits::edge_descriptor>>,
        boost::property<boost::edge_capacity_t, double,
                        boost::property<boost::edge_residual_capacity_t, double,
                                        boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;
    // vertices: source, subsets 1..m, coordinates m+1..m+d, sink
    const std::size_t source = 0, sink = m + d + 1;
    Graph g(m + d + 2);
    auto capacity = boost::get(boost::edge_capacity, g);
    auto reverse = boost::get(boost::edge_reverse, g);
    auto residual = boost::get(boost::edge_residual_capacity, g);
    auto link = [&](std::size_t a, std::size_t b, double cap) {
        auto e = boost::add_edge(a, b, g).first;
        auto r = boost::add_edge(b, a, g).first;
        capacity[e] = cap;
        capacity[r] = 0.0;
        reverse[e] = r;
        reverse[r] = e;
    };
    const double unbounded = static_cast<double>(d) + 1.0;
    for (std::size_t n = 0; n < m; ++n) {
        link(source, 1 + n, w[n]);
        for (std::size_t i : sys.subsets()[n]) link(1 + n, 1 + m + i, unbounded);
    }
    for (std::size_t i = 0; i < d; ++i) link(1 + m + i, sink, 1.0);
    const double flow = boost::edmonds_karp_max_flow(g, source, sink);
    if (flow >= static_cast<double>(d) - tol) return {true, {}, 0.0};

    // min cut: coordinates reachable from the source in the residual graph
    std::vector<bool> reached(m + d + 2, false);
    std::deque<std::size_t> queue{source};
    reached[source] = true;
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        for (auto [it, end] = boost::out_edges(v, g); it != end; ++it) {
            const std::size_t t = boost::target(*it, g);
            if (!reached[t] && residual[*it] > 1e-12) {
                reached[t] = true;
                queue.push_back(t);
            }
        }
    }
    std::vector<double> x(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        if (reached[1 + m + i]) x[i] = -sign;
    return non_member(sys, w, set, std::move(x));
}

// sum_{n : i in J_n} alpha_n <= 1 for every coordinate i.
MembershipResult budget_test(const SubsetSystem& sys, const WeightVector& w, WeightSet set) {
    const std::size_t d = sys.dim();
    std::vector<double> load(d, 0.0);
    for (std::size_t n = 0; n < sys.size(); ++n)
        for (std::size_t i : sys.subsets()[n]) load[i] += w[n];
    const auto worst = std::max_element(load.begin(), load.end());
    if (*worst <= 1.0 + 1e-12) return {true, {}, 0.0};
    std::vector<double> x(d, 0.0);
    x[static_cast<std::size_t>(worst - load.begin())] = is_max_form(set) ? 1.0 : -1.0;
    return non_member(sys, w, set, std::move(x));
}

}  // namespace

double inequality_violation(const SubsetSystem& sys, const WeightVector& w, WeightSet set, Point x) {
    if (x.size() != sys.dim()) throw std::invalid_argument("inequality_violation: point dimension mismatch");
    double weighted = 0.0;
    const bool use_max = is_max_form(set);
    for (std::size_t n = 0; n < sys.size(); ++n) {
        const auto& j = sys.subsets()[n];
        double e = x[j[0]];
        for (std::size_t i : j) e = use_max ? std::max(e, x[i]) : std::min(e, x[i]);
        weighted += w[n] * e;
    }
    const double plain = std::accumulate(x.begin(), x.end(), 0.0);
    switch (set) {
        case WeightSet::LowerA: return plain - weighted;
        case WeightSet::UpperA: return weighted - plain;
        case WeightSet::UpperB: return weighted - plain;
        case WeightSet::LowerB: return plain - weighted;
    }
    return 0.0;
}

MembershipResult member_lower_A(const SubsetSystem& sys, const WeightVector& w) {
    check_mode(sys, ExtremalMode::Max);
    check_weights(sys, w);
    check_cover(sys);
    return transport_test(sys, w, WeightSet::LowerA);
}

MembershipResult member_upper_A(const SubsetSystem& sys, const WeightVector& w) {
    check_mode(sys, ExtremalMode::Max);
    check_weights(sys, w);
    return budget_test(sys, w, WeightSet::UpperA);
}

MembershipResult member_B(const SubsetSystem& sys, const WeightVector& w, bool upper_side) {
    check_mode(sys, ExtremalMode::Min);
    check_weights(sys, w);
    if (upper_side) {
        check_cover(sys);
        return transport_test(sys, w, WeightSet::UpperB);
    }
    return budget_test(sys, w, WeightSet::LowerB);
}

MembershipResult member(const SubsetSystem& sys, const WeightVector& w, WeightSet set) {
    switch (set) {
        case WeightSet::LowerA: return member_lower_A(sys, w);
        case WeightSet::UpperA: return member_upper_A(sys, w);
        case WeightSet::LowerB: return member_B(sys, w, false);
        case WeightSet::UpperB: return member_B(sys, w, true);
    }
    return {};
}

std::vector<Marginal> weighted_laws(const SubsetSystem& sys, const WeightVector& w) {
    if (!sys.has_laws()) throw std::invalid_argument("subset system carries no laws");
    check_weights(sys, w);
    std::vector<Marginal> out;
    for (std::size_t n = 0; n < sys.size(); ++n)
        if (w[n] > 0.0) out.push_back(scale(sys.laws()[n], w[n]));
    return out;
}

// ------------------------------------------------------------ weight search

namespace {

bool transport_type(WeightSet set) { return set == WeightSet::LowerA || set == WeightSet::UpperB; }

class CandidateFactory {
public:
    CandidateFactory(const SubsetSystem& sys, std::uint64_t seed) : sys_(sys), rng_(seed) {
        containing_.resize(sys.dim());
        for (std::size_t n = 0; n < sys.size(); ++n)
            for (std::size_t i : sys.subsets()[n]) containing_[i].push_back(n);
    }

    // Every coordinate sends its unit mass to one subset picked by `choose`.
    template <class Choose>
    WeightVector transport_anchor(Choose choose) const {
        WeightVector w(sys_.size(), 0.0);
        for (std::size_t i = 0; i < sys_.dim(); ++i) w[choose(containing_[i])] += 1.0;
        return w;
    }

    std::vector<WeightVector> transport_anchors() const {
        std::vector<WeightVector> out;
        const auto& subsets = sys_.subsets();
        out.push_back(transport_anchor([&](const std::vector<std::size_t>& c) {
            return *std::min_element(c.begin(), c.end(), [&](std::size_t a, std::size_t b) {
                return subsets[a].size() < subsets[b].size();
            });
        }));
        out.push_back(transport_anchor([&](const std::vector<std::size_t>& c) {
            return *std::min_element(c.begin(), c.end(), [&](std::size_t a, std::size_t b) {
                return subsets[a].size() > subsets[b].size();
            });
        }));
        WeightVector uniform(sys_.size(), 0.0);
        for (std::size_t i = 0; i < sys_.dim(); ++i)
            for (std::size_t n : containing_[i]) uniform[n] += 1.0 / static_cast<double>(containing_[i].size());
        out.push_back(uniform);
        return out;
    }

    // Dirichlet split of every coordinate's unit mass among its subsets.
    WeightVector random_transport() {
        static constexpr double kConcentrations[] = {0.2, 1.0, 5.0};
        std::uniform_int_distribution<int> pick(0, 2);
        std::gamma_distribution<double> gamma(kConcentrations[pick(rng_)], 1.0);
        WeightVector w(sys_.size(), 0.0);
        for (std::size_t i = 0; i < sys_.dim(); ++i) {
            const auto& c = containing_[i];
            std::vector<double> g(c.size());
            double total = 0.0;
            for (double& v : g) total += (v = gamma(rng_));
            if (!(total > 0.0)) {
                w[c[0]] += 1.0;
                continue;
            }
            for (std::size_t k = 0; k < c.size(); ++k) w[c[k]] += g[k] / total;
        }
        return w;
    }

    // Walks the subsets in `order`, giving each a share of its remaining budget.
    WeightVector greedy(const std::vector<std::size_t>& order, const std::vector<double>& fractions) const {
        WeightVector w(sys_.size(), 0.0);
        std::vector<double> used(sys_.dim(), 0.0);
        for (std::size_t k = 0; k < order.size(); ++k) {
            const std::size_t n = order[k];
            double budget = 1.0;
            for (std::size_t i : sys_.subsets()[n]) budget = std::min(budget, 1.0 - used[i]);
            const double a = std::max(0.0, budget) * fractions[k];
            w[n] = a;
            for (std::size_t i : sys_.subsets()[n]) used[i] += a;
        }
        return w;
    }

    std::vector<WeightVector> budget_anchors() const {
        std::vector<WeightVector> out;
        out.push_back(WeightVector(sys_.size(), 0.0));
        std::vector<std::size_t> order(sys_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        const std::vector<double> full(sys_.size(), 1.0);
        auto by_size = [&](bool small_first) {
            auto o = order;
            std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) {
                return small_first ? sys_.subsets()[a].size() < sys_.subsets()[b].size()
                                   : sys_.subsets()[a].size() > sys_.subsets()[b].size();
            });
            return o;
        };
        out.push_back(greedy(by_size(true), full));
        out.push_back(greedy(by_size(false), full));
        return out;
    }

    WeightVector random_budget() {
        std::vector<std::size_t> order(sys_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng_);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const bool boundary = unit(rng_) < 0.5;
        std::vector<double> fractions(sys_.size());
        for (double& f : fractions) f = boundary ? 1.0 : unit(rng_);
        return greedy(order, fractions);
    }

    // Largest feasible increase of w[n] under the per-coordinate budgets.
    double budget_slack(const WeightVector& w, std::size_t n) const {
        std::vector<double> load(sys_.dim(), 0.0);
        for (std::size_t k = 0; k < sys_.size(); ++k)
            for (std::size_t i : sys_.subsets()[k]) load[i] += w[k];
        double slack = std::numeric_limits<double>::infinity();
        for (std::size_t i : sys_.subsets()[n]) slack = std::min(slack, 1.0 - load[i]);
        return std::max(0.0, slack);
    }

private:
    const SubsetSystem& sys_;
    std::mt19937_64 rng_;
    std::vector<std::vector<std::size_t>> containing_;
};

struct Objective {
    std::function<double(const WeightVector&, std::size_t, bool&)> eval;
    bool minimize = true;
    bool better(double a, double b) const { return minimize ? a < b : a > b; }
};

SideResult search_side(const SubsetSystem& sys, WeightSet set, const Objective& objective, bool screened,
                       const SearchConfig& cfg) {
    SideResult out;
    out.set = set;
    const std::size_t full_N = cfg.ra.N;
    const std::size_t screen_N = screened ? std::min(cfg.screen_N, full_N) : full_N;
    CandidateFactory factory(sys, cfg.seed + 7919 * (static_cast<std::uint64_t>(set) + 1));

    const bool transport = transport_type(set);
    std::vector<WeightVector> anchors = transport ? factory.transport_anchors() : factory.budget_anchors();
    std::vector<WeightVector> pool = anchors;
    for (std::size_t k = 0; k < cfg.candidates; ++k)
        pool.push_back(transport ? factory.random_transport() : factory.random_budget());
    std::vector<WeightVector> feasible;
    for (auto& w : pool)
        if (member(sys, w, set)) feasible.push_back(std::move(w));
    if (feasible.empty()) throw InfeasibleError(std::string("no feasible weight candidate for ") + to_string(set));
    out.candidates = feasible.size();

    std::vector<double> score(feasible.size());
    std::vector<char> conv(feasible.size(), 1);
    parallel_for(feasible.size(), cfg.threads, [&](std::size_t k) {
        bool c = true;
        score[k] = objective.eval(feasible[k], screen_N, c);
        conv[k] = c;
    });
    out.evaluations += feasible.size();

    std::vector<std::size_t> rank(feasible.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(),
                     [&](std::size_t a, std::size_t b) { return objective.better(score[a], score[b]); });
    const std::size_t n_final = std::min(cfg.finalists, rank.size());

    // coordinatewise polish of the leading candidates at the screening resolution
    std::vector<WeightVector> polished(n_final);
    std::vector<std::size_t> polish_evals(n_final, 0);
    parallel_for(n_final, cfg.threads, [&](std::size_t f) {
        WeightVector w = feasible[rank[f]];
        double best = score[rank[f]];
        double step = 0.5;
        for (std::size_t round = 0; round < cfg.polish_rounds; ++round, step *= 0.5) {
            const std::size_t m = w.size();
            for (std::size_t n = 0; n < m; ++n) {
                if (transport) {
                    for (std::size_t k = 0; k < m; ++k) {
                        if (k == n || w[k] <= 0.0) continue;
                        WeightVector trial = w;
                        const double t = std::min(step, w[k]);
                        trial[n] += t;
                        trial[k] -= t;
                        if (!member(sys, trial, set)) continue;
                        bool c = true;
                        const double v = objective.eval(trial, screen_N, c);
                        ++polish_evals[f];
                        if (objective.better(v, best)) {
                            best = v;
                            w = std::move(trial);
                        }
                    }
                } else {
                    for (int dir : {+1, -1}) {
                        WeightVector trial = w;
                        trial[n] = dir > 0 ? w[n] + std::min(step, factory.budget_slack(w, n)) : std::max(0.0, w[n] - step);
                        if (trial[n] == w[n] || !member(sys, trial, set)) continue;
                        bool c = true;
                        const double v = objective.eval(trial, screen_N, c);
                        ++polish_evals[f];
                        if (objective.better(v, best)) {
                            best = v;
                            w = std::move(trial);
                        }
                    }
                }
            }
        }
        polished[f] = std::move(w);
    });
    for (std::size_t e : polish_evals) out.evaluations += e;

    // final evaluation: polished finalists plus every anchor, at full resolution
    std::vector<WeightVector> finals = polished;
    for (std::size_t k = 0; k < n_final; ++k) finals.push_back(feasible[rank[k]]);
    for (const auto& a : anchors)
        if (member(sys, a, set)) finals.push_back(a);
    std::vector<double> final_score(finals.size());
    std::vector<char> final_conv(finals.size(), 1);
    parallel_for(finals.size(), cfg.threads, [&](std::size_t k) {
        bool c = true;
        final_score[k] = objective.eval(finals[k], full_N, c);
        final_conv[k] = c;
    });
    out.evaluations += finals.size();
    std::size_t best = 0;
    for (std::size_t k = 1; k < finals.size(); ++k)
        if (objective.better(final_score[k], final_score[best])) best = k;
    out.value = final_score[best];
    out.weights = finals[best];
    out.converged = final_conv[best] != 0;
    return out;
}

void require_sign(const SubsetSystem& sys, bool nonnegative) {
    for (const auto& law : sys.laws()) {
        if (nonnegative && law.quantile(1e-9) < -1e-6)
            throw std::invalid_argument("the lower VaR bound from maxima needs nonnegative risks");
        if (!nonnegative && (!law.bounded_above() || law.support_max() > 1e-6))
            throw std::invalid_argument("the upper VaR bound from minima needs nonpositive risks");
    }
}

struct Inner {
    const SubsetSystem& sys;
    InnerSolver solver;
    const SearchConfig& cfg;

    RaConfig ra_at(std::size_t N) const {
        RaConfig rc = cfg.ra;
        rc.N = N;
        return rc;
    }

    // worst = true: worst-case VaR of the weighted sum; false: best-case VaR
    double var(const WeightVector& w, double alpha, bool worst, std::size_t N, bool& converged) const {
        const auto laws = weighted_laws(sys, w);
        if (laws.empty()) return 0.0;
        if (laws.size() == 1) return laws[0].quantile(alpha);
        if (solver == InnerSolver::StandardBounds) {
            const auto iv = standard_var_bounds(laws, alpha, cfg.var_tol, cfg.hyperplane);
            return worst ? iv.high : iv.low;
        }
        const RaConfig rc = ra_at(N);
        if (worst) {
            const auto r = ra_var_upper(laws, alpha, rc);
            converged = r.converged();
            return r.upper_part.value;
        }
        const auto r = ra_var_lower(laws, alpha, rc);
        converged = r.converged();
        return r.lower_part.value;
    }

    // lower = true: lower DF bound of the weighted sum at s; false: upper DF bound
    double df(const WeightVector& w, double s, bool lower, std::size_t N) const {
        const auto laws = weighted_laws(sys, w);
        if (laws.empty()) return s >= 0.0 ? 1.0 : 0.0;
        if (laws.size() == 1) return laws[0].cdf(s);
        if (solver == InnerSolver::StandardBounds) {
            const auto b = standard_bounds_sum(laws, s, cfg.hyperplane);
            return lower ? b.lower.value : b.upper.value;
        }
        const auto b = ra_df_bounds(laws, s, ra_at(N));
        return lower ? b.lower : b.upper;
    }
};

void check_system(const SubsetSystem& sys) {
    if (!sys.has_laws()) throw std::invalid_argument("subset system carries no laws");
    check_cover(sys);
}

}  // namespace

ReducedVar reduced_var(const SubsetSystem& sys, double alpha, InnerSolver inner, const SearchConfig& cfg) {
    check_system(sys);
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("reduced_var: level must lie in (0, 1)");
    validate(cfg.ra);
    const Inner in{sys, inner, cfg};
    const bool screened = inner == InnerSolver::RA && cfg.screen_N < cfg.ra.N;
    const bool max_mode = sys.mode() == ExtremalMode::Max;
    ReducedVar out;
    out.var.level = alpha;
    out.var.low = -std::numeric_limits<double>::infinity();
    out.var.high = std::numeric_limits<double>::infinity();
    if (cfg.compute_upper) {
        if (!max_mode) require_sign(sys, false);
        const WeightSet set = max_mode ? WeightSet::LowerA : WeightSet::LowerB;
        Objective obj{[&](const WeightVector& w, std::size_t N, bool& c) { return in.var(w, alpha, true, N, c); }, true};
        out.upper = search_side(sys, set, obj, screened, cfg);
        out.var.high = out.upper.value;
    }
    if (cfg.compute_lower) {
        if (max_mode) require_sign(sys, true);
        const WeightSet set = max_mode ? WeightSet::UpperA : WeightSet::UpperB;
        Objective obj{[&](const WeightVector& w, std::size_t N, bool& c) { return in.var(w, alpha, false, N, c); }, false};
        out.lower = search_side(sys, set, obj, screened, cfg);
        out.var.low = out.lower.value;
    }
    return out;
}

ReducedDf reduced_bound(const SubsetSystem& sys, double s, InnerSolver inner, const SearchConfig& cfg) {
    check_system(sys);
    validate(cfg.ra);
    const Inner in{sys, inner, cfg};
    const bool screened = inner == InnerSolver::RA && cfg.screen_N < cfg.ra.N;
    const bool max_mode = sys.mode() == ExtremalMode::Max;
    ReducedDf out;
    out.df = {0.0, 1.0};
    if (cfg.compute_lower) {
        if (!max_mode) require_sign(sys, false);
        const WeightSet set = max_mode ? WeightSet::LowerA : WeightSet::LowerB;
        Objective obj{[&](const WeightVector& w, std::size_t N, bool&) { return in.df(w, s, true, N); }, false};
        out.lower = search_side(sys, set, obj, screened, cfg);
        out.df.lower = out.lower.value;
    }
    if (cfg.compute_upper) {
        if (max_mode) require_sign(sys, true);
        const WeightSet set = max_mode ? WeightSet::UpperA : WeightSet::UpperB;
        Objective obj{[&](const WeightVector& w, std::size_t N, bool&) { return in.df(w, s, false, N); }, true};
        out.upper = search_side(sys, set, obj, screened, cfg);
        out.df.upper = out.upper.value;
    }
    return out;
}

}  // namespace depbound

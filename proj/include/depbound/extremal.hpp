#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "depbound/copula.hpp"
#include "depbound/marginals.hpp"
#include "depbound/rearrangement.hpp"
#include "depbound/var_bounds.hpp"

namespace depbound {

enum class ExtremalMode { Max, Min };

using WeightVector = std::vector<double>;

/// Subsets J_1..J_m of {0..d-1} (0-based) with the laws of the partial maxima
/// (mode Max) or minima (mode Min) over each subset.
class SubsetSystem {
public:
    /// Laws may be empty when only the membership oracles are needed.
    SubsetSystem(std::size_t dim, std::vector<std::vector<std::size_t>> subsets, ExtremalMode mode,
                 std::vector<Marginal> laws = {});

    /// Appends the singleton {i} with law marginals[i] for every coordinate that
    /// has no singleton yet. Returns the number of singletons added.
    std::size_t add_singletons(const std::vector<Marginal>& marginals);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return subsets_.size(); }
    ExtremalMode mode() const noexcept { return mode_; }
    const std::vector<std::vector<std::size_t>>& subsets() const noexcept { return subsets_; }
    const std::vector<Marginal>& laws() const noexcept { return laws_; }
    bool has_laws() const noexcept { return laws_.size() == subsets_.size(); }

private:
    std::size_t dim_;
    std::vector<std::vector<std::size_t>> subsets_;
    ExtremalMode mode_;
    std::vector<Marginal> laws_;
};

/// The four admissible weight sets: A-lower, A-upper (maxima), B-lower, B-upper (minima).
enum class WeightSet { LowerA, UpperA, LowerB, UpperB };

const char* to_string(WeightSet set);

/// Amount by which x violates the defining inequality of the set (positive
/// means violated). x is not checked against the set's domain.
double inequality_violation(const SubsetSystem& sys, const WeightVector& w, WeightSet set, Point x);

struct MembershipResult {
    bool member = false;
    /// For non-members: a point in the set's domain violating its inequality.
    std::vector<double> witness;
    double violation = 0.0;
    explicit operator bool() const { return member; }
};

/// Sum alpha_n max_{J_n} x >= sum x for all real x, decided as a transport
/// feasibility problem solved by max-flow.
MembershipResult member_lower_A(const SubsetSystem& sys, const WeightVector& w);
/// Sum alpha_n max_{J_n} x <= sum x for all nonnegative x: per-coordinate budgets.
MembershipResult member_upper_A(const SubsetSystem& sys, const WeightVector& w);
/// Upper: sum alpha_n min_{J_n} x <= sum x on all of R^d. Lower: >= on nonpositive x.
MembershipResult member_B(const SubsetSystem& sys, const WeightVector& w, bool upper_side);

MembershipResult member(const SubsetSystem& sys, const WeightVector& w, WeightSet set);

enum class InnerSolver { StandardBounds, RA };

struct SearchConfig {
    std::size_t candidates = 200;
    std::size_t polish_rounds = 3;
    std::uint64_t seed = 0;
    /// RA rows used while screening candidates; the final evaluation uses ra.N.
    std::size_t screen_N = 1000;
    std::size_t finalists = 3;
    RaConfig ra;
    HyperplaneConfig hyperplane;
    double var_tol = 1e-9;
    std::size_t threads = 1;
    bool compute_lower = true;
    bool compute_upper = true;
};

struct SideResult {
    double value = 0.0;
    WeightVector weights;
    WeightSet set = WeightSet::LowerA;
    std::size_t candidates = 0;
    std::size_t evaluations = 0;
    bool converged = true;
};

/// VaR interval for the sum. Sides that were not requested are reported as
/// -inf / +inf.
struct ReducedVar {
    VarInterval var;
    SideResult lower;
    SideResult upper;
    std::string label = "valid, possibly non-optimal";
};

struct ReducedDf {
    DfBounds df;
    SideResult lower;
    SideResult upper;
    std::string label = "valid, possibly non-optimal";
};

ReducedVar reduced_var(const SubsetSystem& sys, double alpha, InnerSolver inner, const SearchConfig& cfg);
ReducedDf reduced_bound(const SubsetSystem& sys, double s, InnerSolver inner, const SearchConfig& cfg);

/// Inner Frechet problem for fixed weights: the law set {scale(law_n, alpha_n)}
/// with zero weights dropped.
std::vector<Marginal> weighted_laws(const SubsetSystem& sys, const WeightVector& w);

}  // namespace depbound

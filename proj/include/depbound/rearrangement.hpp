#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "depbound/marginals.hpp"
#include "depbound/var_bounds.hpp"

namespace depbound {

struct RaConfig {
    std::size_t N = 10000;
    std::size_t max_sweeps = 1000;
    std::uint64_t seed = 0;
    /// Independent shuffles; seeds seed, seed+1, ...; the extremal bracket is reported.
    std::size_t restarts = 1;
    /// Stop once a sweep improves the objective by less than this.
    double objective_tol = 1e-9;
    double clip = 1e-9;
    /// When set, converged matrices are written here as CSV.
    std::filesystem::path dump_dir;
};

void validate(const RaConfig& cfg);

/// Row-sum statistic the rearrangement drives: the minimal row sum for the
/// worst-case VaR, the maximal row sum for the best-case VaR.
enum class RaObjective { MinRowSum, MaxRowSum };

struct RaMatrix {
    std::vector<std::vector<double>> columns;  // each of length N
    DiscretizationPart part = DiscretizationPart::Lower;
    double level = 0.0;
    bool converged = false;
    std::size_t iterations = 0;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t cols() const { return columns.size(); }
    std::vector<double> row_sums() const;
    double objective(RaObjective obj) const;
};

/// Discretizes on [level, 1] (MinRowSum) or [0, level] (MaxRowSum).
RaMatrix build_ra_matrix(const std::vector<Marginal>& marginals, double level, DiscretizationPart part,
                         RaObjective obj, const RaConfig& cfg);

/// Seeded independent shuffle of every column.
void shuffle_columns(RaMatrix& m, std::uint64_t seed);

/// Makes each column oppositely ordered to the sum of the others, sweep after
/// sweep, until nothing changes, the objective stalls, or max_sweeps.
/// on_sweep (optional) sees the matrix after every sweep.
void rearrange(RaMatrix& m, RaObjective obj, const RaConfig& cfg,
               const std::function<void(const RaMatrix&)>& on_sweep = {});

/// True when every column is oppositely ordered to the sum of the others.
bool is_antitonic(const RaMatrix& m);

struct RaRun {
    double value = 0.0;
    bool converged = false;
    std::size_t sweeps = 0;
};

struct RaResult {
    RaRun lower_part;
    RaRun upper_part;
    bool converged() const { return lower_part.converged && upper_part.converged; }
};

/// Worst-case VaR of the sum: minimal row sum of the rearranged matrices.
/// The upper part is the conservative value.
RaResult ra_var_upper(const std::vector<Marginal>& marginals, double level, const RaConfig& cfg);
/// Best-case VaR of the sum: maximal row sum. The lower part is the conservative value.
RaResult ra_var_lower(const std::vector<Marginal>& marginals, double level, const RaConfig& cfg);

/// VaR interval (best-case lower part, worst-case upper part).
VarInterval ra_var_interval(const std::vector<Marginal>& marginals, double level, const RaConfig& cfg);

/// DF bounds at s by bisection (depth 20) on the level of the RA VaR bounds.
DfBounds ra_df_bounds(const std::vector<Marginal>& marginals, double s, const RaConfig& cfg);

void save_matrix_csv(const RaMatrix& m, const std::filesystem::path& path);

}  // namespace depbound

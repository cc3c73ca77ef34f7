#pragma once

// eps-entropy bounds and metric mean dimension slopes.
//
// Upper bounds come from the spectral radius of the eps-grid occupancy matrix;
// lower bounds from explicit eps-separated sets (selected branches, cylinder
// midpoints, or a candidate grid thinned under the Bowen metric).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmd/spectral.hpp"
#include "mmd/transition.hpp"

namespace mmd {

/// Which grid convention feeds the upper bound. Tightest takes the smaller of
/// the two radii; each is a valid bound on its own.
enum class UpperMode { Closed, HalfOpen, Tightest };

struct UpperBound {
    double h = 0.0;
    double radius = 0.0;
    GridConvention convention = GridConvention::Closed;
    SpectralResult spectral;
    std::size_t cells = 0;
    std::uint64_t nnz = 0;
    bool truncation_warning = false;
};

/// log of the guarded spectral value of the grid matrix (clamped at 0).
UpperBound upper_bound(const TransitionSet& gamma, double eps, UpperMode mode = UpperMode::Closed,
                       const PowerOptions& power = {});
double eps_entropy_upper(const TransitionSet& gamma, double eps,
                         GridConvention convention = GridConvention::Closed);

struct LowerBound {
    double h = 0.0;
    std::size_t count = 0;
    bool flag = false;        // no usable branches or cylinders, or budget hit
    bool budget_hit = false;  // enumeration stopped early; value still a lower bound
};

/// Greedy left-to-right choice, inside one invariant block at a time, of
/// branches that are full on the block and pairwise at least eps apart.
LowerBound eps_entropy_lower_branches(const PiecewiseMap& map, double eps);

/// One point per depth-n cylinder (pruned at eps), thinned to an
/// eps-separated set for d_n; returns (1/n) log(count).
LowerBound eps_entropy_lower_cylinders(const PiecewiseMap& map, double eps, std::size_t depth,
                                       std::size_t budget = 10'000'000);

/// Size of the greedy keep-first eps-separated subset of the given orbits
/// (row-major, n coordinates each) under the max metric.
std::size_t greedy_separated(std::span<const double> orbits, std::size_t n, double eps);

/// base.lo, base.lo + spacing, ... up to base.hi (included).
std::vector<double> candidate_grid(Interval base, double spacing);

/// Orbit points x, g_{w_1} x, g_{w_2} g_{w_1} x, ... (n points) for every
/// candidate, row-major.
std::vector<double> word_orbits(std::span<const PiecewiseMap* const> generators,
                                std::span<const std::uint32_t> word,
                                std::span<const double> candidates, std::size_t n);

/// Separated count along one word over the eps/4 candidate grid.
std::size_t word_separated_count(std::span<const PiecewiseMap* const> generators,
                                 std::span<const std::uint32_t> word, double eps, std::size_t n);

/// (1/n) log of the separated count of the eps/4 candidate grid under d_n.
LowerBound eps_entropy_lower_grid(const PiecewiseMap& map, double eps, std::size_t n);

struct EntropyRecord {
    double eps = 0.0;
    std::size_t n_used = 0;
    double h_lower = 0.0;
    double h_upper = 0.0;
    std::string method_lower;
    std::string method_upper;
    std::vector<double> depth_values;  // cylinder estimate per scheduled depth
    bool trend_flag = false;           // depth values not monotone
    bool budget_flag = false;
    bool truncation_warning = false;
    bool spectral_fallback = false;
};

struct MdimEstimate {
    double slope_lower = 0.0;
    double slope_upper = 0.0;
    double residual_lower = 0.0;
    double residual_upper = 0.0;
    double eps_min = 0.0;
    double eps_max = 0.0;
    std::vector<EntropyRecord> records;
    std::optional<Prediction> predicted;
};

struct SandwichOptions {
    std::vector<std::size_t> depths{2, 3, 4};
    std::size_t budget = 10'000'000;
    UpperMode upper = UpperMode::Tightest;
    PowerOptions power;
    bool cylinders = true;
    /// Depth of the candidate-grid lower bound (0 disables it).
    std::size_t grid_depth = 0;
};

/// Lower bound at one scale for any transition set.
EntropyRecord lower_record(const TransitionSet& gamma, double eps, const SandwichOptions& opts);

MdimEstimate mdim_sandwich(const TransitionSet& gamma, std::span<const double> ladder,
                           const SandwichOptions& opts = {});

/// Fits slopes of h against log(1/eps) over existing records.
void fit_slopes(MdimEstimate& est);

struct IterateCheck {
    bool ok = false;
    std::size_t iterate_count = 0;  // separated set for T^k, depth n
    std::size_t base_count = 0;     // same set re-thinned for T, depth (n-1)k+1
};

IterateCheck iterate_count_detail(const PiecewiseMap& map, std::size_t k, std::size_t n, double eps);
bool iterate_count_check(const PiecewiseMap& map, std::size_t k, std::size_t n, double eps);

/// `epsilon,n,h_lower,h_upper,method_lower,method_upper`.
std::string entropy_csv(const MdimEstimate& est);

}  // namespace mmd

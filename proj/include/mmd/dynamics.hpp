#pragma once

// Piecewise-monotone interval maps given by branches with inverses, the
// Bowen metric, inverse-branch cylinders and a small catalog of examples.

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmd/geometry.hpp"

namespace mmd {

enum class Direction : std::int8_t { Increasing = 1, Decreasing = -1 };

struct Rect {
    Interval x;
    Interval y;
};

inline constexpr std::uint32_t kNoIndex = std::numeric_limits<std::uint32_t>::max();

/// Monotone piece of a map. The domain is open; `image` is the closure of the
/// forward image. Affine branches (family == kNoIndex) are evaluated from
/// domain and image alone.
struct Branch {
    Interval domain;
    Interval image;
    Direction direction = Direction::Increasing;
    double eta = 0.0;
    bool full = false;           // image is the whole base
    bool full_in_block = false;  // image is the whole invariant block
    std::uint32_t block = kNoIndex;
    std::uint32_t family = kNoIndex;
    std::uint64_t local = 0;
};

/// Shared evaluator for a group of branches; `local` selects the member.
struct BranchFamily {
    std::function<double(std::uint64_t local, double x)> forward;
    std::function<double(std::uint64_t local, double y)> inverse;  // may be empty
};

/// Closed x-interval sent to a single value.
struct FlatPiece {
    Interval domain;
    double value = 0.0;
};

class PiecewiseMap {
public:
    std::string name;
    Interval base{0.0, 1.0};
    std::vector<Branch> branches;     // sorted by domain, pairwise disjoint
    std::vector<BranchFamily> families;
    std::vector<FlatPiece> flats;
    std::vector<Rect> tails;          // over-approximation of truncated parts of the graph
    std::vector<Interval> blocks;     // invariant sub-intervals, if any
    std::function<double(double)> fallback;  // total evaluator off the branch domains
    std::optional<Prediction> predicted;

    /// Sorts branches, fills full flags and the critical set, and checks
    /// the structural invariants. Must be called after editing the fields.
    void finalize();

    double forward(std::size_t b, double x) const;
    double inverse(std::size_t b, double y) const;

    /// Branch containing x in its open domain, if any.
    std::optional<std::size_t> branch_at(double x) const;
    double evaluate(double x) const;

    /// Graph points at branch-domain endpoints not covered by another piece.
    const std::vector<std::pair<double, double>>& endpoint_graph() const { return endpoints_; }
    const CutOutSet& critical_set() const { return critical_; }

    /// Indices b in [first, last) with domain length >= min_len, in order.
    void long_branches(std::size_t first, std::size_t last, double min_len,
                       std::vector<std::size_t>& out) const;
    /// Index range of branches whose domains meet the open interval w.
    std::pair<std::size_t, std::size_t> branches_meeting(Interval w) const;

    double min_eta() const;

private:
    CutOutSet critical_;
    std::vector<std::pair<double, double>> endpoints_;
    std::vector<double> len_tree_;
    std::size_t tree_size_ = 0;

    void collect_long(std::size_t node, std::size_t lo, std::size_t hi, std::size_t first,
                      std::size_t last, double min_len, std::vector<std::size_t>& out) const;
};

using MapPtr = std::shared_ptr<const PiecewiseMap>;

MapPtr make_gauss(std::size_t k_max);
MapPtr make_mp_induced(double alpha, std::size_t n_max, double tol = 1e-12);
MapPtr make_boxes_map(std::size_t k_max, std::size_t piece_budget = 100000);
MapPtr make_sin_inv(std::size_t k_max = 2000);
MapPtr make_affine_full(const CutOutSet& cutout);
MapPtr make_identity(Interval base = {0.0, 1.0});
/// Affine full branches on the gaps of {e^-n} below e^-1, constant 0 on [e^-1, 1].
MapPtr make_closure_demo(std::size_t k_max = 700);

/// Thresholds u_0 = 1/2 > u_1 > ... of the induced Manneville-Pomeau map;
/// the left branch sends u_{m+1} to u_m.
std::vector<double> mp_thresholds(double alpha, std::size_t n_max, double tol);

/// Partial sums a_k of 6/(pi^2 j^2), a_0 = 0.
std::vector<double> boxes_endpoints(std::size_t k_max);
/// Evaluates the boxes map exactly (block search plus iteration of the sawtooth).
double boxes_evaluate(const std::vector<double>& a, double x);

/// Orbit x, T x, ..., T^{n-1} x.
std::vector<double> orbit(const PiecewiseMap& map, double x, std::size_t n);
double bowen_distance(const PiecewiseMap& map, double x, double y, std::size_t n);

struct Cylinder {
    std::size_t depth = 0;
    std::vector<std::uint32_t> word;
    Interval interval;
};

struct CylinderOptions {
    std::size_t node_budget = 10'000'000;
};

/// Visits every pruned cylinder of exactly `depth` in depth-first order.
/// Candidate branches are screened by domain length, which is exact when the
/// inverse branches do not expand (eta >= 1) and a heuristic otherwise.
using CylinderVisitor = std::function<void(const Interval& interval,
                                           const std::vector<std::uint32_t>& word)>;

/// Returns the number of nodes used. Throws BudgetExceeded with the count of
/// complete cylinders found so far.
std::size_t for_each_cylinder(const PiecewiseMap& map, std::size_t depth, double min_len,
                              const CylinderOptions& opts, const CylinderVisitor& visit);

std::vector<Cylinder> enumerate_cylinders(const PiecewiseMap& map, std::size_t depth,
                                          double min_len, const CylinderOptions& opts = {});

/// Samples |T x - T y| >= eta |x - y| on `pairs` random pairs per branch.
bool check_eta(const PiecewiseMap& map, std::size_t branch, std::size_t pairs = 1000,
               std::uint64_t seed = 1);
/// Max |forward(inverse(y)) - y| over `samples` points of the image.
double roundtrip_error(const PiecewiseMap& map, std::size_t branch, std::size_t samples = 1000);

}  // namespace mmd

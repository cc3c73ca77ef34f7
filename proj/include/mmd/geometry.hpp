#pragma once

// Compact subsets of the line: finite point sets and cut-out sets (an interval
// with a family of disjoint open gaps removed). Covering numbers and
// box-dimension fits live here as well.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mmd/error.hpp"

namespace mmd {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains_open(double x) const { return lo < x && x < hi; }
};

/// A theoretical value attached to a set or map, with a short note on where
/// it comes from.
struct Prediction {
    double value = 0.0;
    std::string provenance;
};

class PointSet {
public:
    PointSet() = default;

    /// Sorts and de-duplicates; bounds default to [min, max].
    static PointSet from_unsorted(std::vector<double> pts,
                                  std::optional<Interval> bounds = std::nullopt);

    std::span<const double> points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    const Interval& bounds() const { return bounds_; }

    std::optional<Prediction> known_dimension;

private:
    std::vector<double> points_;
    Interval bounds_;
};

/// Closed-form gap length generator, k = 1, 2, ... in non-increasing order.
using GapLaw = std::function<double(std::size_t)>;

/// A = base \ (union of gaps). Gaps are kept sorted by non-increasing length;
/// a copy sorted by position backs the covering computations.
class CutOutSet {
public:
    CutOutSet() = default;

    /// Finite explicit family. Throws mmd::Error on a violated invariant.
    static CutOutSet from_gaps(Interval base, std::vector<Interval> gaps);

    /// Infinite family given explicitly up to k_max plus a law for lengths.
    /// The remainder |base| - sum(gaps) is recorded as truncation.
    static CutOutSet truncated(Interval base, std::vector<Interval> gaps, GapLaw law);
    /// Same, with the law given as log(1/eps_k) so tiny gaps do not underflow.
    static CutOutSet truncated_log(Interval base, std::vector<Interval> gaps, GapLaw log_inverse_law);

    const Interval& base() const { return base_; }
    std::span<const Interval> gaps() const { return gaps_; }
    std::span<const Interval> gaps_by_position() const { return by_position_; }
    const std::optional<GapLaw>& gap_law() const { return law_; }

    /// Gap length for 1-based index k: explicit when retained, else from the law.
    std::optional<double> gap_length(std::size_t k) const;
    /// log(1/eps_k), exact even where eps_k underflows.
    std::optional<double> gap_log_inverse(std::size_t k) const;

    double remainder() const { return remainder_; }
    bool is_truncated() const { return truncated_; }
    /// Residue that is not explained by truncation: A has positive measure.
    bool positive_measure() const;
    double smallest_gap() const;

    /// Closed connected components of A, left to right (degenerate ones are points).
    std::vector<Interval> components() const;

    std::optional<Prediction> known_dimension;

private:
    Interval base_;
    std::vector<Interval> gaps_;
    std::vector<Interval> by_position_;
    std::optional<GapLaw> law_;
    bool log_law_ = false;
    double remainder_ = 0.0;
    bool truncated_ = false;
};

// Catalog sets.
PointSet harmonic_points(std::size_t n_max);        // {1/n : n <= n_max} U {0}
PointSet exponential_points(std::size_t n_max);     // {e^-n : 0 <= n <= n_max} U {0}
CutOutSet harmonic_cutout(std::size_t k_max);       // gaps (1/(k+1), 1/k)
CutOutSet exponential_cutout(std::size_t k_max);    // gaps (e^-k, e^-(k-1))
CutOutSet cantor_cutout(int depth);                 // middle thirds
CutOutSet interval_cutout(Interval base);           // no gaps
CutOutSet equal_pieces_cutout(Interval base, std::size_t pieces);

std::size_t covering_number(const PointSet& set, double eps);
std::size_t covering_number(const CutOutSet& set, double eps);

/// Greedy maximal eps-separated subset size (points at distance >= eps).
std::size_t separated_count(const PointSet& set, double eps);

struct DimBounds {
    double lower = 0.0;
    double upper = 0.0;
    /// Set when the gaps do not exhaust the base for reasons other than
    /// truncation; the finite-k proxy is then reported without a guarantee.
    bool positive_measure_warning = false;
};

/// inf/sup of log k / log(1/eps_k) over k in [k_first, k_last].
DimBounds cutout_dim_bounds(const CutOutSet& set, std::size_t k_first, std::size_t k_last);

struct ScaleCount {
    double eps = 0.0;
    std::size_t count = 0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // max |y - fit|
};

/// Least-squares line through (x_i, y_i).
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct BoxDimFit {
    double slope = 0.0;
    double residual = 0.0;
    std::vector<ScaleCount> table;
};

using CoverTarget = std::variant<PointSet, CutOutSet>;

BoxDimFit box_dimension_fit(const CoverTarget& set, std::span<const double> ladder);

/// Geometric ladder start, start/ratio, ... down to stop (inclusive within 1e-12).
std::vector<double> geometric_ladder(double start, double stop, double ratio);

/// Shortest round-trip decimal rendering without exponent.
std::string format_decimal(double v);

/// `epsilon,count` CSV.
std::string boxdim_csv(std::span<const ScaleCount> table);

}  // namespace mmd

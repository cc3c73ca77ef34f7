#pragma once

// Transition relations on I x I and their occupancy matrices on an eps-grid.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mmd/dynamics.hpp"

namespace mmd {

struct GraphOf {
    MapPtr map;
};

struct UnionOfGraphs {
    std::vector<MapPtr> maps;
};

/// (F x {a_1}) U {(a_1,a_2), ..., (a_{k-2},a_{k-1})} U ({a_{k-1}} x F).
struct Delayed {
    PointSet f;
    int k = 2;
    std::vector<double> anchors;
};

struct BoxSet {
    std::vector<Rect> boxes;  // closed
};

struct PointCloud {
    std::vector<std::pair<double, double>> points;
};

using Relation = std::variant<GraphOf, UnionOfGraphs, Delayed, BoxSet, PointCloud>;

struct TransitionSet {
    Interval base{0.0, 1.0};
    Relation relation;
    std::optional<Prediction> predicted;
};

TransitionSet graph_of(MapPtr map);
TransitionSet box_set(Interval base, std::vector<Rect> boxes);
TransitionSet point_cloud(Interval base, std::vector<std::pair<double, double>> points);
TransitionSet full_square(Interval base = {0.0, 1.0});
/// Base defaults to [0, 1] widened to hold F and the anchors.
TransitionSet delayed_transitions(const PointSet& f, int k, std::vector<double> anchors,
                                  std::optional<Interval> base = std::nullopt);
TransitionSet friedland_set(const std::vector<MapPtr>& maps);

/// Closed boxes [i eps, (i+1) eps] as written, or the half-open partition
/// [i eps, (i+1) eps) with a closed last cell.
enum class GridConvention { Closed, HalfOpen };

/// Sparse 0-1 matrix stored as merged column runs per row (0-based, inclusive).
class GridMatrix {
public:
    struct Run {
        std::uint32_t lo;
        std::uint32_t hi;
    };

    GridMatrix() = default;
    GridMatrix(std::size_t m, std::vector<std::uint64_t> row_ptr, std::vector<Run> runs);

    std::size_t size() const { return m_; }
    std::uint64_t nnz() const { return nnz_; }
    std::size_t run_count() const { return runs_.size(); }
    std::size_t work() const { return m_ + runs_.size(); }
    bool contains(std::size_t row, std::size_t col) const;
    std::span<const Run> row(std::size_t i) const {
        return {runs_.data() + row_ptr_[i], runs_.data() + row_ptr_[i + 1]};
    }

    /// y = A x and y = A^T x.
    void multiply(std::span<const double> x, std::span<double> y) const;
    void multiply_transpose(std::span<const double> x, std::span<double> y) const;
    std::vector<double> row_sums() const;
    std::vector<double> col_sums() const;
    GridMatrix transpose() const;

    template <class F>
    void for_each_in_row(std::size_t i, F&& f) const {
        for (const Run& r : row(i))
            for (std::size_t j = r.lo; j <= r.hi; ++j) f(j, 1.0);
    }

    /// 1-based (row, col) pairs in row-major order.
    std::vector<std::pair<std::size_t, std::size_t>> entries() const;
    /// `m m nnz` header then one `row col` line per entry, 1-based.
    std::string to_coordinate_text() const;

    double eps = 0.0;
    Interval base{0.0, 1.0};
    GridConvention convention = GridConvention::Closed;
    /// Truncated parts of the relation are resolved at this scale.
    bool truncation_warning = false;

private:
    std::size_t m_ = 0;
    std::uint64_t nnz_ = 0;
    std::vector<std::uint64_t> row_ptr_{0};
    std::vector<Run> runs_;
};

std::size_t grid_cells(Interval base, double eps);

GridMatrix grid_matrix(const TransitionSet& gamma, double eps,
                       GridConvention convention = GridConvention::Closed);

/// Builds a grid matrix from explicit 0-based entries (for tests and tooling).
GridMatrix grid_from_entries(std::size_t m,
                             std::span<const std::pair<std::size_t, std::size_t>> entries);

}  // namespace mmd

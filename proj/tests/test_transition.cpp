#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "mmd/transition.hpp"

using namespace mmd;

namespace {

using Cells = std::set<std::pair<std::size_t, std::size_t>>;

Cells cells_of(const GridMatrix& a) {
    Cells out;
    for (const auto& e : a.entries()) out.insert(e);
    return out;
}

// Closed boxes: a point on a grid line belongs to both neighbouring cells.
void mark_point(Cells& out, double x, double y, double eps, std::size_t m) {
    auto idx = [&](double v) {  // 1-based cells
        std::vector<std::size_t> r;
        const double u = v / eps;
        const auto f = static_cast<std::size_t>(std::floor(u));
        if (u == std::floor(u)) {
            if (f >= 1) r.push_back(f);
            if (f + 1 <= m) r.push_back(f + 1);
        } else {
            r.push_back(std::min(f + 1, m));
        }
        return r;
    };
    for (auto i : idx(x))
        for (auto j : idx(y)) out.insert({i, j});
}

}  // namespace

TEST_CASE("full square and identity occupancy") {
    const auto full = grid_matrix(full_square(), 0.25);
    CHECK(full.size() == 4);
    CHECK(full.nnz() == 16);

    const auto id = grid_matrix(graph_of(make_identity()), 0.25);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(id.contains(i, j) == (i + 1 >= j && j + 1 >= i));
    CHECK(id.to_coordinate_text().rfind("4 4 10\n1 1\n1 2\n", 0) == 0);
}

TEST_CASE("Gauss occupancy contains a dense sampling of the graph") {
    const auto g = make_gauss(64);
    const double eps = 0x1p-6;
    const auto a = grid_matrix(graph_of(g), eps);
    const auto exact = cells_of(a);
    Cells sampled;
    for (std::size_t k = 1; k <= 64; ++k) {
        const double lo = 1.0 / (k + 1), hi = 1.0 / k;
        for (int s = 1; s < 10000; ++s) {
            const double x = lo + (hi - lo) * s / 10000.0;
            mark_point(sampled, x, 1.0 / x - static_cast<double>(k), eps, a.size());
        }
    }
    std::size_t missing = 0;
    for (const auto& c : sampled) missing += exact.count(c) == 0;
    CHECK(missing == 0);
    // the exact method adds only boundary cells next to sampled ones
    for (const auto& [i, j] : exact) {
        bool near = false;
        for (long di = -1; di <= 1 && !near; ++di)
            for (long dj = -1; dj <= 1 && !near; ++dj)
                near = sampled.count({i + di, j + dj}) > 0;
        CHECK(near);
    }
}

TEST_CASE("per-branch occupancy respects the slope bound") {
    const auto m = make_affine_full(equal_pieces_cutout({0.0, 1.0}, 4));
    const auto a = grid_matrix(graph_of(m), 1.0 / 64.0, GridConvention::Closed);
    // slope 4: one branch meets at most 4 + 2 y-cells per x-cell, at most two branches per cell
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::size_t count = 0;
        for (const auto& r : a.row(i)) count += r.hi - r.lo + 1;
        CHECK(count <= 2 * (4 + 2));
    }
}

TEST_CASE("delayed transitions") {
    const auto f = PointSet::from_unsorted({0.0, 1.0});
    const auto d = delayed_transitions(f, 2, {0.5});
    const auto a = grid_matrix(d, 0.25);
    Cells expected;
    for (auto [x, y] : std::vector<std::pair<double, double>>{{0, .5}, {1, .5}, {.5, 0}, {.5, 1}})
        mark_point(expected, x, y, 0.25, 4);
    CHECK(cells_of(a) == expected);

    const auto harm = delayed_transitions(harmonic_points(100000), 2, {0.9});
    REQUIRE(harm.predicted);
    CHECK(harm.predicted->value == doctest::Approx(0.25));
    const auto single = delayed_transitions(PointSet::from_unsorted({0.3}), 3, {0.1, 0.2});
    CHECK(single.predicted->value == 0.0);
    CHECK_THROWS_AS(delayed_transitions(f, 3, {0.5, 0.5}), Error);
    CHECK_THROWS_AS(delayed_transitions(f, 1, {}), Error);
}

TEST_CASE("Friedland union of graphs") {
    const auto g = make_gauss(200);
    for (double eps : {0x1p-5, 0x1p-8}) {
        CHECK(cells_of(grid_matrix(friedland_set({g}), eps)) == cells_of(grid_matrix(graph_of(g), eps)));
        CHECK(cells_of(grid_matrix(friedland_set({g, g}), eps)) ==
              cells_of(grid_matrix(graph_of(g), eps)));
        const auto id = make_identity();
        auto u = cells_of(grid_matrix(graph_of(g), eps));
        const auto v = cells_of(grid_matrix(graph_of(id), eps));
        u.insert(v.begin(), v.end());
        CHECK(cells_of(grid_matrix(friedland_set({g, id}), eps)) == u);
    }
    CHECK_THROWS_AS(friedland_set({make_identity({0, 1}), make_identity({0, 2})}), Error);
}

TEST_CASE("monotonicity and refinement on random box sets") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int c = 0; c < 100; ++c) {
        std::vector<Rect> boxes;
        const int nb = 1 + c % 5;
        for (int b = 0; b < nb; ++b) {
            double x0 = u(rng), x1 = u(rng), y0 = u(rng), y1 = u(rng);
            if (c % 3 == 0) x1 = x0;  // segments and points too
            boxes.push_back({{std::min(x0, x1), std::max(x0, x1)}, {std::min(y0, y1), std::max(y0, y1)}});
        }
        auto bigger = boxes;
        bigger.push_back({{u(rng) * 0.5, 0.5 + u(rng) * 0.5}, {u(rng), 1.0}});
        const auto small_set = box_set({0.0, 1.0}, boxes);
        const auto big_set = box_set({0.0, 1.0}, bigger);
        for (int k = 3; k <= 7; ++k) {
            const double eps = std::ldexp(1.0, -k);
            const auto a = cells_of(grid_matrix(small_set, eps));
            const auto b = cells_of(grid_matrix(big_set, eps));
            for (const auto& e : a) REQUIRE(b.count(e) == 1);
            const auto fine = cells_of(grid_matrix(small_set, eps / 2.0));
            for (const auto& [i, j] : a) {
                // closed fine boxes tile the closed coarse box
                bool found = false;
                for (std::size_t di = 0; di < 2 && !found; ++di)
                    for (std::size_t dj = 0; dj < 2 && !found; ++dj)
                        found = fine.count({2 * i - di, 2 * j - dj}) > 0;
                REQUIRE(found);
            }
            // and every fine cell sits in an occupied coarse cell
            for (const auto& [p, q] : fine) REQUIRE(a.count({(p + 1) / 2, (q + 1) / 2}) == 1);
        }
    }
}

TEST_CASE("grid sizes and errors") {
    CHECK(grid_cells({0.0, 1.0}, 0.3) == 4);
    CHECK(grid_cells({0.0, 1.0}, 0.25) == 4);
    CHECK(grid_cells({-1.0, 1.0}, 0.5) == 4);
    CHECK_THROWS_AS(grid_matrix(full_square(), 0.6), Error);
    const auto g = make_gauss(64);
    CHECK_FALSE(grid_matrix(graph_of(g), 0x1p-6).truncation_warning);
    CHECK(grid_matrix(graph_of(g), 0x1p-13).truncation_warning);
}

TEST_CASE("transpose and coordinate export") {
    const auto a = grid_matrix(graph_of(make_gauss(30)), 0x1p-5);
    const auto t = a.transpose();
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) REQUIRE(a.contains(i, j) == t.contains(j, i));
    std::vector<double> x(a.size()), y1(a.size()), y2(a.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 1.0 + 0.01 * static_cast<double>(i);
    a.multiply_transpose(x, y1);
    t.multiply(x, y2);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y1[i] == doctest::Approx(y2[i]));
}

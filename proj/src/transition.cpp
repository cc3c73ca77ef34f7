#include "mmd/transition.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <set>

#include "mmd/parallel.hpp"

namespace mmd {

namespace {

// Values within this many cells of a grid line are treated as ambiguous and
// mapped to both neighbouring cells.
constexpr double kSnap = 1e-7;

struct Triple {
    std::uint32_t row;
    std::uint32_t lo;
    std::uint32_t hi;
};

struct End {
    double v;
    bool open;
};

class Grid {
public:
    Grid(Interval base, double eps, GridConvention conv)
        : lo_(base.lo), hi_(base.hi), eps_(eps), m_(grid_cells(base, eps)), conv_(conv) {}

    std::size_t m() const { return m_; }
    double cell_lo(std::size_t c) const { return lo_ + eps_ * static_cast<double>(c); }
    double cell_hi(std::size_t c) const {
        return c + 1 >= m_ ? hi_ : lo_ + eps_ * static_cast<double>(c + 1);
    }

    std::int64_t first(const End& e) const {
        const double u = (e.v - lo_) / eps_;
        const double n = std::nearbyint(u);
        auto rule = [&](double val, bool integral) {
            const double f = std::floor(val);
            if (conv_ == GridConvention::Closed && !e.open && integral) return f - 1.0;
            return f;
        };
        double r;
        if (u != n && std::abs(u - n) <= kSnap)
            r = std::min(rule(n, true), std::floor(u));
        else
            r = rule(u, u == n);
        return clamp(r);
    }

    std::int64_t last(const End& e) const {
        const double u = (e.v - lo_) / eps_;
        const double n = std::nearbyint(u);
        auto rule = [&](double val, bool integral) {
            const double f = std::floor(val);
            if (e.open && integral) return f - 1.0;
            return f;
        };
        double r;
        if (u != n && std::abs(u - n) <= kSnap)
            r = std::max(rule(n, true), std::floor(u));
        else
            r = rule(u, u == n);
        return clamp(r);
    }

    /// Inclusive cell range meeting the interval, or an empty range (first > last).
    std::pair<std::int64_t, std::int64_t> cells(const End& a, const End& b) const {
        if (a.v > b.v || (a.v == b.v && (a.open || b.open))) return {1, 0};
        return {first(a), last(b)};
    }

private:
    std::int64_t clamp(double r) const {
        if (r < 0.0) return 0;
        if (r > static_cast<double>(m_ - 1)) return static_cast<std::int64_t>(m_ - 1);
        return static_cast<std::int64_t>(r);
    }

    double lo_, hi_, eps_;
    std::size_t m_;
    GridConvention conv_;
};

void add_rect(const Grid& g, const End& x0, const End& x1, const End& y0, const End& y1,
              std::vector<Triple>& out) {
    const auto [r0, r1] = g.cells(x0, x1);
    const auto [c0, c1] = g.cells(y0, y1);
    if (r0 > r1 || c0 > c1) return;
    for (std::int64_t r = r0; r <= r1; ++r)
        out.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c0),
                       static_cast<std::uint32_t>(c1)});
}

void add_point(const Grid& g, double x, double y, std::vector<Triple>& out) {
    add_rect(g, {x, false}, {x, false}, {y, false}, {y, false}, out);
}

void add_branch(const Grid& g, GridConvention conv, const PiecewiseMap& map, std::size_t bi,
                std::vector<Triple>& out) {
    const Branch& b = map.branches[bi];
    const bool inc = b.direction == Direction::Increasing;
    const double lim_lo = inc ? b.image.lo : b.image.hi;  // limit at domain.lo
    const double lim_hi = inc ? b.image.hi : b.image.lo;  // limit at domain.hi
    const auto [c0, c1] = g.cells({b.domain.lo, true}, {b.domain.hi, true});
    for (std::int64_t c = c0; c <= c1; ++c) {
        const auto cu = static_cast<std::size_t>(c);
        const double xl = g.cell_lo(cu), xr = g.cell_hi(cu);
        End yl, yr;  // values at the left and right ends of the restricted domain
        if (xr <= b.domain.lo || xl >= b.domain.hi) {
            // Cell reached only through snapping: keep the nearby limit point.
            const double v = xr <= b.domain.lo ? lim_lo : lim_hi;
            add_point(g, 0.5 * (xl + xr), v, out);
            continue;
        }
        if (xl > b.domain.lo)
            yl = {map.forward(bi, xl), false};
        else
            yl = {lim_lo, true};
        if (xr < b.domain.hi) {
            const bool open_right = conv == GridConvention::HalfOpen && cu + 1 < g.m();
            yr = {map.forward(bi, xr), open_right};
        } else {
            yr = {lim_hi, true};
        }
        const End lo = inc ? yl : yr;
        const End hi = inc ? yr : yl;
        const auto [r0, r1] = g.cells(lo, hi);
        if (r0 <= r1)
            out.push_back({static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(r0),
                           static_cast<std::uint32_t>(r1)});
    }
}

void add_map(const Grid& g, GridConvention conv, const PiecewiseMap& map, double eps,
             std::vector<Triple>& out, bool& warning) {
    const std::size_t nb = map.branches.size();
    const std::size_t chunks = std::min<std::size_t>(nb, 256);
    std::vector<std::vector<Triple>> parts(chunks);
    parallel_for(chunks, [&](std::size_t k) {
        const std::size_t a = nb * k / chunks, z = nb * (k + 1) / chunks;
        for (std::size_t bi = a; bi < z; ++bi) add_branch(g, conv, map, bi, parts[k]);
    });
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    for (const auto& f : map.flats)
        add_rect(g, {f.domain.lo, false}, {f.domain.hi, false}, {f.value, false},
                 {f.value, false}, out);
    for (const auto& t : map.tails) {
        add_rect(g, {t.x.lo, false}, {t.x.hi, false}, {t.y.lo, false}, {t.y.hi, false}, out);
    }
    // Below the shortest retained branch the tails hide structure at this scale.
    if (!map.tails.empty()) {
        double shortest = std::numeric_limits<double>::infinity();
        for (const auto& b : map.branches) shortest = std::min(shortest, b.domain.length());
        if (eps < shortest) warning = true;
    }
    for (const auto& [x, y] : map.endpoint_graph()) add_point(g, x, y, out);
}

GridMatrix assemble(std::size_t m, std::vector<Triple>& triples) {
    std::vector<std::uint64_t> count(m + 1, 0);
    for (const auto& t : triples) ++count[t.row + 1];
    for (std::size_t i = 0; i < m; ++i) count[i + 1] += count[i];
    std::vector<GridMatrix::Run> bucket(triples.size());
    {
        std::vector<std::uint64_t> pos(count.begin(), count.end() - 1);
        for (const auto& t : triples) bucket[pos[t.row]++] = {t.lo, t.hi};
    }
    triples.clear();
    triples.shrink_to_fit();
    std::vector<std::uint64_t> row_ptr(m + 1, 0);
    std::vector<std::size_t> kept(m, 0);
    parallel_for(m, [&](std::size_t i) {
        auto b = bucket.begin() + static_cast<std::ptrdiff_t>(count[i]);
        auto e = bucket.begin() + static_cast<std::ptrdiff_t>(count[i + 1]);
        if (b == e) return;
        std::sort(b, e, [](const GridMatrix::Run& x, const GridMatrix::Run& y) {
            return x.lo < y.lo || (x.lo == y.lo && x.hi < y.hi);
        });
        auto w = b;
        for (auto r = b + 1; r != e; ++r) {
            if (static_cast<std::uint64_t>(r->lo) <= static_cast<std::uint64_t>(w->hi) + 1)
                w->hi = std::max(w->hi, r->hi);
            else
                *++w = *r;
        }
        kept[i] = static_cast<std::size_t>(w - b) + 1;
    });
    for (std::size_t i = 0; i < m; ++i) row_ptr[i + 1] = row_ptr[i] + kept[i];
    std::vector<GridMatrix::Run> runs(row_ptr[m]);
    for (std::size_t i = 0; i < m; ++i)
        std::copy_n(bucket.begin() + static_cast<std::ptrdiff_t>(count[i]), kept[i],
                    runs.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]));
    return GridMatrix(m, std::move(row_ptr), std::move(runs));
}

// Box dimension of a finite set from covering numbers over the scales it resolves.
double fitted_dimension(const PointSet& f) {
    const auto pts = f.points();
    if (pts.size() < 2) return 0.0;
    const double span = pts.back() - pts.front();
    double gap = span;
    for (std::size_t i = 1; i < pts.size(); ++i) gap = std::min(gap, pts[i] - pts[i - 1]);
    const double lo_eps = std::max(gap * 4.0, span * 1e-7);
    const double hi_eps = span / 16.0;
    if (!(lo_eps < hi_eps / 8.0)) return 0.0;
    const auto ladder = geometric_ladder(hi_eps, lo_eps, 2.0);
    return std::max(0.0, box_dimension_fit(f, ladder).slope);
}

}  // namespace

TransitionSet graph_of(MapPtr map) {
    TransitionSet t;
    t.base = map->base;
    t.predicted = map->predicted;
    t.relation = GraphOf{std::move(map)};
    return t;
}

TransitionSet box_set(Interval base, std::vector<Rect> boxes) {
    for (const auto& r : boxes)
        if (r.x.lo < base.lo || r.x.hi > base.hi || r.y.lo < base.lo || r.y.hi > base.hi ||
            r.x.lo > r.x.hi || r.y.lo > r.y.hi)
            throw Error("box outside base");
    TransitionSet t;
    t.base = base;
    t.relation = BoxSet{std::move(boxes)};
    return t;
}

TransitionSet point_cloud(Interval base, std::vector<std::pair<double, double>> points) {
    for (const auto& [x, y] : points)
        if (!base.contains(x) || !base.contains(y)) throw Error("point outside base");
    TransitionSet t;
    t.base = base;
    t.relation = PointCloud{std::move(points)};
    return t;
}

TransitionSet full_square(Interval base) {
    auto t = box_set(base, {{base, base}});
    t.predicted = Prediction{1.0, "full shift on an interval: box dimension 1"};
    return t;
}

TransitionSet delayed_transitions(const PointSet& f, int k, std::vector<double> anchors,
                                  std::optional<Interval> base) {
    if (k < 2) throw Error("delayed: k must be at least 2");
    if (f.empty()) throw Error("empty set");
    if (anchors.size() != static_cast<std::size_t>(k - 1))
        throw Error("delayed: need k-1 anchors");
    {
        auto sorted = anchors;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw Error("delayed: anchors must be distinct");
    }
    Interval b = base.value_or(Interval{0.0, 1.0});
    if (!base) {
        b.lo = std::min({b.lo, f.points().front(), *std::min_element(anchors.begin(), anchors.end())});
        b.hi = std::max({b.hi, f.points().back(), *std::max_element(anchors.begin(), anchors.end())});
    }
    TransitionSet t;
    t.base = b;
    if (f.known_dimension) {
        t.predicted = Prediction{f.known_dimension->value / static_cast<double>(k),
                                 "delayed full shift: (" + f.known_dimension->provenance + ")/k"};
    } else {
        t.predicted = Prediction{fitted_dimension(f) / static_cast<double>(k),
                                 "delayed full shift: fitted dim_B(F)/k"};
    }
    t.relation = Delayed{f, k, std::move(anchors)};
    return t;
}

TransitionSet friedland_set(const std::vector<MapPtr>& maps) {
    if (maps.empty()) throw Error("friedland: no generators");
    for (const auto& m : maps)
        if (m->base.lo != maps.front()->base.lo || m->base.hi != maps.front()->base.hi)
            throw Error("friedland: generators must share the base");
    TransitionSet t;
    t.base = maps.front()->base;
    t.relation = UnionOfGraphs{maps};
    return t;
}

std::size_t grid_cells(Interval base, double eps) {
    if (!(eps > 0.0)) throw Error("eps must be positive");
    const double q = base.length() / eps;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(q - 1e-9)));
}

GridMatrix grid_matrix(const TransitionSet& gamma, double eps, GridConvention convention) {
    if (!(eps > 0.0)) throw Error("eps must be positive");
    if (eps > gamma.base.length() / 2.0 * (1.0 + 1e-12)) throw Error("eps too large for the base");
    if (gamma.base.length() / eps > 4.0e9) throw Error("grid too fine");
    const Grid g(gamma.base, eps, convention);
    std::vector<Triple> triples;
    bool warning = false;
    std::visit(
        [&](const auto& rel) {
            using R = std::decay_t<decltype(rel)>;
            if constexpr (std::is_same_v<R, GraphOf>) {
                add_map(g, convention, *rel.map, eps, triples, warning);
            } else if constexpr (std::is_same_v<R, UnionOfGraphs>) {
                for (const auto& m : rel.maps) add_map(g, convention, *m, eps, triples, warning);
            } else if constexpr (std::is_same_v<R, Delayed>) {
                const double a1 = rel.anchors.front(), alast = rel.anchors.back();
                for (double x : rel.f.points()) {
                    add_point(g, x, a1, triples);
                    add_point(g, alast, x, triples);
                }
                for (std::size_t i = 0; i + 1 < rel.anchors.size(); ++i)
                    add_point(g, rel.anchors[i], rel.anchors[i + 1], triples);
            } else if constexpr (std::is_same_v<R, BoxSet>) {
                for (const auto& r : rel.boxes)
                    add_rect(g, {r.x.lo, false}, {r.x.hi, false}, {r.y.lo, false},
                             {r.y.hi, false}, triples);
            } else {
                for (const auto& [x, y] : rel.points) add_point(g, x, y, triples);
            }
        },
        gamma.relation);
    GridMatrix out = assemble(g.m(), triples);
    out.eps = eps;
    out.base = gamma.base;
    out.convention = convention;
    out.truncation_warning = warning;
    return out;
}

GridMatrix grid_from_entries(std::size_t m,
                             std::span<const std::pair<std::size_t, std::size_t>> entries) {
    std::vector<Triple> triples;
    triples.reserve(entries.size());
    for (const auto& [r, c] : entries) {
        if (r >= m || c >= m) throw Error("entry out of range");
        triples.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c),
                           static_cast<std::uint32_t>(c)});
    }
    return assemble(m, triples);
}

GridMatrix::GridMatrix(std::size_t m, std::vector<std::uint64_t> row_ptr, std::vector<Run> runs)
    : m_(m), row_ptr_(std::move(row_ptr)), runs_(std::move(runs)) {
    for (const auto& r : runs_) nnz_ += static_cast<std::uint64_t>(r.hi) - r.lo + 1;
}

bool GridMatrix::contains(std::size_t i, std::size_t j) const {
    const auto r = row(i);
    auto it = std::partition_point(r.begin(), r.end(), [j](const Run& x) { return x.hi < j; });
    return it != r.end() && it->lo <= j;
}

void GridMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    std::vector<long double> prefix(m_ + 1, 0.0L);
    for (std::size_t i = 0; i < m_; ++i) prefix[i + 1] = prefix[i] + x[i];
    parallel_for((m_ + 4095) / 4096, [&](std::size_t blk) {
        const std::size_t a = blk * 4096, z = std::min(m_, a + 4096);
        for (std::size_t i = a; i < z; ++i) {
            long double s = 0.0L;
            for (const auto& r : row(i)) {
                if (r.hi - r.lo < 32) {
                    double d = 0.0;
                    for (std::uint32_t j = r.lo; j <= r.hi; ++j) d += x[j];
                    s += d;
                } else {
                    s += prefix[r.hi + 1] - prefix[r.lo];
                }
            }
            y[i] = static_cast<double>(s);
        }
    });
}

void GridMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
    std::vector<long double> diff(m_ + 1, 0.0L);
    for (std::size_t i = 0; i < m_; ++i) {
        for (const auto& r : row(i)) {
            diff[r.lo] += x[i];
            diff[r.hi + 1] -= x[i];
        }
    }
    long double s = 0.0L;
    for (std::size_t j = 0; j < m_; ++j) {
        s += diff[j];
        y[j] = static_cast<double>(s);
    }
}

std::vector<double> GridMatrix::row_sums() const {
    std::vector<double> out(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
        for (const auto& r : row(i)) out[i] += static_cast<double>(r.hi - r.lo + 1);
    return out;
}

std::vector<double> GridMatrix::col_sums() const {
    std::vector<std::int64_t> diff(m_ + 1, 0);
    for (const auto& r : runs_) {
        ++diff[r.lo];
        --diff[r.hi + 1];
    }
    std::vector<double> out(m_, 0.0);
    std::int64_t s = 0;
    for (std::size_t j = 0; j < m_; ++j) {
        s += diff[j];
        out[j] = static_cast<double>(s);
    }
    return out;
}

GridMatrix GridMatrix::transpose() const {
    std::vector<std::vector<std::size_t>> starts(m_ + 1), stops(m_ + 1);
    for (std::size_t i = 0; i < m_; ++i)
        for (const auto& r : row(i)) {
            starts[r.lo].push_back(i);
            stops[r.hi + 1].push_back(i);
        }
    std::set<std::size_t> active;
    std::vector<Triple> triples;
    for (std::size_t j = 0; j < m_; ++j) {
        for (auto i : stops[j]) active.erase(i);
        for (auto i : starts[j]) active.insert(i);
        auto it = active.begin();
        while (it != active.end()) {
            std::size_t lo = *it, hi = lo;
            for (++it; it != active.end() && *it == hi + 1; ++it) hi = *it;
            triples.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(lo),
                               static_cast<std::uint32_t>(hi)});
        }
    }
    GridMatrix t = assemble(m_, triples);
    t.eps = eps;
    t.base = base;
    t.convention = convention;
    t.truncation_warning = truncation_warning;
    return t;
}

std::vector<std::pair<std::size_t, std::size_t>> GridMatrix::entries() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(nnz_);
    for (std::size_t i = 0; i < m_; ++i)
        for (const auto& r : row(i))
            for (std::size_t j = r.lo; j <= r.hi; ++j) out.emplace_back(i + 1, j + 1);
    return out;
}

std::string GridMatrix::to_coordinate_text() const {
    std::string out = std::to_string(m_) + " " + std::to_string(m_) + " " + std::to_string(nnz_) + "\n";
    for (std::size_t i = 0; i < m_; ++i)
        for (const auto& r : row(i))
            for (std::size_t j = r.lo; j <= r.hi; ++j) {
                out += std::to_string(i + 1);
                out += ' ';
                out += std::to_string(j + 1);
                out += '\n';
            }
    return out;
}

}  // namespace mmd

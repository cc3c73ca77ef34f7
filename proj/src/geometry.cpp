#include "mmd/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "mmd/parallel.hpp"

namespace mmd {

namespace {

constexpr double kCeilSlack = 1e-9;

std::size_t cells_for(double length, double eps) {
    if (length <= 0.0) return 1;
    const double q = length / eps;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(q - kCeilSlack)));
}

}  // namespace

PointSet PointSet::from_unsorted(std::vector<double> pts, std::optional<Interval> bounds) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    PointSet out;
    if (!pts.empty()) out.bounds_ = {pts.front(), pts.back()};
    if (bounds) {
        if (!pts.empty() && (pts.front() < bounds->lo || pts.back() > bounds->hi))
            throw Error("point outside declared bounds");
        out.bounds_ = *bounds;
    }
    out.points_ = std::move(pts);
    return out;
}

CutOutSet CutOutSet::from_gaps(Interval base, std::vector<Interval> gaps) {
    if (!(base.lo < base.hi)) throw Error("degenerate base interval");
    for (const auto& g : gaps) {
        if (!(g.lo < g.hi)) throw Error("empty gap");
        if (g.lo < base.lo || g.hi > base.hi) throw Error("gap outside base");
    }
    CutOutSet s;
    s.base_ = base;
    s.by_position_ = gaps;
    std::sort(s.by_position_.begin(), s.by_position_.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (std::size_t i = 1; i < s.by_position_.size(); ++i)
        if (s.by_position_[i].lo < s.by_position_[i - 1].hi) throw Error("overlapping gaps");
    s.gaps_ = std::move(gaps);
    std::stable_sort(s.gaps_.begin(), s.gaps_.end(), [](const Interval& a, const Interval& b) {
        return a.length() > b.length();
    });
    double total = 0.0;
    for (const auto& g : s.by_position_) total += g.length();
    s.remainder_ = std::max(0.0, base.length() - total);
    return s;
}

CutOutSet CutOutSet::truncated(Interval base, std::vector<Interval> gaps, GapLaw law) {
    CutOutSet s = from_gaps(base, std::move(gaps));
    s.law_ = std::move(law);
    s.truncated_ = true;
    return s;
}

CutOutSet CutOutSet::truncated_log(Interval base, std::vector<Interval> gaps, GapLaw log_inverse_law) {
    CutOutSet s = truncated(base, std::move(gaps), std::move(log_inverse_law));
    s.log_law_ = true;
    return s;
}

std::optional<double> CutOutSet::gap_length(std::size_t k) const {
    if (k == 0) return std::nullopt;
    if (k <= gaps_.size()) return gaps_[k - 1].length();
    if (law_) return log_law_ ? std::exp(-(*law_)(k)) : (*law_)(k);
    return std::nullopt;
}

std::optional<double> CutOutSet::gap_log_inverse(std::size_t k) const {
    if (k == 0) return std::nullopt;
    if (k <= gaps_.size()) return -std::log(gaps_[k - 1].length());
    if (law_) return log_law_ ? (*law_)(k) : -std::log((*law_)(k));
    return std::nullopt;
}

bool CutOutSet::positive_measure() const {
    if (truncated_) return false;
    return remainder_ > 1e-12 * base_.length();
}

double CutOutSet::smallest_gap() const {
    return gaps_.empty() ? 0.0 : gaps_.back().length();
}

std::vector<Interval> CutOutSet::components() const {
    std::vector<Interval> out;
    out.reserve(by_position_.size() + 1);
    double cursor = base_.lo;
    for (const auto& g : by_position_) {
        out.push_back({cursor, g.lo});
        cursor = g.hi;
    }
    out.push_back({cursor, base_.hi});
    return out;
}

PointSet harmonic_points(std::size_t n_max) {
    std::vector<double> pts;
    pts.reserve(n_max + 1);
    pts.push_back(0.0);
    for (std::size_t n = 1; n <= n_max; ++n) pts.push_back(1.0 / static_cast<double>(n));
    auto s = PointSet::from_unsorted(std::move(pts), Interval{0.0, 1.0});
    s.known_dimension = Prediction{0.5, "box dimension of {1/n}"};
    return s;
}

PointSet exponential_points(std::size_t n_max) {
    std::vector<double> pts;
    pts.push_back(0.0);
    for (std::size_t n = 0; n <= n_max; ++n) pts.push_back(std::exp(-static_cast<double>(n)));
    auto s = PointSet::from_unsorted(std::move(pts), Interval{0.0, 1.0});
    s.known_dimension = Prediction{0.0, "box dimension of {e^-n}"};
    return s;
}

CutOutSet harmonic_cutout(std::size_t k_max) {
    std::vector<Interval> gaps;
    gaps.reserve(k_max);
    for (std::size_t k = 1; k <= k_max; ++k) {
        const double kk = static_cast<double>(k);
        gaps.push_back({1.0 / (kk + 1.0), 1.0 / kk});
    }
    auto s = CutOutSet::truncated({0.0, 1.0}, std::move(gaps), [](std::size_t k) {
        const double kk = static_cast<double>(k);
        return 1.0 / kk - 1.0 / (kk + 1.0);
    });
    s.known_dimension = Prediction{0.5, "box dimension of {1/n}"};
    return s;
}

CutOutSet exponential_cutout(std::size_t k_max) {
    k_max = std::min<std::size_t>(k_max, 700);
    std::vector<Interval> gaps;
    for (std::size_t k = 1; k <= k_max; ++k) {
        const double kk = static_cast<double>(k);
        gaps.push_back({std::exp(-kk), std::exp(-(kk - 1.0))});
    }
    // e^-(k-1) - e^-k = e^-(k-1) (1 - e^-1)
    auto s = CutOutSet::truncated_log({0.0, 1.0}, std::move(gaps), [](std::size_t k) {
        return static_cast<double>(k) - 1.0 - std::log1p(-std::exp(-1.0));
    });
    s.known_dimension = Prediction{0.0, "box dimension of {e^-n}"};
    return s;
}

CutOutSet cantor_cutout(int depth) {
    if (depth < 1 || depth > 30) throw Error("cantor depth out of range");
    std::vector<Interval> gaps;
    std::vector<Interval> pieces{{0.0, 1.0}};
    for (int level = 1; level <= depth; ++level) {
        std::vector<Interval> next;
        next.reserve(pieces.size() * 2);
        for (const auto& p : pieces) {
            const double third = p.length() / 3.0;
            gaps.push_back({p.lo + third, p.hi - third});
            next.push_back({p.lo, p.lo + third});
            next.push_back({p.hi - third, p.hi});
        }
        pieces = std::move(next);
    }
    auto s = CutOutSet::truncated({0.0, 1.0}, std::move(gaps), [](std::size_t k) {
        int level = 0;
        while ((std::size_t{1} << level) <= k) ++level;
        return std::pow(3.0, -level);
    });
    s.known_dimension = Prediction{std::log(2.0) / std::log(3.0), "middle-thirds Cantor set"};
    return s;
}

CutOutSet interval_cutout(Interval base) {
    auto s = CutOutSet::from_gaps(base, {});
    s.known_dimension = Prediction{1.0, "interval"};
    return s;
}

CutOutSet equal_pieces_cutout(Interval base, std::size_t pieces) {
    if (pieces == 0) throw Error("need at least one piece");
    std::vector<Interval> gaps;
    const double w = base.length() / static_cast<double>(pieces);
    for (std::size_t i = 0; i < pieces; ++i) {
        const double lo = base.lo + w * static_cast<double>(i);
        const double hi = i + 1 == pieces ? base.hi : base.lo + w * static_cast<double>(i + 1);
        gaps.push_back({lo, hi});
    }
    auto s = CutOutSet::from_gaps(base, std::move(gaps));
    s.known_dimension = Prediction{0.0, "finite set"};
    return s;
}

std::size_t covering_number(const PointSet& set, double eps) {
    if (set.empty()) throw Error("empty set");
    if (!(eps > 0.0)) throw Error("eps must be positive");
    std::size_t count = 0;
    double end = -std::numeric_limits<double>::infinity();
    for (double p : set.points()) {
        if (p > end) {
            ++count;
            end = p + eps;
        }
    }
    return count;
}

std::size_t covering_number(const CutOutSet& set, double eps) {
    if (!(eps > 0.0)) throw Error("eps must be positive");
    if (!(set.base().lo < set.base().hi)) throw Error("empty set");
    std::size_t count = 0;
    double end = -std::numeric_limits<double>::infinity();
    double cursor = set.base().lo;
    auto visit = [&](double lo, double hi) {
        if (hi <= end + kCeilSlack * eps) return;  // same rounding allowance as cells_for
        if (lo > end) {
            const std::size_t n = cells_for(hi - lo, eps);
            count += n;
            end = lo + eps * static_cast<double>(n);
        } else {
            const std::size_t n = cells_for(hi - end, eps);
            count += n;
            end += eps * static_cast<double>(n);
        }
    };
    for (const auto& g : set.gaps_by_position()) {
        visit(cursor, g.lo);
        cursor = g.hi;
    }
    visit(cursor, set.base().hi);
    return count;
}

std::size_t separated_count(const PointSet& set, double eps) {
    if (set.empty()) throw Error("empty set");
    std::size_t count = 0;
    double last = -std::numeric_limits<double>::infinity();
    for (double p : set.points()) {
        if (p - last >= eps) {
            ++count;
            last = p;
        }
    }
    return count;
}

DimBounds cutout_dim_bounds(const CutOutSet& set, std::size_t k_first, std::size_t k_last) {
    if (k_first == 0 || k_first > k_last) throw Error("empty k range");
    DimBounds out;
    out.lower = std::numeric_limits<double>::infinity();
    out.upper = -std::numeric_limits<double>::infinity();
    for (std::size_t k = k_first; k <= k_last; ++k) {
        const auto inv = set.gap_log_inverse(k);
        if (!inv) throw Error("gap length unavailable");
        if (!(*inv > 0.0)) throw Error("scale not sub-unit");
        const double v = std::log(static_cast<double>(k)) / *inv;
        out.lower = std::min(out.lower, v);
        out.upper = std::max(out.upper, v);
    }
    out.positive_measure_warning = set.positive_measure();
    return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw Error("fit needs at least two points");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw Error("degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < n; ++i)
        f.residual = std::max(f.residual, std::abs(y[i] - (f.intercept + f.slope * x[i])));
    return f;
}

BoxDimFit box_dimension_fit(const CoverTarget& set, std::span<const double> ladder) {
    if (ladder.size() < 4) throw Error("ladder too short");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (!(ladder[i] < ladder[i - 1])) throw Error("ladder not decreasing");
    BoxDimFit out;
    out.table.resize(ladder.size());
    parallel_for(ladder.size(), [&](std::size_t i) {
        const std::size_t c =
            std::visit([&](const auto& s) { return covering_number(s, ladder[i]); }, set);
        out.table[i] = {ladder[i], c};
    });
    std::vector<double> x, y;
    for (const auto& row : out.table) {
        x.push_back(std::log(1.0 / row.eps));
        y.push_back(std::log(static_cast<double>(row.count)));
    }
    const auto f = fit_line(x, y);
    out.slope = f.slope;
    out.residual = f.residual;
    return out;
}

std::vector<double> geometric_ladder(double start, double stop, double ratio) {
    if (!(ratio > 1.0)) throw Error("ladder ratio must exceed 1");
    if (!(start > 0.0) || !(stop > 0.0) || stop > start) throw Error("bad ladder bounds");
    std::vector<double> out;
    for (double e = start; e >= stop * (1.0 - 1e-12); e /= ratio) out.push_back(e);
    return out;
}

std::string format_decimal(double v) {
    char buf[128];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

std::string boxdim_csv(std::span<const ScaleCount> table) {
    std::string out = "epsilon,count\n";
    for (const auto& row : table) {
        out += format_decimal(row.eps);
        out += ',';
        out += std::to_string(row.count);
        out += '\n';
    }
    return out;
}

}  // namespace mmd

#include "mmd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mmd {

namespace {

constexpr double kFullTol = 1e-9;

bool same_interval(const Interval& a, const Interval& b, double scale) {
    return std::abs(a.lo - b.lo) <= kFullTol * scale && std::abs(a.hi - b.hi) <= kFullTol * scale;
}

double clamp_to(const Interval& iv, double v) { return std::clamp(v, iv.lo, iv.hi); }

}  // namespace

void PiecewiseMap::finalize() {
    std::sort(branches.begin(), branches.end(),
              [](const Branch& a, const Branch& b) { return a.domain.lo < b.domain.lo; });
    const double scale = base.length();
    std::vector<Interval> domains;
    domains.reserve(branches.size());
    for (std::size_t i = 0; i < branches.size(); ++i) {
        auto& b = branches[i];
        if (!(b.domain.lo < b.domain.hi)) throw Error(name + ": empty branch domain");
        if (b.domain.lo < base.lo || b.domain.hi > base.hi) throw Error(name + ": branch outside base");
        if (i > 0 && b.domain.lo < branches[i - 1].domain.hi)
            throw Error(name + ": overlapping branch domains");
        if (b.image.lo < base.lo - kFullTol * scale || b.image.hi > base.hi + kFullTol * scale)
            throw Error(name + ": branch image leaves base");
        if (b.family != kNoIndex && b.family >= families.size())
            throw Error(name + ": unknown branch family");
        b.full = same_interval(b.image, base, scale);
        b.full_in_block = b.block != kNoIndex && b.block < blocks.size() &&
                          same_interval(b.image, blocks[b.block], scale);
        domains.push_back(b.domain);
    }
    critical_ = CutOutSet::from_gaps(base, std::move(domains));

    endpoints_.clear();
    std::vector<double> xs;
    xs.reserve(2 * branches.size() + 2);
    xs.push_back(base.lo);
    xs.push_back(base.hi);
    for (const auto& b : branches) {
        xs.push_back(b.domain.lo);
        xs.push_back(b.domain.hi);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (double x : xs) {
        if (branch_at(x)) continue;
        bool on_flat = false;
        for (const auto& f : flats) on_flat = on_flat || f.domain.contains(x);
        if (on_flat) continue;
        endpoints_.emplace_back(x, evaluate(x));
    }

    tree_size_ = 1;
    while (tree_size_ < std::max<std::size_t>(1, branches.size())) tree_size_ <<= 1;
    len_tree_.assign(2 * tree_size_, 0.0);
    for (std::size_t i = 0; i < branches.size(); ++i)
        len_tree_[tree_size_ + i] = branches[i].domain.length();
    for (std::size_t i = tree_size_ - 1; i >= 1; --i)
        len_tree_[i] = std::max(len_tree_[2 * i], len_tree_[2 * i + 1]);
}

double PiecewiseMap::forward(std::size_t bi, double x) const {
    const Branch& b = branches[bi];
    if (b.family == kNoIndex) {
        const double t = (x - b.domain.lo) / b.domain.length();
        const double v = b.direction == Direction::Increasing
                             ? b.image.lo + t * b.image.length()
                             : b.image.hi - t * b.image.length();
        return clamp_to(b.image, v);
    }
    return clamp_to(b.image, families[b.family].forward(b.local, x));
}

double PiecewiseMap::inverse(std::size_t bi, double y) const {
    const Branch& b = branches[bi];
    if (b.family == kNoIndex) {
        const double t = (y - b.image.lo) / b.image.length();
        const double v = b.direction == Direction::Increasing
                             ? b.domain.lo + t * b.domain.length()
                             : b.domain.hi - t * b.domain.length();
        return clamp_to(b.domain, v);
    }
    const auto& fam = families[b.family];
    if (fam.inverse) return clamp_to(b.domain, fam.inverse(b.local, y));
    double lo = b.domain.lo, hi = b.domain.hi;
    const bool inc = b.direction == Direction::Increasing;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const bool below = fam.forward(b.local, mid) < y;
        if (below == inc) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::optional<std::size_t> PiecewiseMap::branch_at(double x) const {
    auto it = std::partition_point(branches.begin(), branches.end(),
                                   [x](const Branch& b) { return b.domain.lo < x; });
    if (it == branches.begin()) return std::nullopt;
    --it;
    if (x < it->domain.hi) return static_cast<std::size_t>(it - branches.begin());
    return std::nullopt;
}

double PiecewiseMap::evaluate(double x) const {
    x = clamp_to(base, x);
    if (auto b = branch_at(x)) return forward(*b, x);
    for (const auto& f : flats)
        if (f.domain.contains(x)) return f.value;
    if (!fallback) throw Error(name + ": no value assigned off the branches");
    return clamp_to(base, fallback(x));
}

std::pair<std::size_t, std::size_t> PiecewiseMap::branches_meeting(Interval w) const {
    auto first = std::partition_point(branches.begin(), branches.end(),
                                      [&](const Branch& b) { return b.domain.hi <= w.lo; });
    auto last = std::partition_point(first, branches.end(),
                                     [&](const Branch& b) { return b.domain.lo < w.hi; });
    return {static_cast<std::size_t>(first - branches.begin()),
            static_cast<std::size_t>(last - branches.begin())};
}

void PiecewiseMap::collect_long(std::size_t node, std::size_t lo, std::size_t hi,
                                std::size_t first, std::size_t last, double min_len,
                                std::vector<std::size_t>& out) const {
    if (hi <= first || lo >= last || len_tree_[node] < min_len) return;
    if (hi - lo == 1) {
        out.push_back(lo);
        return;
    }
    const std::size_t mid = (lo + hi) / 2;
    collect_long(2 * node, lo, mid, first, last, min_len, out);
    collect_long(2 * node + 1, mid, hi, first, last, min_len, out);
}

void PiecewiseMap::long_branches(std::size_t first, std::size_t last, double min_len,
                                 std::vector<std::size_t>& out) const {
    out.clear();
    if (first >= last || branches.empty()) return;
    collect_long(1, 0, tree_size_, first, std::min(last, branches.size()), min_len, out);
}

double PiecewiseMap::min_eta() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& b : branches) m = std::min(m, b.eta);
    return branches.empty() ? 0.0 : m;
}

std::vector<double> orbit(const PiecewiseMap& map, double x, std::size_t n) {
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.push_back(x);
        if (j + 1 < n) x = map.evaluate(x);
    }
    return out;
}

double bowen_distance(const PiecewiseMap& map, double x, double y, std::size_t n) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        d = std::max(d, std::abs(x - y));
        if (j + 1 < n) {
            x = map.evaluate(x);
            y = map.evaluate(y);
        }
    }
    return d;
}

namespace {

struct CylinderWalk {
    const PiecewiseMap& map;
    std::size_t depth;
    double min_len;
    std::size_t budget;
    const CylinderVisitor& visit;
    std::size_t nodes = 0;
    std::size_t found = 0;
    std::vector<std::uint32_t> word;
    std::vector<std::vector<std::size_t>> scratch;

    double pull_back(double z) const {
        for (std::size_t i = word.size(); i-- > 0;) z = map.inverse(word[i], z);
        return z;
    }

    double image_end(std::size_t b, double x, bool at_domain_lo, bool at_domain_hi) const {
        const Branch& br = map.branches[b];
        const bool inc = br.direction == Direction::Increasing;
        if (at_domain_lo) return inc ? br.image.lo : br.image.hi;
        if (at_domain_hi) return inc ? br.image.hi : br.image.lo;
        return map.forward(b, x);
    }

    struct Piece {
        std::size_t b;
        double lo;
        double hi;
    };

    void extend(const Interval& w) {
        const std::size_t j = word.size();
        auto [first, last] = map.branches_meeting(w);
        auto& cand = scratch[j];
        map.long_branches(first, last, min_len, cand);
        std::vector<Piece> pieces;
        pieces.reserve(cand.size());
        for (std::size_t b : cand) {
            const Branch& br = map.branches[b];
            const double lo = std::max(w.lo, br.domain.lo);
            const double hi = std::min(w.hi, br.domain.hi);
            if (hi - lo < min_len || hi < lo) continue;
            pieces.push_back({b, lo, hi});
        }
        if (!pieces.empty()) visit_range(pieces, 0, pieces.size() - 1);
    }

    // The composed pull-back is monotone on the current image, so a run of
    // pieces whose hull pulls back shorter than min_len holds no survivor.
    void visit_range(const std::vector<Piece>& pieces, std::size_t i, std::size_t k) {
        if (!word.empty() && i < k) {
            const double p = pull_back(pieces[i].lo), q = pull_back(pieces[k].hi);
            if (std::abs(q - p) < min_len) return;
            const std::size_t mid = i + (k - i) / 2;
            visit_range(pieces, i, mid);
            visit_range(pieces, mid + 1, k);
            return;
        }
        if (i < k) {
            for (std::size_t t = i; t <= k; ++t) visit_range(pieces, t, t);
            return;
        }
        visit_piece(pieces[i]);
    }

    void visit_piece(const Piece& piece) {
        const std::size_t j = word.size();
        const Branch& br = map.branches[piece.b];
        const double lo = piece.lo, hi = piece.hi;
        Interval c{lo, hi};
        if (j > 0) {
            const double p = pull_back(lo), q = pull_back(hi);
            c = {std::min(p, q), std::max(p, q)};
            if (c.length() < min_len) return;
        }
        if (++nodes > budget) throw BudgetExceeded("cylinder budget exceeded", found);
        word.push_back(static_cast<std::uint32_t>(piece.b));
        if (j + 1 == depth) {
            ++found;
            visit(c, word);
        } else {
            const double a = image_end(piece.b, lo, lo <= br.domain.lo, false);
            const double z = image_end(piece.b, hi, false, hi >= br.domain.hi);
            extend({std::min(a, z), std::max(a, z)});
        }
        word.pop_back();
    }
};

}  // namespace

std::size_t for_each_cylinder(const PiecewiseMap& map, std::size_t depth, double min_len,
                              const CylinderOptions& opts, const CylinderVisitor& visit) {
    if (depth == 0) throw Error("cylinder depth must be positive");
    if (min_len < 0.0) throw Error("min_len must be nonnegative");
    CylinderWalk walk{map, depth, min_len, opts.node_budget, visit, 0, 0, {}, {}};
    walk.scratch.resize(depth);
    walk.extend(map.base);
    return walk.nodes;
}

std::vector<Cylinder> enumerate_cylinders(const PiecewiseMap& map, std::size_t depth,
                                          double min_len, const CylinderOptions& opts) {
    std::vector<Cylinder> out;
    for_each_cylinder(map, depth, min_len, opts,
                      [&](const Interval& iv, const std::vector<std::uint32_t>& w) {
                          out.push_back({depth, w, iv});
                      });
    return out;
}

bool check_eta(const PiecewiseMap& map, std::size_t bi, std::size_t pairs, std::uint64_t seed) {
    const Branch& b = map.branches[bi];
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(b.domain.lo, b.domain.hi);
    for (std::size_t i = 0; i < pairs; ++i) {
        const double x = u(rng), y = u(rng);
        const double lhs = std::abs(map.forward(bi, x) - map.forward(bi, y));
        if (lhs < b.eta * std::abs(x - y) * (1.0 - 1e-9) - 1e-15) return false;
    }
    return true;
}

double roundtrip_error(const PiecewiseMap& map, std::size_t bi, std::size_t samples) {
    const Branch& b = map.branches[bi];
    double err = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double y = b.image.lo + b.image.length() * (static_cast<double>(i) + 0.5) /
                                          static_cast<double>(samples);
        err = std::max(err, std::abs(map.forward(bi, map.inverse(bi, y)) - y));
    }
    return err;
}

}  // namespace mmd

#include "mmd/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <unordered_map>

#include "mmd/parallel.hpp"

namespace mmd {

namespace {

double guarded_radius(const SpectralResult& s) {
    return s.fallback ? s.certified_upper : std::min(s.estimate, s.certified_upper);
}

std::uint64_t cell_key(std::int64_t a, std::int64_t b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

std::vector<std::size_t> greedy_keep(std::span<const double> orbits, std::size_t n, double eps) {
    const std::size_t count = n == 0 ? 0 : orbits.size() / n;
    std::vector<std::size_t> kept;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells;
    auto cell_of = [&](double v) { return static_cast<std::int64_t>(std::floor(v / eps)); };
    for (std::size_t i = 0; i < count; ++i) {
        const double* p = orbits.data() + i * n;
        const std::int64_t a = cell_of(p[0]);
        const std::int64_t b = n > 1 ? cell_of(p[1]) : 0;
        bool clash = false;
        for (std::int64_t da = -1; da <= 1 && !clash; ++da) {
            for (std::int64_t db = (n > 1 ? -1 : 0); db <= (n > 1 ? 1 : 0) && !clash; ++db) {
                auto it = cells.find(cell_key(a + da, b + db));
                if (it == cells.end()) continue;
                for (std::uint32_t k : it->second) {
                    const double* q = orbits.data() + kept[k] * n;
                    bool close = true;
                    for (std::size_t j = 0; j < n && close; ++j) close = std::abs(p[j] - q[j]) < eps;
                    if (close) {
                        clash = true;
                        break;
                    }
                }
            }
        }
        if (clash) continue;
        cells[cell_key(a, b)].push_back(static_cast<std::uint32_t>(kept.size()));
        kept.push_back(i);
    }
    return kept;
}

bool monotone(const std::vector<double>& v) {
    bool up = true, down = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        up = up && v[i] >= v[i - 1] - 1e-12;
        down = down && v[i] <= v[i - 1] + 1e-12;
    }
    return up || down;
}

void map_lower(const PiecewiseMap& map, double eps, const SandwichOptions& opts,
               const std::string& prefix, EntropyRecord& rec) {
    auto consider = [&](double h, const std::string& tag, std::size_t n) {
        if (h > rec.h_lower || rec.method_lower.empty()) {
            rec.h_lower = h;
            rec.method_lower = prefix + tag;
            rec.n_used = n;
        }
    };
    const auto br = eps_entropy_lower_branches(map, eps);
    consider(br.h, "branches", 1);
    if (opts.cylinders) {
        for (std::size_t d : opts.depths) {
            const auto cy = eps_entropy_lower_cylinders(map, eps, d, opts.budget);
            rec.depth_values.push_back(cy.h);
            rec.budget_flag = rec.budget_flag || cy.budget_hit;
            consider(cy.h, "cylinders", d);
        }
        rec.trend_flag = rec.trend_flag || !monotone(rec.depth_values);
    }
    if (opts.grid_depth > 0) {
        const auto gr = eps_entropy_lower_grid(map, eps, opts.grid_depth);
        consider(gr.h, "grid", opts.grid_depth);
    }
}

}  // namespace

UpperBound upper_bound(const TransitionSet& gamma, double eps, UpperMode mode,
                       const PowerOptions& power) {
    auto one = [&](GridConvention conv) {
        const GridMatrix a = grid_matrix(gamma, eps, conv);
        UpperBound u;
        u.convention = conv;
        u.spectral = power_iteration(a, power);
        u.radius = guarded_radius(u.spectral);
        u.h = std::log(std::max(u.radius, 1.0));
        u.cells = a.size();
        u.nnz = a.nnz();
        u.truncation_warning = a.truncation_warning;
        return u;
    };
    switch (mode) {
        case UpperMode::Closed: return one(GridConvention::Closed);
        case UpperMode::HalfOpen: return one(GridConvention::HalfOpen);
        case UpperMode::Tightest: break;
    }
    const auto c = one(GridConvention::Closed);
    const auto h = one(GridConvention::HalfOpen);
    return h.radius < c.radius ? h : c;
}

double eps_entropy_upper(const TransitionSet& gamma, double eps, GridConvention convention) {
    return upper_bound(gamma, eps,
                       convention == GridConvention::Closed ? UpperMode::Closed : UpperMode::HalfOpen)
        .h;
}

LowerBound eps_entropy_lower_branches(const PiecewiseMap& map, double eps) {
    const bool blocked = !map.blocks.empty();
    const std::size_t nblocks = blocked ? map.blocks.size() : 1;
    std::vector<std::size_t> count(nblocks, 0);
    std::vector<double> last(nblocks, -std::numeric_limits<double>::infinity());
    for (const auto& b : map.branches) {
        const bool eligible = blocked ? b.full_in_block : b.full;
        if (!eligible) continue;
        const std::size_t k = blocked ? b.block : 0;
        if (k >= nblocks) continue;
        if (b.domain.lo - last[k] >= eps) {
            ++count[k];
            last[k] = b.domain.hi;
        }
    }
    LowerBound out;
    out.count = *std::max_element(count.begin(), count.end());
    out.flag = out.count == 0;
    out.h = out.count > 0 ? std::log(static_cast<double>(out.count)) : 0.0;
    return out;
}

LowerBound eps_entropy_lower_cylinders(const PiecewiseMap& map, double eps, std::size_t depth,
                                       std::size_t budget) {
    LowerBound out;
    std::vector<double> mids;
    try {
        for_each_cylinder(map, depth, eps, {budget},
                          [&](const Interval& iv, const std::vector<std::uint32_t>&) {
                              mids.push_back(0.5 * (iv.lo + iv.hi));
                          });
    } catch (const BudgetExceeded&) {
        out.flag = true;
        out.budget_hit = true;
    }
    if (mids.empty()) {
        out.flag = true;
        return out;
    }
    std::sort(mids.begin(), mids.end());
    std::vector<double> orbits(mids.size() * depth);
    parallel_for(mids.size(), [&](std::size_t i) {
        double x = mids[i];
        for (std::size_t j = 0; j < depth; ++j) {
            orbits[i * depth + j] = x;
            if (j + 1 < depth) x = map.evaluate(x);
        }
    });
    out.count = greedy_separated(orbits, depth, eps);
    out.h = std::log(static_cast<double>(out.count)) / static_cast<double>(depth);
    return out;
}

std::size_t greedy_separated(std::span<const double> orbits, std::size_t n, double eps) {
    if (!(eps > 0.0)) throw Error("eps must be positive");
    return greedy_keep(orbits, n, eps).size();
}

std::vector<double> candidate_grid(Interval base, double spacing) {
    if (!(spacing > 0.0)) throw Error("spacing must be positive");
    const auto steps = static_cast<std::size_t>(std::floor(base.length() / spacing + 1e-9));
    std::vector<double> out;
    out.reserve(steps + 2);
    for (std::size_t i = 0; i <= steps; ++i)
        out.push_back(std::min(base.hi, base.lo + spacing * static_cast<double>(i)));
    if (out.back() < base.hi) out.push_back(base.hi);
    return out;
}

std::vector<double> word_orbits(std::span<const PiecewiseMap* const> generators,
                                std::span<const std::uint32_t> word,
                                std::span<const double> candidates, std::size_t n) {
    if (n == 0) throw Error("orbit length must be positive");
    if (word.size() + 1 < n) throw Error("word shorter than orbit");
    std::vector<double> out(candidates.size() * n);
    parallel_for(candidates.size(), [&](std::size_t i) {
        double x = candidates[i];
        for (std::size_t j = 0; j < n; ++j) {
            out[i * n + j] = x;
            if (j + 1 < n) x = generators[word[j]]->evaluate(x);
        }
    });
    return out;
}

std::size_t word_separated_count(std::span<const PiecewiseMap* const> generators,
                                 std::span<const std::uint32_t> word, double eps, std::size_t n) {
    const auto cands = candidate_grid(generators.front()->base, eps / 4.0);
    const auto orbits = word_orbits(generators, word, cands, n);
    return greedy_separated(orbits, n, eps);
}

LowerBound eps_entropy_lower_grid(const PiecewiseMap& map, double eps, std::size_t n) {
    const PiecewiseMap* gens[] = {&map};
    const std::vector<std::uint32_t> word(n, 0);
    LowerBound out;
    out.count = word_separated_count(gens, word, eps, n);
    out.h = std::log(static_cast<double>(out.count)) / static_cast<double>(n);
    return out;
}

EntropyRecord lower_record(const TransitionSet& gamma, double eps, const SandwichOptions& opts) {
    EntropyRecord rec;
    rec.eps = eps;
    std::visit(
        [&](const auto& rel) {
            using R = std::decay_t<decltype(rel)>;
            if constexpr (std::is_same_v<R, GraphOf>) {
                map_lower(*rel.map, eps, opts, "", rec);
            } else if constexpr (std::is_same_v<R, UnionOfGraphs>) {
                for (std::size_t i = 0; i < rel.maps.size(); ++i)
                    map_lower(*rel.maps[i], eps, opts, "g" + std::to_string(i + 1) + ":", rec);
            } else if constexpr (std::is_same_v<R, Delayed>) {
                const auto s = separated_count(rel.f, eps);
                rec.h_lower = std::log(static_cast<double>(s)) / static_cast<double>(rel.k);
                rec.method_lower = "delayed";
                rec.n_used = static_cast<std::size_t>(rel.k);
            } else if constexpr (std::is_same_v<R, BoxSet>) {
                double best = 0.0;
                for (const auto& r : rel.boxes) {
                    const double lo = std::max(r.x.lo, r.y.lo), hi = std::min(r.x.hi, r.y.hi);
                    if (hi < lo) continue;
                    const double pts = std::floor((hi - lo) / eps * (1.0 + 1e-12)) + 1.0;
                    best = std::max(best, std::log(pts));
                }
                rec.h_lower = best;
                rec.method_lower = "square";
                rec.n_used = 1;
            } else {
                rec.h_lower = 0.0;
                rec.method_lower = "none";
            }
        },
        gamma.relation);
    return rec;
}

void fit_slopes(MdimEstimate& est) {
    if (est.records.size() < 4) throw Error("ladder too short");
    std::vector<double> x, lo, up;
    for (const auto& r : est.records) {
        x.push_back(std::log(1.0 / r.eps));
        lo.push_back(r.h_lower);
        up.push_back(r.h_upper);
    }
    const auto fl = fit_line(x, lo);
    const auto fu = fit_line(x, up);
    est.slope_lower = fl.slope;
    est.residual_lower = fl.residual;
    est.slope_upper = fu.slope;
    est.residual_upper = fu.residual;
    est.eps_max = est.records.front().eps;
    est.eps_min = est.records.back().eps;
}

MdimEstimate mdim_sandwich(const TransitionSet& gamma, std::span<const double> ladder,
                           const SandwichOptions& opts) {
    if (ladder.size() < 4) throw Error("ladder too short");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (!(ladder[i] < ladder[i - 1])) throw Error("ladder not decreasing");
    MdimEstimate est;
    est.predicted = gamma.predicted;
    for (double eps : ladder) {
        EntropyRecord rec = lower_record(gamma, eps, opts);
        const auto up = upper_bound(gamma, eps, opts.upper, opts.power);
        rec.h_upper = up.h;
        rec.method_upper = up.convention == GridConvention::Closed ? "spectral-closed"
                                                                   : "spectral-halfopen";
        if (up.spectral.fallback) rec.method_upper += "-certified";
        rec.truncation_warning = up.truncation_warning;
        rec.spectral_fallback = up.spectral.fallback;
        est.records.push_back(std::move(rec));
    }
    fit_slopes(est);
    return est;
}

IterateCheck iterate_count_detail(const PiecewiseMap& map, std::size_t k, std::size_t n, double eps) {
    if (k == 0 || n == 0) throw Error("k and n must be positive");
    const std::size_t len = (n - 1) * k + 1;
    const auto cands = candidate_grid(map.base, eps / 4.0);
    std::vector<double> full(cands.size() * len);
    parallel_for(cands.size(), [&](std::size_t i) {
        double x = cands[i];
        for (std::size_t j = 0; j < len; ++j) {
            full[i * len + j] = x;
            if (j + 1 < len) x = map.evaluate(x);
        }
    });
    std::vector<double> coarse(cands.size() * n);
    for (std::size_t i = 0; i < cands.size(); ++i)
        for (std::size_t j = 0; j < n; ++j) coarse[i * n + j] = full[i * len + j * k];
    const auto kept = greedy_keep(coarse, n, eps);
    std::vector<double> sub(kept.size() * len);
    for (std::size_t r = 0; r < kept.size(); ++r)
        std::copy_n(full.begin() + static_cast<std::ptrdiff_t>(kept[r] * len), len,
                    sub.begin() + static_cast<std::ptrdiff_t>(r * len));
    IterateCheck out;
    out.iterate_count = kept.size();
    out.base_count = greedy_separated(sub, len, eps);
    out.ok = out.base_count == out.iterate_count;
    return out;
}

bool iterate_count_check(const PiecewiseMap& map, std::size_t k, std::size_t n, double eps) {
    return iterate_count_detail(map, k, n, eps).ok;
}

std::string entropy_csv(const MdimEstimate& est) {
    std::string out = "epsilon,n,h_lower,h_upper,method_lower,method_upper\n";
    for (const auto& r : est.records) {
        out += format_decimal(r.eps) + ',' + std::to_string(r.n_used) + ',' +
               format_decimal(r.h_lower) + ',' + format_decimal(r.h_upper) + ',' +
               r.method_lower + ',' + r.method_upper + '\n';
    }
    return out;
}

}  // namespace mmd

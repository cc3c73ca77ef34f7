#include "mmd/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mmd {

RandomWalk bernoulli_walk(std::vector<double> weights, std::uint64_t seed) {
    return {Bernoulli{std::move(weights)}, seed};
}

RandomWalk atomic_walk(std::vector<std::vector<std::uint32_t>> words, std::vector<double> weights) {
    return {AtomicPeriodic{std::move(words), std::move(weights)}, 0};
}

RandomWalk alternating_walk() { return atomic_walk({{0, 1}, {1, 0}}, {0.5, 0.5}); }

namespace {

void check_weights(const std::vector<double>& w) {
    if (w.empty()) throw Error("walk: no weights");
    for (double x : w)
        if (!(x >= 0.0)) throw Error("walk: weights must be nonnegative");
    if (std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) > 1e-12)
        throw Error("walk: weights must sum to 1");
}

}  // namespace

void SemigroupSpec::validate() const {
    if (generators.empty()) throw Error("semigroup: no generators");
    for (const auto& g : generators) {
        if (!g) throw Error("semigroup: null generator");
        if (g->base.lo != generators.front()->base.lo || g->base.hi != generators.front()->base.hi)
            throw Error("semigroup: generators must share a base");
    }
    const auto letters = static_cast<std::uint32_t>(generators.size());
    if (const auto* b = std::get_if<Bernoulli>(&walk.law)) {
        check_weights(b->weights);
        if (b->weights.size() != generators.size())
            throw Error("walk: one weight per generator required");
    } else {
        const auto& a = std::get<AtomicPeriodic>(walk.law);
        check_weights(a.weights);
        if (a.words.size() != a.weights.size()) throw Error("walk: one weight per word required");
        for (const auto& w : a.words) {
            if (w.empty()) throw Error("walk: periodic words must be nonempty");
            for (auto l : w)
                if (l >= letters) throw Error("walk: letter out of range");
        }
    }
}

std::vector<MapPtr> make_prop49_pair(std::size_t k_max, std::size_t piece_budget) {
    const MapPtr t = make_boxes_map(k_max, piece_budget);

    auto g1 = std::make_shared<PiecewiseMap>();
    g1->name = "prop49-g1";
    g1->base = {0.0, 1.0};
    g1->flats.push_back({{0.0, 0.5}, 0.0});
    auto up = [](double p) { return 0.5 * (1.0 + p); };
    for (const auto& f : t->families) {
        g1->families.push_back({
            [fw = f.forward](std::uint64_t l, double x) { return 0.5 * fw(l, 2.0 * x - 1.0); },
            f.inverse ? std::function<double(std::uint64_t, double)>(
                            [inv = f.inverse](std::uint64_t l, double y) {
                                return 0.5 * (1.0 + inv(l, 2.0 * y));
                            })
                      : nullptr,
        });
    }
    for (Branch b : t->branches) {
        b.domain = {up(b.domain.lo), up(b.domain.hi)};
        b.image = {0.5 * b.image.lo, 0.5 * b.image.hi};
        b.block = kNoIndex;
        g1->branches.push_back(b);
    }
    for (const auto& f : t->flats)
        g1->flats.push_back({{up(f.domain.lo), up(f.domain.hi)}, 0.5 * f.value});
    for (const auto& r : t->tails)
        g1->tails.push_back({{up(r.x.lo), up(r.x.hi)}, {0.5 * r.y.lo, 0.5 * r.y.hi}});
    g1->fallback = [t](double x) { return x <= 0.5 ? 0.0 : 0.5 * t->evaluate(2.0 * x - 1.0); };
    g1->finalize();

    auto g2 = std::make_shared<PiecewiseMap>();
    g2->name = "prop49-g2";
    g2->base = {0.0, 1.0};
    Branch b;
    b.domain = {0.0, 0.5};
    b.image = {0.5, 1.0};
    b.eta = 1.0;
    g2->branches.push_back(b);
    g2->flats.push_back({{0.5, 1.0}, 1.0});
    g2->fallback = [](double x) { return x <= 0.5 ? x + 0.5 : 1.0; };
    g2->finalize();

    return {g1, g2};
}

double walk_average_count(const SemigroupSpec& spec, double eps, std::size_t n,
                          std::size_t samples) {
    spec.validate();
    if (n == 0) throw Error("walk: n must be positive");
    if (!(eps > 0.0)) throw Error("walk: eps must be positive");
    std::vector<const PiecewiseMap*> gens;
    for (const auto& g : spec.generators) gens.push_back(g.get());
    std::vector<std::uint32_t> word(n - 1);

    if (const auto* a = std::get_if<AtomicPeriodic>(&spec.walk.law)) {
        double total = 0.0;
        for (std::size_t i = 0; i < a->words.size(); ++i) {
            const auto& p = a->words[i];
            for (std::size_t j = 0; j < word.size(); ++j) word[j] = p[j % p.size()];
            total += a->weights[i] *
                     static_cast<double>(word_separated_count(gens, word, eps, n));
        }
        return total;
    }

    const auto& w = std::get<Bernoulli>(spec.walk.law).weights;
    if (samples == 0) throw Error("walk: samples must be positive");
    std::vector<double> cum(w.size());
    std::partial_sum(w.begin(), w.end(), cum.begin());
    std::mt19937_64 rng(spec.walk.seed);
    double total = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        for (auto& letter : word) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            const auto it = std::upper_bound(cum.begin(), cum.end() - 1, u);
            letter = static_cast<std::uint32_t>(it - cum.begin());
        }
        total += static_cast<double>(word_separated_count(gens, word, eps, n));
    }
    return total / static_cast<double>(samples);
}

double walk_entropy(const SemigroupSpec& spec, double eps, std::size_t n, std::size_t samples) {
    return std::log(walk_average_count(spec, eps, n, samples)) / static_cast<double>(n);
}

double friedland_upper(const SemigroupSpec& spec, double eps) {
    spec.validate();
    return upper_bound(friedland_set(spec.generators), eps, UpperMode::Tightest).h;
}

SemigroupEstimate semigroup_ladder(const SemigroupSpec& spec, std::span<const double> ladder,
                                   std::size_t n, std::size_t samples) {
    if (ladder.size() < 4) throw Error("ladder too short");
    SemigroupEstimate est;
    est.n = n;
    std::vector<double> x, lo, hi;
    for (double eps : ladder) {
        SemigroupRecord r{eps, walk_entropy(spec, eps, n, samples), friedland_upper(spec, eps)};
        est.records.push_back(r);
        x.push_back(std::log(1.0 / eps));
        lo.push_back(r.walk);
        hi.push_back(r.friedland);
    }
    const auto fl = fit_line(x, lo);
    const auto fu = fit_line(x, hi);
    est.slope_lower = fl.slope;
    est.residual_lower = fl.residual;
    est.slope_upper = fu.slope;
    est.residual_upper = fu.residual;
    return est;
}

std::string semigroup_csv(const SemigroupEstimate& est) {
    std::string out = "epsilon,n,h_lower,h_upper,method_lower,method_upper\n";
    for (const auto& r : est.records)
        out += format_decimal(r.eps) + ',' + std::to_string(est.n) + ',' + format_decimal(r.walk) +
               ',' + format_decimal(r.friedland) + ",walk,friedland\n";
    return out;
}

}  // namespace mmd

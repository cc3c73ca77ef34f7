#include <algorithm>
#include <cmath>
#include <functional>
#include <iterator>
#include <numbers>

#include "mmd/dynamics.hpp"

namespace mmd {

namespace {

std::shared_ptr<PiecewiseMap> finish(std::shared_ptr<PiecewiseMap> m) {
    m->finalize();
    return m;
}

}  // namespace

MapPtr make_gauss(std::size_t k_max) {
    if (k_max < 2) throw Error("gauss: k_max must be at least 2");
    auto m = std::make_shared<PiecewiseMap>();
    m->name = "gauss";
    m->base = {0.0, 1.0};
    m->families.push_back({
        [](std::uint64_t k, double x) { return 1.0 / x - static_cast<double>(k); },
        [](std::uint64_t k, double y) { return 1.0 / (y + static_cast<double>(k)); },
    });
    m->branches.reserve(k_max);
    for (std::size_t k = k_max; k >= 1; --k) {
        const double kk = static_cast<double>(k);
        Branch b;
        b.domain = {1.0 / (kk + 1.0), 1.0 / kk};
        b.image = {0.0, 1.0};
        b.direction = Direction::Decreasing;
        b.eta = kk * kk;
        b.family = 0;
        b.local = k;
        m->branches.push_back(b);
    }
    m->tails.push_back({{0.0, 1.0 / (static_cast<double>(k_max) + 1.0)}, {0.0, 1.0}});
    m->fallback = [](double x) {
        if (x <= 0.0) return 0.0;
        const double r = 1.0 / x;
        const double n = std::nearbyint(r);
        if (std::abs(r - n) <= 1e-9 * r) return 0.0;
        return r - std::floor(r);
    };
    m->predicted = Prediction{0.5, "Gauss map: box dimension of {1/n}"};
    return finish(m);
}

std::vector<double> mp_thresholds(double alpha, std::size_t n_max, double tol) {
    if (!(alpha > 0.0)) throw Error("mp: alpha must be positive");
    const double c = std::pow(2.0, alpha);
    auto g = [&](double u) { return u + c * std::pow(u, 1.0 + alpha); };
    std::vector<double> u{0.5};
    u.reserve(n_max + 1);
    for (std::size_t m = 1; m <= n_max; ++m) {
        const double target = u.back();
        double lo = 0.0, hi = target;
        if (!(g(hi) > target)) throw Error("threshold not bracketed");
        while (hi - lo > tol * hi) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (g(mid) < target ? lo : hi) = mid;
        }
        u.push_back(0.5 * (lo + hi));
    }
    return u;
}

MapPtr make_mp_induced(double alpha, std::size_t n_max, double tol) {
    if (!(tol <= 1e-10)) throw Error("mp: tol must be at most 1e-10");
    if (n_max < 1) throw Error("mp: n_max must be positive");
    const auto u = mp_thresholds(alpha, n_max, tol);
    const double c = std::pow(2.0, alpha);

    auto left = [alpha, c](double y) {
        if (alpha == 1.0) return y + 2.0 * y * y;
        return y + c * std::pow(y, 1.0 + alpha);
    };
    auto left_inv = [alpha, c](double v) {
        if (v <= 0.0) return 0.0;
        if (alpha == 1.0) return (std::sqrt(1.0 + 8.0 * v) - 1.0) / 4.0;
        double x = v;
        for (int it = 0; it < 100; ++it) {
            const double p = std::pow(x, alpha);
            const double h = x + c * p * x - v;
            const double step = h / (1.0 + c * (1.0 + alpha) * p);
            x -= step;
            if (std::abs(step) <= 1e-16 * x) break;
        }
        return x;
    };

    auto m = std::make_shared<PiecewiseMap>();
    m->name = "mp";
    m->base = {0.5, 1.0};
    m->families.push_back({
        [left](std::uint64_t steps, double x) {
            double y = 2.0 * x - 1.0;
            for (std::uint64_t i = 0; i < steps; ++i) y = left(y);
            return y;
        },
        [left_inv](std::uint64_t steps, double z) {
            double y = z;
            for (std::uint64_t i = 0; i < steps; ++i) y = left_inv(y);
            return 0.5 * (1.0 + y);
        },
    });
    std::vector<double> edge(n_max + 2);
    edge[0] = 1.0;
    for (std::size_t i = 0; i <= n_max; ++i) edge[i + 1] = 0.5 * (1.0 + u[i]);
    for (std::size_t k = 0; k <= n_max; ++k) {
        Branch b;
        b.domain = {edge[k + 1], edge[k]};
        b.image = {0.5, 1.0};
        b.direction = Direction::Increasing;
        b.eta = 1.0;
        b.family = 0;
        b.local = k;
        if (b.domain.lo < b.domain.hi) m->branches.push_back(b);
    }
    m->tails.push_back({{0.5, edge[n_max + 1]}, {0.5, 1.0}});
    // Points of the critical set: 2x - 1 = u_m runs down the thresholds to 1/2,
    // and f(1/2) = 1.
    m->fallback = [left, edge](double x) {
        auto it = std::lower_bound(edge.begin(), edge.end(), x, std::greater<>());
        if (it != edge.end() && std::abs(*it - x) <= 1e-15) return 1.0;
        if (it != edge.begin() && std::abs(*std::prev(it) - x) <= 1e-15) return 1.0;
        double y = 2.0 * x - 1.0;
        for (int i = 0; i < 10'000'000 && y <= 0.5; ++i) {
            const double next = left(y);
            if (next == y) return 0.5;
            y = next;
        }
        return y > 0.5 ? y : 0.5;
    };
    m->predicted = Prediction{alpha / (1.0 + alpha), "induced Manneville-Pomeau map: alpha/(1+alpha)"};
    return finish(m);
}

std::vector<double> boxes_endpoints(std::size_t k_max) {
    std::vector<double> a(k_max + 1, 0.0);
    const double c = 6.0 / (std::numbers::pi * std::numbers::pi);
    double sum = 0.0, comp = 0.0;
    for (std::size_t j = 1; j <= k_max; ++j) {
        const double term = c / (static_cast<double>(j) * static_cast<double>(j)) - comp;
        const double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
        a[j] = std::min(sum, 1.0);
    }
    return a;
}

double boxes_evaluate(const std::vector<double>& a, double x) {
    if (x >= 1.0) return 1.0;
    if (x <= 0.0) return 0.0;
    const auto it = std::upper_bound(a.begin(), a.end(), x);
    if (it == a.end()) return x;
    const std::size_t k = static_cast<std::size_t>(it - a.begin());
    const double lo = a[k - 1], w = a[k] - a[k - 1];
    double t = (x - lo) / w;
    const std::size_t steps = std::min<std::size_t>(k - 1, 64);
    for (std::size_t i = 0; i < steps; ++i) t = std::abs(1.0 - std::abs(3.0 * t - 1.0));
    return lo + t * w;
}

MapPtr make_boxes_map(std::size_t k_max, std::size_t piece_budget) {
    if (k_max < 1) throw Error("boxes: k_max must be positive");
    auto a = std::make_shared<const std::vector<double>>(
        boxes_endpoints(std::max<std::size_t>(k_max, 1'000'000)));
    auto m = std::make_shared<PiecewiseMap>();
    m->name = "boxes";
    m->base = {0.0, 1.0};
    std::size_t used = 0, pieces = 1, k = 1;
    for (; k <= k_max && used + pieces <= piece_budget; ++k, pieces *= 3) {
        const double lo = (*a)[k - 1], hi = (*a)[k];
        const double w = (hi - lo) / static_cast<double>(pieces);
        m->blocks.push_back({lo, hi});
        double left_edge = lo;
        for (std::size_t i = 0; i < pieces; ++i) {
            const double right_edge = i + 1 == pieces ? hi : lo + w * static_cast<double>(i + 1);
            Branch b;
            b.domain = {left_edge, right_edge};
            b.image = {lo, hi};
            b.direction = i % 2 == 0 ? Direction::Increasing : Direction::Decreasing;
            b.eta = static_cast<double>(pieces);
            b.block = static_cast<std::uint32_t>(k - 1);
            m->branches.push_back(b);
            left_edge = right_edge;
        }
        used += pieces;
    }
    const double tail_lo = (*a)[k - 1];
    m->tails.push_back({{tail_lo, 1.0}, {tail_lo, 1.0}});
    m->fallback = [a](double x) { return boxes_evaluate(*a, x); };
    m->predicted = Prediction{1.0, "boxes map: metric mean dimension 1"};
    return finish(m);
}

MapPtr make_sin_inv(std::size_t k_max) {
    if (k_max < 1) throw Error("sininv: k_max must be positive");
    constexpr double pi = std::numbers::pi;
    auto crit = [](std::size_t j) { return 2.0 / ((2.0 * static_cast<double>(j) + 1.0) * pi); };
    // local = 2*j + side, side 1 for x < 0; j = 0 is the outer piece.
    auto pos_inverse = [](std::size_t j, double y) {
        if (j == 0) return 1.0 / std::asin(y);
        const double jj = static_cast<double>(j);
        const double s = (j % 2 == 1) ? y : -y;
        return 1.0 / (pi / 2.0 + (jj - 1.0) * pi + std::acos(std::clamp(s, -1.0, 1.0)));
    };
    auto m = std::make_shared<PiecewiseMap>();
    m->name = "sininv";
    m->base = {-1.0, 1.0};
    m->families.push_back({
        [](std::uint64_t, double x) { return std::sin(1.0 / std::abs(x)); },
        [pos_inverse](std::uint64_t local, double y) {
            const double x = pos_inverse(static_cast<std::size_t>(local / 2), y);
            return local % 2 == 1 ? -x : x;
        },
    });
    std::vector<double> xs(k_max + 1);
    for (std::size_t j = 0; j <= k_max; ++j) xs[j] = crit(j);
    for (int side = 0; side < 2; ++side) {
        for (std::size_t j = 0; j <= k_max; ++j) {
            Branch b;
            const double lo = j == 0 ? xs[0] : xs[j];
            const double hi = j == 0 ? 1.0 : xs[j - 1];
            Direction dir;
            if (j == 0) {
                b.image = {std::sin(1.0), 1.0};
                dir = Direction::Decreasing;
            } else {
                b.image = {-1.0, 1.0};
                dir = j % 2 == 1 ? Direction::Increasing : Direction::Decreasing;
            }
            if (side == 0) {
                b.domain = {lo, hi};
                b.direction = dir;
            } else {
                b.domain = {-hi, -lo};
                b.direction = dir == Direction::Increasing ? Direction::Decreasing
                                                           : Direction::Increasing;
            }
            b.eta = 0.0;
            b.family = 0;
            b.local = 2 * j + static_cast<std::uint64_t>(side);
            m->branches.push_back(b);
        }
    }
    m->tails.push_back({{-xs[k_max], xs[k_max]}, {-1.0, 1.0}});
    m->fallback = [](double x) { return x == 0.0 ? 0.0 : std::sin(1.0 / std::abs(x)); };
    m->predicted = Prediction{0.5, "sin(1/|x|): metric mean dimension 1/2"};
    return finish(m);
}

MapPtr make_affine_full(const CutOutSet& cutout) {
    if (cutout.gaps().empty()) throw Error("affine: cut-out set has no gaps");
    const Interval base = cutout.base();
    auto m = std::make_shared<PiecewiseMap>();
    m->name = "affine";
    m->base = base;
    const double largest = cutout.gaps().front().length();
    for (const auto& g : cutout.gaps_by_position()) {
        Branch b;
        b.domain = g;
        b.image = base;
        b.direction = Direction::Increasing;
        b.eta = base.length() / largest;
        m->branches.push_back(b);
    }
    for (const auto& c : cutout.components())
        if (c.length() > 0.0) m->tails.push_back({c, base});
    const double lo = base.lo;
    m->fallback = [lo](double) { return lo; };
    if (cutout.known_dimension)
        m->predicted = Prediction{cutout.known_dimension->value,
                                  "affine full branches: " + cutout.known_dimension->provenance};
    return finish(m);
}

MapPtr make_identity(Interval base) {
    auto m = std::make_shared<PiecewiseMap>();
    m->name = "identity";
    m->base = base;
    Branch b;
    b.domain = base;
    b.image = base;
    b.direction = Direction::Increasing;
    b.eta = 1.0;
    m->branches.push_back(b);
    m->fallback = [](double x) { return x; };
    m->predicted = Prediction{0.0, "identity"};
    return finish(m);
}

MapPtr make_closure_demo(std::size_t k_max) {
    k_max = std::clamp<std::size_t>(k_max, 1, 700);
    auto m = std::make_shared<PiecewiseMap>();
    m->name = "closure-demo";
    m->base = {0.0, 1.0};
    std::vector<double> e(k_max + 2);
    for (std::size_t k = 0; k < e.size(); ++k) e[k] = std::exp(-static_cast<double>(k));
    for (std::size_t k = 1; k <= k_max; ++k) {
        Branch b;
        b.domain = {e[k + 1], e[k]};
        b.image = {0.0, 1.0};
        b.direction = Direction::Increasing;
        b.eta = 1.0 / b.domain.length();
        m->branches.push_back(b);
    }
    m->flats.push_back({{e[1], 1.0}, 0.0});
    m->tails.push_back({{0.0, e[k_max + 1]}, {0.0, 1.0}});
    m->fallback = [](double) { return 0.0; };
    m->predicted = Prediction{0.0, "box dimension of {e^-n}"};
    return finish(m);
}

}  // namespace mmd

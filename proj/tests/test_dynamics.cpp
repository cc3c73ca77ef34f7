#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mmd/dynamics.hpp"
#include "oracles.hpp"

using namespace mmd;

namespace {

double mp_first_return(double alpha, double x) {
    auto f = [alpha](double y) {
        return y <= 0.5 ? y + std::pow(2.0, alpha) * std::pow(y, 1.0 + alpha) : 2.0 * y - 1.0;
    };
    double y = f(x);
    while (y <= 0.5) y = f(y);
    return y;
}

}  // namespace

TEST_CASE("Gauss map") {
    const auto g = make_gauss(64);
    CHECK(g->evaluate(0.4) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(g->evaluate(0.0) == 0.0);
    CHECK(g->evaluate(1.0 / 3.0) == 0.0);
    const auto gaps = g->critical_set().gaps_by_position();
    REQUIRE(gaps.size() == 64);
    for (std::size_t k = 1; k <= 64; ++k) {
        const auto& gap = gaps[64 - k];
        CHECK(gap.length() == doctest::Approx(1.0 / k - 1.0 / (k + 1)).epsilon(1e-12));
    }
    for (std::size_t b = 0; b < g->branches.size(); ++b) {
        CHECK(roundtrip_error(*g, b) < 1e-9);
        CHECK(check_eta(*g, b));
        CHECK(g->branches[b].full);
    }
}

TEST_CASE("Manneville-Pomeau induced map") {
    for (double alpha : {0.5, 1.0, 3.0}) {
        const auto m = make_mp_induced(alpha, 2000);
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.5, 1.0);
        for (int i = 0; i < 200; ++i) {
            const double x = u(rng);
            if (!m->branch_at(x)) continue;
            CHECK(m->evaluate(x) == doctest::Approx(mp_first_return(alpha, x)).epsilon(1e-9));
        }
        for (double x : {0.8, 0.9, 0.99}) CHECK(m->evaluate(x) == doctest::Approx(2.0 * x - 1.0));
        for (std::size_t b = 0; b < m->branches.size(); b += 97) {
            const auto& br = m->branches[b];
            // forward(inverse(y)) is off by about slope * ulp(x) in any
            // floating evaluator; near x = 1/2 ulp is 1.1e-16
            const double slope = br.image.length() / br.domain.length();
            if (slope * 0x1p-53 < 1e-10) CHECK(roundtrip_error(*m, b, 200) < 1e-9);
            for (int i = 1; i < 50; ++i) {
                const double x = br.domain.lo + br.domain.length() * i / 50.0;
                CHECK(std::abs(m->inverse(b, m->forward(b, x)) - x) <= 1e-12 * br.domain.length() + 1e-15);
            }
            CHECK(check_eta(*m, b, 200));
        }
        // u_n^-alpha grows like alpha 2^alpha n (up to a logarithmic correction)
        const auto u_n = mp_thresholds(alpha, 20000, 1e-12);
        const double ratio = std::pow(u_n.back(), -alpha) / (20000.0 * alpha * std::pow(2.0, alpha));
        CHECK(ratio == doctest::Approx(1.0).epsilon(0.05));
        for (std::size_t n = 1; n < u_n.size(); ++n) REQUIRE(u_n[n] < u_n[n - 1]);
    }
    // alpha = 1: f(1/2) = 1
    const auto t = mp_thresholds(1.0, 1, 1e-12);
    CHECK(t[1] + 2.0 * t[1] * t[1] == doctest::Approx(0.5).epsilon(1e-11));
    CHECK_THROWS_AS(make_mp_induced(1.0, 10, 1e-6), Error);
}

TEST_CASE("boxes map") {
    const auto b = make_boxes_map(12, 100000);
    const auto a = boxes_endpoints(1'000'000);
    CHECK(a.back() == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(b->evaluate(1.0) == 1.0);
    // J_1: identity
    for (double x : {0.1, 0.3, 0.5}) CHECK(b->evaluate(x * a[1]) == doctest::Approx(x * a[1]));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double x = u(rng) * a[12];
        CHECK(b->evaluate(x) == doctest::Approx(boxes_evaluate(a, x)).epsilon(1e-9));
    }
    // the sawtooth f has three full branches
    auto f = [](double x) { return std::abs(1.0 - std::abs(3.0 * x - 1.0)); };
    CHECK(f(0.0) == 0.0);
    CHECK(f(1.0 / 3.0) == doctest::Approx(1.0));
    CHECK(f(2.0 / 3.0) == doctest::Approx(0.0));
    CHECK(f(1.0) == doctest::Approx(1.0));
}

TEST_CASE("sin(1/|x|) map") {
    const auto s = make_sin_inv(200);
    constexpr double pi = std::numbers::pi;
    CHECK(s->evaluate(2.0 / pi) == doctest::Approx(1.0));
    CHECK(s->evaluate(0.0) == 0.0);
    for (int k = 0; k < 50; ++k) {
        const double x = 2.0 / ((4.0 * k + 1.0) * pi);
        CHECK(s->evaluate(x) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(s->evaluate(-x) == doctest::Approx(1.0).epsilon(1e-9));
    }
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng);
        if (!s->branch_at(x)) continue;
        CHECK(s->evaluate(x) == doctest::Approx(std::sin(1.0 / std::abs(x))).epsilon(1e-9));
    }
    for (std::size_t b = 0; b < s->branches.size(); b += 37) CHECK(roundtrip_error(*s, b) < 1e-9);
}

TEST_CASE("affine full-branch constructor") {
    const auto m = make_affine_full(CutOutSet::from_gaps({0.0, 1.0}, {{0.2, 0.7}}));
    REQUIRE(m->branches.size() == 1);
    CHECK(m->branches[0].eta == doctest::Approx(2.0));
    CHECK(m->branches[0].image.lo == 0.0);
    CHECK(m->branches[0].image.hi == 1.0);
    CHECK(m->evaluate(0.45) == doctest::Approx(0.5));
    CHECK(make_affine_full(harmonic_cutout(1000))->predicted->value == doctest::Approx(0.5));
    CHECK(make_affine_full(exponential_cutout(700))->predicted->value == 0.0);
}

TEST_CASE("Bowen distance") {
    const auto g = make_gauss(1000);
    const auto id = make_identity();
    CHECK(bowen_distance(*g, 0.3, 0.35, 1) == doctest::Approx(0.05));
    CHECK(bowen_distance(*id, 0.3, 0.7, 9) == doctest::Approx(0.4));
    double x = 0.4, y = 0.41, d = 0.0;
    for (int j = 0; j < 3; ++j) {
        d = std::max(d, std::abs(x - y));
        x = oracle::gauss(x);
        y = oracle::gauss(y);
    }
    CHECK(bowen_distance(*g, 0.4, 0.41, 3) == doctest::Approx(d).epsilon(1e-12));
    double prev = 0.0;
    for (std::size_t n = 1; n < 8; ++n) {
        const double dn = bowen_distance(*g, 0.123, 0.1234, n);
        CHECK(dn >= prev);
        prev = dn;
    }
}

TEST_CASE("cylinders of full-branch maps") {
    for (std::size_t c : {2, 3, 4}) {
        const auto m = make_affine_full(equal_pieces_cutout({0.0, 1.0}, c));
        for (std::size_t n = 1; n <= 4; ++n) {
            const auto cyl = enumerate_cylinders(*m, n, 0.0);
            CHECK(cyl.size() == static_cast<std::size_t>(std::pow(c, n)));
        }
        // submultiplicativity without pruning
        for (std::size_t p = 1; p <= 2; ++p)
            for (std::size_t q = 1; q <= 2; ++q)
                CHECK(enumerate_cylinders(*m, p + q, 0.0).size() <=
                      enumerate_cylinders(*m, p, 0.0).size() * enumerate_cylinders(*m, q, 0.0).size());
    }
    const auto id = make_identity();
    for (std::size_t n = 1; n <= 5; ++n) {
        const auto cyl = enumerate_cylinders(*id, n, 0.01);
        REQUIRE(cyl.size() == 1);
        CHECK(cyl[0].interval.lo == 0.0);
        CHECK(cyl[0].interval.hi == 1.0);
    }
}

TEST_CASE("Gauss cylinders against brute enumeration") {
    const std::size_t k_max = 64;
    const auto g = make_gauss(k_max);
    const double min_len = 0x1p-10;
    // all words (k1, k2, k3): interval = h_k1(h_k2(h_k3([0,1]))) with h_k(y) = 1/(y+k)
    std::size_t expected = 0;
    for (std::size_t a = 1; a <= k_max; ++a)
        for (std::size_t b = 1; b <= k_max; ++b)
            for (std::size_t c = 1; c <= k_max; ++c) {
                auto h = [](double y, std::size_t k) { return 1.0 / (y + static_cast<double>(k)); };
                const double p = h(h(h(0.0, c), b), a);
                const double q = h(h(h(1.0, c), b), a);
                if (std::abs(p - q) >= min_len) ++expected;
            }
    const auto cyl = enumerate_cylinders(*g, 3, min_len);
    CHECK(cyl.size() == expected);

    // refinement: depth-3 intervals sit inside depth-2 intervals
    const auto parents = enumerate_cylinders(*g, 2, min_len);
    for (const auto& c : cyl) {
        bool inside = false;
        for (const auto& p : parents)
            if (p.word[0] == c.word[0] && p.word[1] == c.word[1])
                inside = p.interval.lo <= c.interval.lo + 1e-15 && c.interval.hi <= p.interval.hi + 1e-15;
        CHECK(inside);
    }
    // pairwise disjoint up to endpoints
    auto sorted = cyl;
    std::sort(sorted.begin(), sorted.end(),
              [](const Cylinder& x, const Cylinder& y) { return x.interval.lo < y.interval.lo; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        CHECK(sorted[i - 1].interval.hi <= sorted[i].interval.lo + 1e-15);
}

TEST_CASE("cylinder budget") {
    const auto m = make_affine_full(equal_pieces_cutout({0.0, 1.0}, 4));
    try {
        enumerate_cylinders(*m, 6, 0.0, {100});
        FAIL("expected budget exception");
    } catch (const BudgetExceeded& e) {
        CHECK(std::string(e.what()) == "cylinder budget exceeded");
        CHECK(e.partial() > 0);
        CHECK(e.partial() <= 100);
    }
}

TEST_CASE("critical sets match branch domains") {
    for (const auto& m : {make_gauss(100), make_mp_induced(1.0, 100), make_boxes_map(6),
                          make_sin_inv(50), make_closure_demo(30)}) {
        const auto gaps = m->critical_set().gaps_by_position();
        REQUIRE(gaps.size() == m->branches.size());
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            CHECK(gaps[i].lo == m->branches[i].domain.lo);
            CHECK(gaps[i].hi == m->branches[i].domain.hi);
        }
    }
}

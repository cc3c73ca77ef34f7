#pragma once

// Spectral radius estimates and certified upper bounds for sparse
// nonnegative matrices. Everything is built on matrix-vector products.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "mmd/error.hpp"

namespace mmd {

template <class M>
concept SparseOperator = requires(const M& a, std::span<const double> x, std::span<double> y) {
    { a.size() } -> std::convertible_to<std::size_t>;
    { a.work() } -> std::convertible_to<std::size_t>;
    a.multiply(x, y);
    { a.row_sums() } -> std::convertible_to<std::vector<double>>;
    { a.col_sums() } -> std::convertible_to<std::vector<double>>;
};

/// Nonnegative matrix in compressed rows, for weighted examples and oracles.
class WeightedMatrix {
public:
    WeightedMatrix() = default;
    static WeightedMatrix from_dense(const std::vector<std::vector<double>>& rows);

    std::size_t size() const { return m_; }
    std::size_t work() const { return m_ + values_.size(); }
    std::uint64_t nnz() const { return values_.size(); }
    void multiply(std::span<const double> x, std::span<double> y) const;
    void multiply_transpose(std::span<const double> x, std::span<double> y) const;
    std::vector<double> row_sums() const;
    std::vector<double> col_sums() const;

    template <class F>
    void for_each_in_row(std::size_t i, F&& f) const {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) f(cols_[p], values_[p]);
    }

    /// Entries whose row and column share a strongly connected component. The spectral radius is unchanged.
    template <class M>
    static WeightedMatrix intra_component_of(const M& a);

private:
    std::size_t m_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> cols_;
    std::vector<double> values_;
};

template <class M>
concept PatternOperator = SparseOperator<M> && requires(const M& a) {
    a.for_each_in_row(std::size_t{}, [](std::size_t, double) {});
    { a.nnz() } -> std::convertible_to<std::uint64_t>;
};

/// Component label per vertex of the directed graph given in compressed rows.
std::vector<std::uint32_t> strong_components(std::size_t m, std::span<const std::size_t> row_ptr,
                                             std::span<const std::uint32_t> cols);

template <class M>
WeightedMatrix WeightedMatrix::intra_component_of(const M& a) {
    const std::size_t m = a.size();
    std::vector<std::size_t> ptr{0};
    std::vector<std::uint32_t> cols;
    std::vector<double> vals;
    for (std::size_t i = 0; i < m; ++i) {
        a.for_each_in_row(i, [&](std::size_t j, double v) {
            cols.push_back(static_cast<std::uint32_t>(j));
            vals.push_back(v);
        });
        ptr.push_back(cols.size());
    }
    const auto comp = strong_components(m, ptr, cols);
    WeightedMatrix b;
    b.m_ = m;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p) {
            if (comp[cols[p]] != comp[i]) continue;
            b.cols_.push_back(cols[p]);
            b.values_.push_back(vals[p]);
        }
        b.row_ptr_.push_back(b.cols_.size());
    }
    return b;
}

struct SpectralResult {
    double estimate = 0.0;
    double residual = 0.0;         // relative change of the quotient at exit
    std::size_t iterations = 0;
    double certified_upper = 0.0;  // min(Gershgorin, best Collatz-Wielandt bound)
    double gershgorin = 0.0;
    bool fallback = false;         // quotient did not settle within max_iter
};

struct PowerOptions {
    double tol = 1e-8;
    std::size_t max_iter = 10'000;
    /// Largest pattern the strongly-connected fallback will copy.
    std::uint64_t component_budget = 10'000'000;
};

/// min(max row sum, max column sum).
template <SparseOperator M>
double gershgorin_bound(const M& a) {
    const auto r = a.row_sums();
    const auto c = a.col_sums();
    const double mr = r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
    const double mc = c.empty() ? 0.0 : *std::max_element(c.begin(), c.end());
    return std::min(mr, mc);
}

namespace detail {

// A single small change can be a coincidence (two equal quotients).
inline constexpr std::size_t kCalmIterations = 10;

template <SparseOperator M>
SpectralResult shifted_power(const M& a, const PowerOptions& opts) {
    SpectralResult res;
    res.gershgorin = gershgorin_bound(a);
    res.certified_upper = res.gershgorin;
    const std::size_t m = a.size();
    if (m == 0 || res.gershgorin == 0.0) return res;

    std::vector<double> v(m, 1.0 / static_cast<double>(m)), w(m);
    double prev = -1.0;
    bool settled = false;
    std::size_t calm = 0;  // consecutive iterations with residual <= tol
    for (std::size_t it = 1; it <= opts.max_iter && !settled; ++it) {
        a.multiply(v, w);
        const double q = std::accumulate(w.begin(), w.end(), 0.0);  // sum(v) == 1
        double cw = 0.0;
        for (std::size_t i = 0; i < m; ++i) cw = std::max(cw, w[i] / v[i]);
        res.certified_upper = std::min(res.certified_upper, cw);
        res.estimate = q;
        res.iterations = it;
        res.residual = prev < 0.0 ? 1.0 : std::abs(q - prev) / std::max(q, 1e-300);
        const double gap = (res.certified_upper - q) / std::max(q, 1e-300);
        calm = res.residual <= opts.tol ? calm + 1 : 0;
        settled = gap <= opts.tol || calm >= kCalmIterations;
        prev = q;
        const double norm = q + 1.0;
        for (std::size_t i = 0; i < m; ++i) v[i] = (w[i] + v[i]) / norm;
    }
    res.fallback = !settled;
    res.estimate = std::min(res.estimate, res.certified_upper);
    return res;
}

}  // namespace detail

/// Power iteration on A + I from the all-ones vector. The shift removes
/// periodicity without moving the Perron root. Every iterate is positive, so
/// max_i (A v)_i / v_i is a certified upper bound on r(A).
///
/// Reducible patterns can stall or settle falsely (Jordan-like chains between
/// components converge like 1/k). When the pattern is available and small
/// enough, the iteration runs on the intra-component part instead: same
/// r(A), irreducible diagonal blocks, no chains. Otherwise a stalled run falls
/// back to the sum-norm root (1^T A^k 1)^(1/k), capped by the certified bound.
template <SparseOperator M>
SpectralResult power_iteration(const M& a, const PowerOptions& opts = {}) {
    if (!(opts.tol > 0.0) || opts.tol > 1e-3) throw Error("tol must lie in (0, 1e-3]");
    if constexpr (PatternOperator<M>) {
        if (a.nnz() <= opts.component_budget) {
            const double gersh = gershgorin_bound(a);
            if (gersh == 0.0) return {};
            auto res = detail::shifted_power(WeightedMatrix::intra_component_of(a), opts);
            res.gershgorin = gersh;
            res.certified_upper = std::min(res.certified_upper, gersh);
            res.estimate = std::min(res.estimate, res.certified_upper);
            return res;
        }
    }
    auto res = detail::shifted_power(a, opts);
    if (!res.fallback) return res;
    double plateau = res.certified_upper;
    std::vector<double> v(a.size(), 1.0), w(a.size());
    double log_total = 0.0;
    for (std::size_t k = 1; k <= opts.max_iter; ++k) {
        a.multiply(v, w);
        const double s = std::accumulate(w.begin(), w.end(), 0.0);
        if (s == 0.0) {
            plateau = 0.0;
            break;
        }
        log_total += std::log(s);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / s;
        plateau = std::exp(log_total / static_cast<double>(k));
    }
    res.estimate = std::min(plateau, res.certified_upper);
    return res;
}

/// (1^T A^k 1)^(1/k), evaluated with k products and running rescaling.
template <SparseOperator M>
double norm_root(const M& a, std::size_t k, double op_budget = 1e11) {
    if (k == 0) throw Error("norm_root: k must be positive");
    const std::size_t m = a.size();
    if (m == 0) return 0.0;
    if (static_cast<double>(k) * static_cast<double>(a.work()) > op_budget)
        throw Error("norm budget exceeded");
    std::vector<double> v(m, 1.0), w(m);
    double log_total = 0.0;
    for (std::size_t step = 0; step < k; ++step) {
        a.multiply(v, w);
        const double s = std::accumulate(w.begin(), w.end(), 0.0);
        if (s == 0.0) return 0.0;
        if (!std::isfinite(s)) throw Error("norm budget exceeded");
        log_total += std::log(s);
        for (std::size_t i = 0; i < m; ++i) v[i] = w[i] / s;
    }
    return std::exp(log_total / static_cast<double>(k));
}

}  // namespace mmd

#include "mmd/spectral.hpp"

namespace mmd {

WeightedMatrix WeightedMatrix::from_dense(const std::vector<std::vector<double>>& rows) {
    WeightedMatrix a;
    a.m_ = rows.size();
    for (const auto& r : rows) {
        if (r.size() != a.m_) throw Error("matrix must be square");
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (r[j] < 0.0) throw Error("matrix must be nonnegative");
            if (r[j] != 0.0) {
                a.cols_.push_back(j);
                a.values_.push_back(r[j]);
            }
        }
        a.row_ptr_.push_back(a.cols_.size());
    }
    return a;
}

void WeightedMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < m_; ++i) {
        double s = 0.0;
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[cols_[p]];
        y[i] = s;
    }
}

void WeightedMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) y[cols_[p]] += values_[p] * x[i];
}

std::vector<double> WeightedMatrix::row_sums() const {
    std::vector<double> out(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) out[i] += values_[p];
    return out;
}

std::vector<double> WeightedMatrix::col_sums() const {
    std::vector<double> out(m_, 0.0);
    for (std::size_t p = 0; p < values_.size(); ++p) out[cols_[p]] += values_[p];
    return out;
}

// Iterative Tarjan.
std::vector<std::uint32_t> strong_components(std::size_t m, std::span<const std::size_t> row_ptr,
                                             std::span<const std::uint32_t> cols) {
    constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> index(m, kUnset), low(m, 0), comp(m, kUnset);
    std::vector<std::uint32_t> stack;
    std::vector<bool> on_stack(m, false);
    std::vector<std::pair<std::uint32_t, std::size_t>> call;  // vertex, next edge
    std::uint32_t counter = 0, n_comp = 0;
    for (std::uint32_t root = 0; root < m; ++root) {
        if (index[root] != kUnset) continue;
        call.push_back({root, row_ptr[root]});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [v, p] = call.back();
            if (p < row_ptr[v + 1]) {
                const std::uint32_t w = cols[p++];
                if (index[w] == kUnset) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, row_ptr[w]});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const std::uint32_t done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
            if (low[done] == index[done]) {
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = n_comp;
                } while (w != done);
                ++n_comp;
            }
        }
    }
    return comp;
}

}  // namespace mmd

#pragma once

#include "dircom/bivariate.hpp"
#include "dircom/error.hpp"
#include "dircom/measures.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace dircom {

/// p~(v, w) = (p(v, w) + p(w, v)) / 2. Symmetric bit for bit, with the same
/// marginals as p.
inline BivariateDistribution symmetrize(const BivariateDistribution& p) {
    const std::size_t n = p.size();
    std::vector<double> values(n * n);
    for (std::size_t v = 0; v < n; ++v) {
        values[v * n + v] = p(v, v);
        for (std::size_t w = v + 1; w < n; ++w) {
            const double avg = 0.5 * (p(v, w) + p(w, v));
            values[v * n + w] = avg;
            values[w * n + v] = avg;
        }
    }
    return BivariateDistribution(n, std::move(values), kDefaultMarginalTolerance + p.max_marginal_gap());
}

/// Symmetric node-pair correlation
///   q(v, w) = p~(v, w) - p~_V(v) p~_V(w)
/// of the symmetrized distribution. Rows sum to zero.
class CorrelationTable {
public:
    CorrelationTable() = default;

    explicit CorrelationTable(const BivariateDistribution& p) : n_(p.size()), q_(p.size() * p.size()) {
        require_dense_size(n_, "correlation table");
        const auto sym = symmetrize(p);
        const auto& m = sym.marginal_v();
        for (std::size_t v = 0; v < n_; ++v) {
            for (std::size_t w = v; w < n_; ++w) {
                const double value = sym(v, w) - m[v] * m[w];
                q_[v * n_ + w] = value;
                q_[w * n_ + v] = value;
            }
        }
        marginal_ = m;
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t v, std::size_t w) const noexcept { return q_[v * n_ + w]; }
    std::span<const double> row(std::size_t v) const noexcept {
        return std::span<const double>(q_).subspan(v * n_, n_);
    }

    /// p~_V, which equals p_V up to rounding.
    const std::vector<double>& marginal() const noexcept { return marginal_; }

private:
    std::size_t n_ = 0;
    std::vector<double> q_;
    std::vector<double> marginal_;
};

inline CorrelationTable correlation_table(const BivariateDistribution& p) { return CorrelationTable(p); }

/// q(S1, S2) = sum over v in S1, w in S2 of q(v, w).
inline double set_correlation(const CorrelationTable& q, const NodeSet& a, const NodeSet& b) {
    a.validate(q.size());
    b.validate(q.size());
    double sum = 0.0;
    for (auto v : a) {
        const auto row = q.row(v);
        for (auto w : b) {
            sum += row[w];
        }
    }
    return sum;
}

/// q(S1, S2) / (|S1| |S2|).
inline double average_correlation(const CorrelationTable& q, const NodeSet& a, const NodeSet& b) {
    if (a.empty() || b.empty()) {
        throw ValidationError("average correlation needs two nonempty sets");
    }
    return set_correlation(q, a, b) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

/// Q(P) = sum_c q(S_c, S_c).
inline double modularity(const CorrelationTable& q, const Partition& partition) {
    if (partition.node_count() != q.size()) {
        throw ValidationError("partition size does not match the correlation table");
    }
    double total = 0.0;
    for (const auto& s : partition.sets()) {
        total += set_correlation(q, s, s);
    }
    return total;
}

} // namespace dircom

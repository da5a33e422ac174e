#pragma once

#include "dircom/bivariate.hpp"
#include "dircom/error.hpp"
#include "dircom/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dircom {

/// Row-stochastic matrix stored as sparse rows plus an implicit uniform term:
///
///   P(i, j) = S(i, j) + teleport(i) / n
///
/// The uniform term keeps PageRank's dense jump matrix out of memory.
class TransitionMatrix {
public:
    struct Entry {
        std::size_t col;
        double value;
    };

    static constexpr double kRowSumTolerance = 1e-12;

    TransitionMatrix() = default;

    /// `rows[i]` holds the sparse part of row i (columns strictly increasing);
    /// `teleport` is empty or has one entry per row.
    TransitionMatrix(std::vector<std::vector<Entry>> rows, std::vector<double> teleport = {})
        : n_(rows.size()), teleport_(std::move(teleport)) {
        if (teleport_.empty()) {
            teleport_.assign(n_, 0.0);
        }
        if (teleport_.size() != n_) {
            throw ValidationError("teleport vector length does not match row count");
        }
        row_begin_.assign(1, 0);
        row_begin_.reserve(n_ + 1);
        for (std::size_t i = 0; i < n_; ++i) {
            double sum = teleport_[i];
            if (!(teleport_[i] >= 0.0)) {
                throw ValidationError("negative teleport mass in row " + std::to_string(i));
            }
            for (std::size_t k = 0; k < rows[i].size(); ++k) {
                const auto& e = rows[i][k];
                if (e.col >= n_ || (k > 0 && e.col <= rows[i][k - 1].col)) {
                    throw ValidationError("row " + std::to_string(i) + " has invalid column order");
                }
                if (!(e.value >= 0.0) || !std::isfinite(e.value)) {
                    throw ValidationError("row " + std::to_string(i) + " has a negative entry");
                }
                sum += e.value;
                entries_.push_back(e);
            }
            if (std::abs(sum - 1.0) > kRowSumTolerance) {
                throw ValidationError("row " + std::to_string(i) + " sums to " + detail::format_double(sum));
            }
            row_begin_.push_back(entries_.size());
        }
    }

    std::size_t size() const noexcept { return n_; }

    std::span<const Entry> sparse_row(std::size_t i) const {
        return std::span<const Entry>(entries_).subspan(row_begin_[i], row_begin_[i + 1] - row_begin_[i]);
    }

    double teleport(std::size_t i) const { return teleport_[i]; }

    double operator()(std::size_t i, std::size_t j) const {
        double value = teleport_[i] / static_cast<double>(n_);
        for (const auto& e : sparse_row(i)) {
            if (e.col == j) {
                value += e.value;
            }
        }
        return value;
    }

    double row_sum(std::size_t i) const {
        double sum = teleport_[i];
        for (const auto& e : sparse_row(i)) {
            sum += e.value;
        }
        return sum;
    }

    /// Dense row i, length n.
    std::vector<double> dense_row(std::size_t i) const {
        std::vector<double> row(n_, teleport_[i] / static_cast<double>(n_));
        for (const auto& e : sparse_row(i)) {
            row[e.col] += e.value;
        }
        return row;
    }

    /// out = x P.
    void left_multiply(std::span<const double> x, std::span<double> out) const {
        double jump = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            jump += x[i] * teleport_[i];
        }
        std::fill(out.begin(), out.end(), jump / static_cast<double>(n_));
        for (std::size_t i = 0; i < n_; ++i) {
            const double xi = x[i];
            if (xi == 0.0) {
                continue;
            }
            for (const auto& e : sparse_row(i)) {
                out[e.col] += xi * e.value;
            }
        }
    }

private:
    std::size_t n_ = 0;
    std::vector<Entry> entries_;
    std::vector<std::size_t> row_begin_{0};
    std::vector<double> teleport_;
};

/// p_ij = a_ij / k_i^out. Every node needs a positive out-degree.
inline TransitionMatrix simple_walk_transition(const DirectedGraph& g) {
    std::vector<std::vector<TransitionMatrix::Entry>> rows(g.size());
    const auto& k_out = g.out_degrees();
    for (NodeIndex i = 0; i < g.size(); ++i) {
        if (!(k_out[i] > 0.0)) {
            throw ValidationError("simple random walk: node '" + g.label(i) + "' has no outgoing edges");
        }
        for (const auto& e : g.out_edges(i)) {
            rows[i].push_back({e.dst, e.weight / k_out[i]});
        }
    }
    return TransitionMatrix(std::move(rows));
}

/// p_ij = (1 - damping) / n + damping * a_ij / k_i^out. A node without
/// out-edges spreads its full row uniformly.
inline TransitionMatrix pagerank_transition(const DirectedGraph& g, double damping) {
    if (!(damping > 0.0 && damping < 1.0)) {
        throw ValidationError("PageRank damping must lie in (0, 1), got " + detail::format_double(damping));
    }
    if (g.empty()) {
        throw ValidationError("PageRank needs at least one node");
    }
    const std::size_t n = g.size();
    std::vector<std::vector<TransitionMatrix::Entry>> rows(n);
    std::vector<double> teleport(n, 1.0 - damping);
    const auto& k_out = g.out_degrees();
    for (NodeIndex i = 0; i < n; ++i) {
        if (!(k_out[i] > 0.0)) {
            teleport[i] = 1.0;
            continue;
        }
        for (const auto& e : g.out_edges(i)) {
            rows[i].push_back({e.dst, damping * e.weight / k_out[i]});
        }
    }
    return TransitionMatrix(std::move(rows), std::move(teleport));
}

/// Adjacency of the walk with self loops and backward jumps:
/// self_weight * I + forward_weight * A + backward_weight * A^T.
inline std::vector<std::vector<TransitionMatrix::Entry>>
backward_jump_adjacency(const DirectedGraph& g, double self_weight, double forward_weight, double backward_weight) {
    const std::size_t n = g.size();
    std::vector<std::vector<TransitionMatrix::Entry>> rows(n);
    for (NodeIndex i = 0; i < n; ++i) {
        if (self_weight != 0.0) {
            rows[i].push_back({i, self_weight});
        }
    }
    for (const auto& e : g.edges()) {
        if (forward_weight != 0.0) {
            rows[e.src].push_back({e.dst, forward_weight * e.weight});
        }
        if (backward_weight != 0.0) {
            rows[e.dst].push_back({e.src, backward_weight * e.weight});
        }
    }
    for (auto& row : rows) {
        std::stable_sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.col < b.col; });
        std::vector<TransitionMatrix::Entry> merged;
        merged.reserve(row.size());
        for (const auto& e : row) {
            if (!merged.empty() && merged.back().col == e.col) {
                merged.back().value += e.value;
            } else {
                merged.push_back(e);
            }
        }
        row = std::move(merged);
    }
    return rows;
}

/// Random walk on self_weight * I + forward_weight * A + backward_weight * A^T,
/// row-normalized. The three weights are nonnegative and sum to 1.
inline TransitionMatrix backward_jump_transition(const DirectedGraph& g, double self_weight, double forward_weight,
                                                 double backward_weight) {
    for (double w : {self_weight, forward_weight, backward_weight}) {
        if (!(w >= 0.0)) {
            throw ValidationError("backward-jump weights must be nonnegative");
        }
    }
    if (std::abs(self_weight + forward_weight + backward_weight - 1.0) > 1e-12) {
        throw ValidationError("backward-jump weights must sum to 1");
    }
    auto rows = backward_jump_adjacency(g, self_weight, forward_weight, backward_weight);
    for (NodeIndex i = 0; i < g.size(); ++i) {
        double sum = 0.0;
        for (const auto& e : rows[i]) {
            sum += e.value;
        }
        if (!(sum > 0.0)) {
            throw ValidationError("backward-jump walk: node '" + g.label(i) + "' has an empty row");
        }
        for (auto& e : rows[i]) {
            e.value /= sum;
        }
    }
    return TransitionMatrix(std::move(rows));
}

struct StationaryDistribution {
    std::vector<double> pi;
    /// ||pi P - pi||_1 of the returned vector.
    double residual = 0.0;
    std::size_t iterations = 0;
};

struct StationaryOptions {
    double tolerance = 1e-10;
    /// 0 selects 100 * n + 1000.
    std::size_t max_iterations = 0;
};

namespace detail {

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += std::abs(a[i] - b[i]);
    }
    return d;
}

inline void normalize_probability(std::vector<double>& x) {
    double sum = 0.0;
    for (auto& v : x) {
        v = std::max(v, 0.0);
        sum += v;
    }
    for (auto& v : x) {
        v /= sum;
    }
}

} // namespace detail

/// Power iteration from the uniform vector. Besides each iterate x_k, the
/// average (x_{k-1} + x_k) / 2 is also tested, which converges for chains of
/// period two (bipartite undirected graphs) where plain iterates oscillate.
inline StationaryDistribution stationary_distribution(const TransitionMatrix& P, StationaryOptions options = {}) {
    const std::size_t n = P.size();
    if (n == 0) {
        throw ValidationError("stationary distribution of an empty chain");
    }
    if (!(options.tolerance > 0.0)) {
        throw ValidationError("stationary tolerance must be positive");
    }
    const std::size_t max_iter = options.max_iterations ? options.max_iterations : 100 * n + 1000;

    std::vector<double> prev(n, 1.0 / static_cast<double>(n));
    std::vector<double> cur = prev;
    std::vector<double> next(n);
    std::vector<double> scratch(n);
    bool have_prev = false;
    double last_residual = 0.0;

    auto finish = [&](std::vector<double> pi, std::size_t iterations) {
        detail::normalize_probability(pi);
        P.left_multiply(pi, scratch);
        const double residual = detail::l1_distance(scratch, pi);
        return StationaryDistribution{std::move(pi), residual, iterations};
    };

    for (std::size_t iter = 0; iter <= max_iter; ++iter) {
        P.left_multiply(cur, next);
        const double plain = detail::l1_distance(next, cur);
        if (plain <= options.tolerance) {
            auto result = finish(cur, iter);
            if (result.residual <= options.tolerance) {
                return result;
            }
        }
        if (have_prev) {
            // (prev + cur) / 2 maps to (cur + next) / 2.
            const double averaged = 0.5 * detail::l1_distance(next, prev);
            if (averaged <= options.tolerance) {
                std::vector<double> mean(n);
                for (std::size_t i = 0; i < n; ++i) {
                    mean[i] = 0.5 * (prev[i] + cur[i]);
                }
                auto result = finish(std::move(mean), iter);
                if (result.residual <= options.tolerance) {
                    return result;
                }
            }
            last_residual = std::min(plain, averaged);
        } else {
            last_residual = plain;
        }
        std::swap(prev, cur);
        std::swap(cur, next);
        have_prev = true;
    }
    throw ConvergenceError("power iteration did not converge in " + std::to_string(max_iter) +
                               " iterations (residual " + detail::format_double(last_residual) + ")",
                           last_residual, max_iter);
}

/// p(v, w) = pi_v * P(v, w), the law of two successive steps of the stationary chain.
inline BivariateDistribution bivariate_from_chain(const TransitionMatrix& P, const StationaryDistribution& pi,
                                                  double marginal_tolerance = kDefaultMarginalTolerance) {
    const std::size_t n = P.size();
    require_dense_size(n, "bivariate distribution");
    if (pi.pi.size() != n) {
        throw ValidationError("stationary vector length does not match the chain");
    }
    std::vector<double> values(n * n);
    for (std::size_t v = 0; v < n; ++v) {
        const double base = pi.pi[v] * (P.teleport(v) / static_cast<double>(n));
        std::fill_n(values.begin() + static_cast<std::ptrdiff_t>(v * n), n, base);
        for (const auto& e : P.sparse_row(v)) {
            values[v * n + e.col] = pi.pi[v] * (P.teleport(v) / static_cast<double>(n) + e.value);
        }
    }
    try {
        return BivariateDistribution(n, std::move(values), marginal_tolerance);
    } catch (const ValidationError& err) {
        throw ValidationError(std::string("chain is not stationary: ") + err.what());
    }
}

// Samplers -------------------------------------------------------------------

struct SimpleWalk {};

struct PageRank {
    double damping = 0.9;
};

/// Walk on self * I + forward * A + backward * A^T.
struct BackwardJumpWalk {
    double self = 0.05;
    double forward = 0.85;
    double backward = 0.1;
};

using Sampler = std::variant<SimpleWalk, PageRank, BackwardJumpWalk>;

inline std::string sampler_name(const Sampler& s) {
    struct Visitor {
        std::string operator()(const SimpleWalk&) const { return "simple"; }
        std::string operator()(const PageRank&) const { return "pagerank"; }
        std::string operator()(const BackwardJumpWalk&) const { return "backward"; }
    };
    return std::visit(Visitor{}, s);
}

inline TransitionMatrix transition_matrix(const DirectedGraph& g, const Sampler& sampler) {
    struct Visitor {
        const DirectedGraph& g;
        TransitionMatrix operator()(const SimpleWalk&) const { return simple_walk_transition(g); }
        TransitionMatrix operator()(const PageRank& s) const { return pagerank_transition(g, s.damping); }
        TransitionMatrix operator()(const BackwardJumpWalk& s) const {
            return backward_jump_transition(g, s.self, s.forward, s.backward);
        }
    };
    return std::visit(Visitor{g}, sampler);
}

/// Builds the sampled graph's bivariate distribution; the marginal tolerance is 10 * tol.
inline BivariateDistribution sample_bivariate(const DirectedGraph& g, const Sampler& sampler,
                                              StationaryOptions options = {}) {
    require_dense_size(g.size(), "sampled graph");
    const auto P = transition_matrix(g, sampler);
    const auto pi = stationary_distribution(P, options);
    return bivariate_from_chain(P, pi, 10.0 * options.tolerance);
}

} // namespace dircom

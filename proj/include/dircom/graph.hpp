#pragma once

#include "dircom/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dircom {

using NodeIndex = std::size_t;

struct Edge {
    NodeIndex src = 0;
    NodeIndex dst = 0;
    double weight = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Weighted directed graph over nodes [0, n) with external labels.
///
/// Edges are kept sorted by (src, dst) with duplicates merged by summing
/// their weights, so two graphs built from the same edge multiset compare
/// equal. Immutable after construction.
class DirectedGraph {
public:
    DirectedGraph() = default;

    DirectedGraph(std::vector<std::string> labels, std::vector<Edge> edges)
        : labels_(std::move(labels)), edges_(std::move(edges)) {
        const std::size_t n = labels_.size();
        index_.reserve(n);
        for (NodeIndex i = 0; i < n; ++i) {
            if (!index_.emplace(labels_[i], i).second) {
                throw ValidationError("duplicate node label '" + labels_[i] + "'");
            }
        }
        for (const auto& e : edges_) {
            if (e.src >= n || e.dst >= n) {
                throw ValidationError("edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                                      ") references a node outside [0, " + std::to_string(n) + ")");
            }
            if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
                throw ValidationError("edge (" + labels_[e.src] + ", " + labels_[e.dst] +
                                      ") has invalid weight " + std::to_string(e.weight));
            }
        }
        std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
            return a.src != b.src ? a.src < b.src : a.dst < b.dst;
        });
        std::vector<Edge> merged;
        merged.reserve(edges_.size());
        for (const auto& e : edges_) {
            if (!merged.empty() && merged.back().src == e.src && merged.back().dst == e.dst) {
                merged.back().weight += e.weight;
            } else {
                merged.push_back(e);
            }
        }
        edges_ = std::move(merged);

        out_degree_.assign(n, 0.0);
        in_degree_.assign(n, 0.0);
        row_begin_.assign(n + 1, 0);
        for (const auto& e : edges_) {
            out_degree_[e.src] += e.weight;
            in_degree_[e.dst] += e.weight;
            ++row_begin_[e.src + 1];
        }
        std::partial_sum(row_begin_.begin(), row_begin_.end(), row_begin_.begin());
    }

    /// Graph with labels "0", "1", ..., "n-1".
    static DirectedGraph with_index_labels(std::size_t n, std::vector<Edge> edges) {
        std::vector<std::string> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = std::to_string(i);
        }
        return DirectedGraph(std::move(labels), std::move(edges));
    }

    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }

    std::span<const Edge> edges() const noexcept { return edges_; }

    /// Out-edges of `node`, sorted by destination.
    std::span<const Edge> out_edges(NodeIndex node) const {
        return std::span<const Edge>(edges_).subspan(row_begin_[node], row_begin_[node + 1] - row_begin_[node]);
    }

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& label(NodeIndex i) const { return labels_.at(i); }

    std::optional<NodeIndex> index_of(std::string_view label) const {
        auto it = index_.find(std::string(label));
        if (it == index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    const std::vector<double>& out_degrees() const noexcept { return out_degree_; }
    const std::vector<double>& in_degrees() const noexcept { return in_degree_; }

    double weight(NodeIndex src, NodeIndex dst) const {
        auto row = out_edges(src);
        auto it = std::lower_bound(row.begin(), row.end(), dst,
                                   [](const Edge& e, NodeIndex d) { return e.dst < d; });
        return (it != row.end() && it->dst == dst) ? it->weight : 0.0;
    }

    friend bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
        return a.labels_ == b.labels_ && a.edges_ == b.edges_;
    }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, NodeIndex> index_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> row_begin_{0};
    std::vector<double> out_degree_;
    std::vector<double> in_degree_;
};

/// Accumulates labelled edges and assigns indices in first-appearance order.
class GraphBuilder {
public:
    NodeIndex add_node(std::string_view label) {
        auto [it, inserted] = index_.try_emplace(std::string(label), labels_.size());
        if (inserted) {
            labels_.emplace_back(label);
        }
        return it->second;
    }

    void add_edge(std::string_view src, std::string_view dst, double weight = 1.0) {
        const NodeIndex s = add_node(src);
        const NodeIndex d = add_node(dst);
        edges_.push_back({s, d, weight});
    }

    DirectedGraph build() && { return DirectedGraph(std::move(labels_), std::move(edges_)); }

private:
    std::unordered_map<std::string, NodeIndex> index_;
    std::vector<std::string> labels_;
    std::vector<Edge> edges_;
};

/// k_i^out = sum_j a_ij, using edge weights.
inline std::vector<double> out_degrees(const DirectedGraph& g) { return g.out_degrees(); }

inline DirectedGraph transpose(const DirectedGraph& g) {
    std::vector<Edge> reversed;
    reversed.reserve(g.edges().size());
    for (const auto& e : g.edges()) {
        reversed.push_back({e.dst, e.src, e.weight});
    }
    return DirectedGraph(g.labels(), std::move(reversed));
}

namespace detail {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        parent_[std::max(a, b)] = std::min(a, b);
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

} // namespace detail

/// Component id per node of the undirected version of g; ids are dense and
/// ordered by smallest member.
inline std::vector<std::size_t> weak_components(const DirectedGraph& g) {
    detail::DisjointSets sets(g.size());
    for (const auto& e : g.edges()) {
        sets.unite(e.src, e.dst);
    }
    std::vector<std::size_t> component(g.size());
    std::unordered_map<std::size_t, std::size_t> dense;
    for (NodeIndex i = 0; i < g.size(); ++i) {
        auto [it, inserted] = dense.try_emplace(sets.find(i), dense.size());
        component[i] = it->second;
    }
    return component;
}

/// True iff the undirected version of g is connected. The empty graph counts as connected.
inline bool is_weakly_connected(const DirectedGraph& g) {
    if (g.size() <= 1) {
        return true;
    }
    const auto component = weak_components(g);
    return std::all_of(component.begin(), component.end(), [](std::size_t c) { return c == 0; });
}

/// Subgraph induced by `nodes` (kept in the given order); labels follow their nodes.
inline DirectedGraph induced_subgraph(const DirectedGraph& g, std::span<const NodeIndex> nodes) {
    constexpr auto kDropped = static_cast<NodeIndex>(-1);
    std::vector<NodeIndex> remap(g.size(), kDropped);
    std::vector<std::string> labels;
    labels.reserve(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        remap.at(nodes[k]) = k;
        labels.push_back(g.label(nodes[k]));
    }
    std::vector<Edge> edges;
    for (const auto& e : g.edges()) {
        if (remap[e.src] != kDropped && remap[e.dst] != kDropped) {
            edges.push_back({remap[e.src], remap[e.dst], e.weight});
        }
    }
    return DirectedGraph(std::move(labels), std::move(edges));
}

/// Nodes with positive weighted in- or out-degree, ascending.
inline std::vector<NodeIndex> non_isolated_nodes(const DirectedGraph& g) {
    std::vector<NodeIndex> kept;
    for (NodeIndex i = 0; i < g.size(); ++i) {
        if (g.out_degrees()[i] > 0.0 || g.in_degrees()[i] > 0.0) {
            kept.push_back(i);
        }
    }
    return kept;
}

/// Drops nodes with zero in- and out-degree and compacts indices.
inline DirectedGraph remove_isolated(const DirectedGraph& g) {
    const auto kept = non_isolated_nodes(g);
    return induced_subgraph(g, kept);
}

} // namespace dircom

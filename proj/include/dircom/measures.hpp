#pragma once

#include "dircom/bivariate.hpp"
#include "dircom/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace dircom {

/// Sorted set of distinct node indices.
class NodeSet {
public:
    NodeSet() = default;

    explicit NodeSet(std::vector<std::size_t> nodes) : nodes_(std::move(nodes)) {
        std::sort(nodes_.begin(), nodes_.end());
        if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
            throw ValidationError("node set contains a duplicate index");
        }
    }

    NodeSet(std::initializer_list<std::size_t> nodes) : NodeSet(std::vector<std::size_t>(nodes)) {}

    static NodeSet all(std::size_t n) {
        std::vector<std::size_t> nodes(n);
        for (std::size_t i = 0; i < n; ++i) {
            nodes[i] = i;
        }
        return NodeSet(std::move(nodes));
    }

    /// Builds the set of indices where `mask` is true.
    static NodeSet from_mask(const std::vector<bool>& mask) {
        std::vector<std::size_t> nodes;
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i]) {
                nodes.push_back(i);
            }
        }
        return NodeSet(std::move(nodes));
    }

    std::size_t size() const noexcept { return nodes_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }
    auto begin() const noexcept { return nodes_.begin(); }
    auto end() const noexcept { return nodes_.end(); }
    const std::vector<std::size_t>& indices() const noexcept { return nodes_; }

    bool contains(std::size_t v) const { return std::binary_search(nodes_.begin(), nodes_.end(), v); }

    /// Throws unless every index lies in [0, n).
    void validate(std::size_t n) const {
        if (!nodes_.empty() && nodes_.back() >= n) {
            throw ValidationError("node index " + std::to_string(nodes_.back()) + " outside [0, " +
                                  std::to_string(n) + ")");
        }
    }

    std::vector<bool> mask(std::size_t n) const {
        validate(n);
        std::vector<bool> m(n, false);
        for (auto v : nodes_) {
            m[v] = true;
        }
        return m;
    }

    NodeSet complement(std::size_t n) const {
        auto m = mask(n);
        m.flip();
        return from_mask(m);
    }

    NodeSet united(const NodeSet& other) const {
        std::vector<std::size_t> out;
        std::set_union(begin(), end(), other.begin(), other.end(), std::back_inserter(out));
        return NodeSet(std::move(out));
    }

    friend bool operator==(const NodeSet&, const NodeSet&) = default;
    friend auto operator<=>(const NodeSet&, const NodeSet&) = default;

private:
    std::vector<std::size_t> nodes_;
};

/// Disjoint node sets covering [0, n).
class Partition {
public:
    Partition() = default;

    Partition(std::size_t n, std::vector<NodeSet> sets) : n_(n), sets_(std::move(sets)) {
        std::vector<bool> covered(n, false);
        std::size_t count = 0;
        for (const auto& s : sets_) {
            s.validate(n);
            for (auto v : s) {
                if (covered[v]) {
                    throw ValidationError("partition sets overlap at node " + std::to_string(v));
                }
                covered[v] = true;
                ++count;
            }
        }
        if (count != n) {
            throw ValidationError("partition covers " + std::to_string(count) + " of " + std::to_string(n) +
                                  " nodes");
        }
    }

    static Partition singletons(std::size_t n) {
        std::vector<NodeSet> sets;
        sets.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            sets.push_back(NodeSet{i});
        }
        return Partition(n, std::move(sets));
    }

    static Partition whole(std::size_t n) { return Partition(n, {NodeSet::all(n)}); }

    /// Groups nodes by label value; sets are ordered by smallest member.
    static Partition from_labels(const std::vector<std::size_t>& labels) {
        std::vector<std::vector<std::size_t>> groups;
        std::vector<std::size_t> label_slot;
        for (std::size_t v = 0; v < labels.size(); ++v) {
            const std::size_t l = labels[v];
            if (l >= label_slot.size()) {
                label_slot.resize(l + 1, static_cast<std::size_t>(-1));
            }
            if (label_slot[l] == static_cast<std::size_t>(-1)) {
                label_slot[l] = groups.size();
                groups.emplace_back();
            }
            groups[label_slot[l]].push_back(v);
        }
        std::vector<NodeSet> sets;
        for (auto& g : groups) {
            sets.emplace_back(std::move(g));
        }
        return Partition(labels.size(), std::move(sets));
    }

    std::size_t node_count() const noexcept { return n_; }
    std::size_t size() const noexcept { return sets_.size(); }
    const std::vector<NodeSet>& sets() const noexcept { return sets_; }
    const NodeSet& operator[](std::size_t i) const { return sets_[i]; }

    /// Set index of every node.
    std::vector<std::size_t> labels() const {
        std::vector<std::size_t> out(n_);
        for (std::size_t c = 0; c < sets_.size(); ++c) {
            for (auto v : sets_[c]) {
                out[v] = c;
            }
        }
        return out;
    }

private:
    std::size_t n_ = 0;
    std::vector<NodeSet> sets_;
};

/// C(S) = Pr(V in S).
inline double centrality(const BivariateDistribution& p, const NodeSet& s) {
    s.validate(p.size());
    double c = 0.0;
    for (auto v : s) {
        c += p.marginal_v()[v];
    }
    return c;
}

/// Pr(V in given, W in target).
inline double joint_mass(const BivariateDistribution& p, const NodeSet& target, const NodeSet& given) {
    const auto in_target = target.mask(p.size());
    given.validate(p.size());
    double mass = 0.0;
    for (auto v : given) {
        const auto row = p.row(v);
        for (std::size_t w = 0; w < row.size(); ++w) {
            if (in_target[w]) {
                mass += row[w];
            }
        }
    }
    return mass;
}

/// RC(target | given) = Pr(W in target | V in given). Undefined when C(given) = 0.
inline double relative_centrality(const BivariateDistribution& p, const NodeSet& target, const NodeSet& given) {
    const double denom = centrality(p, given);
    if (!(denom > 0.0)) {
        throw ValidationError("relative centrality is undefined: conditioning set has zero centrality");
    }
    return joint_mass(p, target, given) / denom;
}

/// Str(S) = RC(S | S) - C(S).
inline double community_strength(const BivariateDistribution& p, const NodeSet& s) {
    const double c = centrality(p, s);
    if (!(c > 0.0)) {
        throw ValidationError("community strength is undefined for a set with zero centrality");
    }
    return joint_mass(p, s, s) / c - c;
}

/// Sign of a tested quantity after applying the comparison tolerance.
enum class Verdict { holds, fails, boundary };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::holds:
        return "holds";
    case Verdict::fails:
        return "fails";
    case Verdict::boundary:
        return "boundary";
    }
    return "?";
}

/// Six equivalent characterizations of "S is a community", each expressed as
/// a signed quantity that is nonnegative exactly when the statement holds:
///
///   0: RC(S|S) - C(S)            3: C(S) - RC(S|S^c)
///   1: RC(S|S) - RC(S|S^c)       4: RC(S^c|S^c) - C(S^c)
///   2: C(S^c) - RC(S^c|S)        5: RC(S^c|S^c) - RC(S^c|S)
struct CommunityDiagnostic {
    static constexpr double kTolerance = 1e-10;

    std::array<double, 6> margins{};
    std::array<Verdict, 6> verdicts{};

    /// True when no statement is on the boundary and all six agree.
    bool consistent() const {
        return std::all_of(verdicts.begin(), verdicts.end(), [&](Verdict v) { return v == verdicts[0]; }) &&
               verdicts[0] != Verdict::boundary;
    }

    bool on_boundary() const {
        return std::any_of(verdicts.begin(), verdicts.end(), [](Verdict v) { return v == Verdict::boundary; });
    }

    /// No statement holds while another fails.
    bool agree() const {
        const bool any_hold = std::any_of(verdicts.begin(), verdicts.end(), [](Verdict v) { return v == Verdict::holds; });
        const bool any_fail = std::any_of(verdicts.begin(), verdicts.end(), [](Verdict v) { return v == Verdict::fails; });
        return !(any_hold && any_fail);
    }
};

struct CommunityReport {
    double strength = 0.0;
    bool is_community = false;
    /// Present only when 0 < C(S) < 1.
    std::optional<CommunityDiagnostic> diagnostic;
};

inline CommunityDiagnostic community_diagnostic(const BivariateDistribution& p, const NodeSet& s) {
    const std::size_t n = p.size();
    const NodeSet sc = s.complement(n);
    const double c_s = centrality(p, s);
    const double c_sc = centrality(p, sc);
    if (!(c_s > 0.0) || !(c_sc > 0.0)) {
        throw ValidationError("community diagnostic needs 0 < C(S) < 1");
    }
    const double rc_s_s = relative_centrality(p, s, s);
    const double rc_s_sc = relative_centrality(p, s, sc);
    const double rc_sc_s = relative_centrality(p, sc, s);
    const double rc_sc_sc = relative_centrality(p, sc, sc);

    CommunityDiagnostic d;
    d.margins = {rc_s_s - c_s, rc_s_s - rc_s_sc, c_sc - rc_sc_s, c_s - rc_s_sc, rc_sc_sc - c_sc, rc_sc_sc - rc_sc_s};
    for (std::size_t k = 0; k < 6; ++k) {
        const double m = d.margins[k];
        d.verdicts[k] = m > CommunityDiagnostic::kTolerance    ? Verdict::holds
                        : m < -CommunityDiagnostic::kTolerance ? Verdict::fails
                                                               : Verdict::boundary;
    }
    return d;
}

/// S is a community iff Str(S) >= 0. The six-statement diagnostic is
/// attached when 0 < C(S) < 1.
inline CommunityReport is_community(const BivariateDistribution& p, const NodeSet& s) {
    CommunityReport report;
    report.strength = community_strength(p, s);
    report.is_community = report.strength >= 0.0;
    const double c = centrality(p, s.complement(p.size()));
    if (c > 0.0) {
        report.diagnostic = community_diagnostic(p, s);
    }
    return report;
}

/// Both forms of the modularity index of a partition.
struct ModularityForms {
    /// sum_c C(S_c) * Str(S_c); sets with zero centrality contribute 0.
    double weighted_strength = 0.0;
    /// sum_c sum_{v,w in S_c} (p(v,w) - p_V(v) p_W(w)).
    double pairwise = 0.0;
};

inline ModularityForms modularity_forms(const BivariateDistribution& p, const Partition& partition) {
    const std::size_t n = p.size();
    if (partition.node_count() != n) {
        throw ValidationError("partition covers " + std::to_string(partition.node_count()) +
                              " nodes but the distribution has " + std::to_string(n));
    }
    ModularityForms forms;
    for (const auto& s : partition.sets()) {
        const double c = centrality(p, s);
        if (c > 0.0) {
            forms.weighted_strength += c * community_strength(p, s);
        }
    }
    const auto label = partition.labels();
    std::vector<double> in_mass(partition.size(), 0.0);
    std::vector<double> mass_v(partition.size(), 0.0);
    std::vector<double> mass_w(partition.size(), 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        const auto row = p.row(v);
        double inside = 0.0;
        for (std::size_t w = 0; w < n; ++w) {
            if (label[w] == label[v]) {
                inside += row[w];
            }
        }
        in_mass[label[v]] += inside;
        mass_v[label[v]] += p.marginal_v()[v];
        mass_w[label[v]] += p.marginal_w()[v];
    }
    for (std::size_t c = 0; c < partition.size(); ++c) {
        forms.pairwise += in_mass[c] - mass_v[c] * mass_w[c];
    }
    return forms;
}

/// Q(P). Both forms are evaluated and must agree within 1e-10, widened by
/// the distribution's marginal gap (the forms differ by C_V (C_W - C_V)).
inline double modularity(const BivariateDistribution& p, const Partition& partition) {
    const auto forms = modularity_forms(p, partition);
    const double allowed = 1e-10 + static_cast<double>(p.size()) * p.max_marginal_gap();
    if (std::abs(forms.weighted_strength - forms.pairwise) > allowed) {
        throw Error("modularity forms disagree: " + detail::format_double(forms.weighted_strength) + " vs " +
                    detail::format_double(forms.pairwise));
    }
    return forms.pairwise;
}

} // namespace dircom

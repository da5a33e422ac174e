#pragma once

#include "dircom/bivariate.hpp"
#include "dircom/error.hpp"
#include "dircom/measures.hpp"
#include "dircom/symmetrize.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dircom {

enum class MergePolicy {
    /// Merge the pair with the largest average correlation.
    greedy,
    /// Merge the first pair, in id order, whose correlation is nonnegative.
    first_nonnegative,
};

inline const char* to_string(MergePolicy p) { return p == MergePolicy::greedy ? "greedy" : "first-nonnegative"; }

/// When to stop merging. The natural stop halts once no two sets have a
/// nonnegative correlation; a target set count keeps merging the policy's
/// preferred pair, negative or not, until that many sets remain.
struct StopRule {
    std::optional<std::size_t> target_sets;

    static StopRule natural() { return {}; }
    static StopRule force(std::size_t k) { return {k}; }

    bool is_natural() const noexcept { return !target_sets.has_value(); }
};

/// Scores within this distance are treated as tied; ties go to the
/// lexicographically smallest (id_a, id_b).
inline constexpr double kMergeTieTolerance = 1e-12;

/// Pair correlations at or above -kZeroCorrelationTolerance count as
/// nonnegative. Exact zeros (for instance a node reached only by teleport)
/// otherwise land on either side of 0 by rounding.
inline constexpr double kZeroCorrelationTolerance = 1e-12;

struct MergeRecord {
    std::size_t set_a = 0;
    std::size_t set_b = 0;
    std::size_t merged = 0;
    double average_correlation = 0.0;
    double correlation = 0.0;
    /// Modularity of the partition right after this merge.
    double modularity = 0.0;
    /// Taken only because the stop rule demanded more merges.
    bool forced = false;
};

struct DetectedSet {
    std::size_t id = 0;
    NodeSet members;
    /// q(S, S), which equals C(S) * Str(S).
    double self_correlation = 0.0;
    double centrality = 0.0;
    /// Undefined for sets with zero centrality.
    std::optional<double> strength;
};

struct MergeTrace {
    MergePolicy policy = MergePolicy::greedy;
    StopRule stop;
    std::size_t node_count = 0;
    /// Modularity of the all-singletons partition.
    double initial_modularity = 0.0;
    std::vector<MergeRecord> merges;
    /// Final sets ordered by id, and the matching partition.
    std::vector<DetectedSet> sets;
    Partition partition;

    double modularity() const { return merges.empty() ? initial_modularity : merges.back().modularity; }

    std::size_t forced_merges() const {
        return static_cast<std::size_t>(std::count_if(merges.begin(), merges.end(), [](const auto& m) { return m.forced; }));
    }
};

/// State of the agglomerative merge procedure: the active sets and the
/// correlations between them, updated in place on every merge.
///
/// Sets have ids; singletons are 0..n-1 and the t-th merge creates id n+t.
class AgglomerativeDetector {
public:
    struct Candidate {
        std::size_t set_a;
        std::size_t set_b;
        double correlation;
        double average;
    };

    AgglomerativeDetector(const CorrelationTable& table, MergePolicy policy)
        : n_(table.size()), policy_(policy), q_(table.size() * table.size()), marginal_(table.marginal()) {
        if (n_ == 0) {
            throw ValidationError("community detection needs at least one node");
        }
        for (std::size_t v = 0; v < n_; ++v) {
            const auto row = table.row(v);
            std::copy(row.begin(), row.end(), q_.begin() + static_cast<std::ptrdiff_t>(v * n_));
            active_.push_back(v);
            slot_.push_back(v);
            members_.push_back({v});
        }
    }

    std::size_t node_count() const noexcept { return n_; }
    MergePolicy policy() const noexcept { return policy_; }

    /// Ids of the current sets, ascending.
    const std::vector<std::size_t>& active() const noexcept { return active_; }

    const std::vector<std::size_t>& members(std::size_t id) const { return members_.at(id); }

    /// Maintained q(S_a, S_b).
    double correlation(std::size_t a, std::size_t b) const { return q_[slot_.at(a) * n_ + slot_.at(b)]; }

    double average_correlation(std::size_t a, std::size_t b) const {
        return correlation(a, b) / (static_cast<double>(members(a).size()) * static_cast<double>(members(b).size()));
    }

    /// Sum of q(S, S) over the active sets.
    double modularity() const {
        double total = 0.0;
        for (auto id : active_) {
            total += correlation(id, id);
        }
        return total;
    }

    /// The pair the policy would merge next. With `nonnegative_only` only pairs
    /// with q(S_a, S_b) >= -kZeroCorrelationTolerance are eligible.
    std::optional<Candidate> next_pair(bool nonnegative_only) const {
        std::optional<Candidate> best;
        for (std::size_t x = 0; x < active_.size(); ++x) {
            for (std::size_t y = x + 1; y < active_.size(); ++y) {
                const std::size_t a = active_[x];
                const std::size_t b = active_[y];
                const double c = correlation(a, b);
                if (nonnegative_only && !(c >= -kZeroCorrelationTolerance)) {
                    continue;
                }
                const Candidate cand{a, b, c, average_correlation(a, b)};
                if (policy_ == MergePolicy::first_nonnegative && nonnegative_only) {
                    return cand;
                }
                if (!best || cand.average > best->average + kMergeTieTolerance) {
                    best = cand;
                }
            }
        }
        return best;
    }

    /// Merges sets a and b into a new set and returns its id.
    std::size_t merge(std::size_t a, std::size_t b) {
        if (a == b || !is_active(a) || !is_active(b)) {
            throw ValidationError("merge needs two distinct active sets");
        }
        const std::size_t sa = slot_[a];
        const std::size_t sb = slot_[b];
        const double qab = q_[sa * n_ + sb];
        const double self = q_[sa * n_ + sa] + 2.0 * qab + q_[sb * n_ + sb];

        const std::size_t id = slot_.size();
        for (auto other : active_) {
            if (other == a || other == b) {
                continue;
            }
            const std::size_t so = slot_[other];
            const double value = q_[sa * n_ + so] + q_[sb * n_ + so];
            q_[sa * n_ + so] = value;
            q_[so * n_ + sa] = value;
        }
        q_[sa * n_ + sa] = self;
        slot_.push_back(sa);

        std::vector<std::size_t> joined;
        joined.reserve(members_[a].size() + members_[b].size());
        std::merge(members_[a].begin(), members_[a].end(), members_[b].begin(), members_[b].end(),
                   std::back_inserter(joined));
        members_.push_back(std::move(joined));

        active_.erase(std::remove_if(active_.begin(), active_.end(), [&](std::size_t x) { return x == a || x == b; }),
                      active_.end());
        active_.push_back(id);
        return id;
    }

    std::vector<DetectedSet> current_sets() const {
        std::vector<DetectedSet> sets;
        for (auto id : active_) {
            DetectedSet s;
            s.id = id;
            s.members = NodeSet(members_[id]);
            s.self_correlation = correlation(id, id);
            for (auto v : members_[id]) {
                s.centrality += marginal_[v];
            }
            if (s.centrality > 0.0) {
                s.strength = s.self_correlation / s.centrality;
            }
            sets.push_back(std::move(s));
        }
        return sets;
    }

private:
    bool is_active(std::size_t id) const { return std::binary_search(active_.begin(), active_.end(), id); }

    std::size_t n_;
    MergePolicy policy_;
    std::vector<double> q_;
    std::vector<double> marginal_;
    std::vector<std::size_t> active_;
    std::vector<std::size_t> slot_;
    std::vector<std::vector<std::size_t>> members_;
};

/// Hierarchical agglomerative community detection by modularity maximization.
/// Starts from singletons and merges pairs chosen by `policy` until `stop`
/// is met.
inline MergeTrace agglomerative_detect(const CorrelationTable& table, MergePolicy policy = MergePolicy::greedy,
                                       StopRule stop = StopRule::natural()) {
    const std::size_t n = table.size();
    if (stop.target_sets && (*stop.target_sets < 1 || *stop.target_sets > n)) {
        throw ValidationError("target set count must lie in [1, " + std::to_string(n) + "]");
    }
    AgglomerativeDetector detector(table, policy);
    MergeTrace trace;
    trace.policy = policy;
    trace.stop = stop;
    trace.node_count = n;
    trace.initial_modularity = detector.modularity();

    const std::size_t floor = stop.target_sets.value_or(1);
    while (detector.active().size() > floor) {
        auto cand = detector.next_pair(true);
        bool forced = false;
        if (!cand) {
            if (stop.is_natural()) {
                break;
            }
            // No nonnegative pair left: take the largest average correlation.
            AgglomerativeDetector::Candidate best{};
            bool found = false;
            for (std::size_t x = 0; x < detector.active().size(); ++x) {
                for (std::size_t y = x + 1; y < detector.active().size(); ++y) {
                    const auto a = detector.active()[x];
                    const auto b = detector.active()[y];
                    const double avg = detector.average_correlation(a, b);
                    if (!found || avg > best.average + kMergeTieTolerance) {
                        best = {a, b, detector.correlation(a, b), avg};
                        found = true;
                    }
                }
            }
            cand = best;
            forced = true;
        }
        MergeRecord record;
        record.set_a = cand->set_a;
        record.set_b = cand->set_b;
        record.correlation = cand->correlation;
        record.average_correlation = cand->average;
        record.merged = detector.merge(cand->set_a, cand->set_b);
        record.modularity = detector.modularity();
        record.forced = forced;
        trace.merges.push_back(record);
    }

    trace.sets = detector.current_sets();
    std::vector<NodeSet> parts;
    for (const auto& s : trace.sets) {
        parts.push_back(s.members);
    }
    trace.partition = Partition(n, std::move(parts));
    return trace;
}

inline MergeTrace agglomerative_detect(const BivariateDistribution& p, MergePolicy policy = MergePolicy::greedy,
                                       StopRule stop = StopRule::natural()) {
    return agglomerative_detect(CorrelationTable(p), policy, stop);
}

struct VerificationReport {
    std::vector<std::string> failures;
    std::size_t checks = 0;

    bool ok() const noexcept { return failures.empty(); }
};

/// Re-checks the guarantees of the merge procedure on a finished trace:
/// modularity never decreases across unforced merges; under a natural stop
/// each returned set has q(S, S) >= 0, strictly when two or more sets
/// remain; under the greedy policy the average correlation at merge never
/// increases. Stored set correlations are compared with recomputation from
/// the table.
inline VerificationReport verify_communities(const MergeTrace& trace, const CorrelationTable& table,
                                             double tolerance = 1e-12) {
    VerificationReport report;
    auto fail = [&](std::string msg) { report.failures.push_back(std::move(msg)); };

    double previous = trace.initial_modularity;
    for (std::size_t t = 0; t < trace.merges.size(); ++t) {
        const auto& m = trace.merges[t];
        if (m.forced) {
            break;
        }
        ++report.checks;
        if (m.modularity < previous - tolerance - 2.0 * kZeroCorrelationTolerance) {
            fail("modularity decreased at merge " + std::to_string(t) + ": " + detail::format_double(previous) +
                 " -> " + detail::format_double(m.modularity));
        }
        if (m.correlation < -kZeroCorrelationTolerance) {
            fail("unforced merge " + std::to_string(t) + " joined sets with negative correlation");
        }
        previous = m.modularity;
    }

    if (trace.policy == MergePolicy::greedy) {
        for (std::size_t t = 1; t < trace.merges.size(); ++t) {
            ++report.checks;
            const double before = trace.merges[t - 1].average_correlation;
            const double now = trace.merges[t].average_correlation;
            if (now > before + tolerance + kMergeTieTolerance) {
                fail("average correlation increased at merge " + std::to_string(t) + ": " +
                     detail::format_double(before) + " -> " + detail::format_double(now));
            }
        }
    }

    for (const auto& s : trace.sets) {
        ++report.checks;
        const double scratch = set_correlation(table, s.members, s.members);
        if (std::abs(scratch - s.self_correlation) > tolerance) {
            fail("set " + std::to_string(s.id) + ": maintained q(S,S) " + detail::format_double(s.self_correlation) +
                 " differs from recomputed " + detail::format_double(scratch));
        }
        if (trace.stop.is_natural()) {
            const bool several = trace.sets.size() >= 2;
            const bool good = several ? s.self_correlation > 0.0 : s.self_correlation >= -tolerance;
            if (!good) {
                fail("set " + std::to_string(s.id) + " is not a community: q(S,S) = " +
                     detail::format_double(s.self_correlation));
            }
        }
    }

    if (trace.stop.is_natural() && trace.sets.size() >= 2) {
        for (std::size_t x = 0; x < trace.sets.size(); ++x) {
            for (std::size_t y = x + 1; y < trace.sets.size(); ++y) {
                ++report.checks;
                const double c = set_correlation(table, trace.sets[x].members, trace.sets[y].members);
                if (c >= -kZeroCorrelationTolerance) {
                    fail("sets " + std::to_string(trace.sets[x].id) + " and " + std::to_string(trace.sets[y].id) +
                         " still have nonnegative correlation " + detail::format_double(c));
                }
            }
        }
    }
    return report;
}

} // namespace dircom

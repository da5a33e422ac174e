#include "dircom/markov.hpp"
#include "dircom/measures.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

namespace {

using namespace dircom;

BivariateDistribution three_cycle_walk() {
    return sample_bivariate(DirectedGraph::with_index_labels(3, {{0, 1}, {1, 2}, {2, 0}}), SimpleWalk{});
}

TEST(NodeSet, SortsAndRejectsDuplicates) {
    const NodeSet s{3, 1, 2};
    EXPECT_EQ(s.indices(), (std::vector<std::size_t>{1, 2, 3}));
    EXPECT_THROW(NodeSet({1, 1}), ValidationError);
    EXPECT_THROW(s.validate(3), ValidationError);
    EXPECT_EQ(s.complement(5), (NodeSet{0, 4}));
}

TEST(Partition, Validates) {
    EXPECT_NO_THROW(Partition(3, {NodeSet{0, 2}, NodeSet{1}}));
    EXPECT_THROW(Partition(3, {NodeSet{0, 1}, NodeSet{1, 2}}), ValidationError);
    EXPECT_THROW(Partition(3, {NodeSet{0, 1}}), ValidationError);
    EXPECT_THROW(Partition(3, {NodeSet{0, 1, 2, 3}}), ValidationError);
    const auto p = Partition::from_labels({2, 0, 2, 1});
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p[0], (NodeSet{0, 2}));
    EXPECT_EQ(p[1], (NodeSet{1}));
}

TEST(Centrality, WorkedExamples) {
    const auto p = three_cycle_walk();
    EXPECT_NEAR(centrality(p, NodeSet::all(3)), 1.0, 1e-12);
    EXPECT_EQ(centrality(p, NodeSet{}), 0.0);
    EXPECT_NEAR(centrality(p, NodeSet{0}), 1.0 / 3.0, 1e-12);
}

TEST(RelativeCentrality, WorkedExamples) {
    const auto p = three_cycle_walk();
    EXPECT_NEAR(relative_centrality(p, NodeSet::all(3), NodeSet{1, 2}), 1.0, 1e-12);
    EXPECT_NEAR(relative_centrality(p, NodeSet{1}, NodeSet{0}), 1.0, 1e-12);
    EXPECT_EQ(relative_centrality(p, NodeSet{}, NodeSet{0}), 0.0);
    EXPECT_THROW(relative_centrality(p, NodeSet{0}, NodeSet{}), ValidationError);
}

TEST(CommunityStrength, WorkedExamples) {
    const auto p = three_cycle_walk();
    EXPECT_NEAR(community_strength(p, NodeSet::all(3)), 0.0, 1e-12);
    EXPECT_NEAR(community_strength(p, NodeSet{0, 1}), -1.0 / 6.0, 1e-12);
    EXPECT_THROW(community_strength(p, NodeSet{}), ValidationError);
}

TEST(CommunityStrength, TwoLinkedTwoCyclesOracle) {
    // 0<->1 and 2<->3, weakly linked by 1<->2.
    const auto g = DirectedGraph::with_index_labels(4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}, {1, 2, 0.1}, {2, 1, 0.1}});
    const auto p = sample_bivariate(g, SimpleWalk{}, {1e-14, 0});

    // Oracle: exact pi by linear solve, p(v,w) = pi_v a_vw / k_v, then the formula.
    const std::vector<double> a = {0, 1, 0, 0, 1, 0, 0.1, 0, 0, 0.1, 0, 1, 0, 0, 1, 0};
    std::vector<double> P(16);
    for (std::size_t v = 0; v < 4; ++v) {
        double k = 0;
        for (std::size_t w = 0; w < 4; ++w) {
            k += a[v * 4 + w];
        }
        for (std::size_t w = 0; w < 4; ++w) {
            P[v * 4 + w] = a[v * 4 + w] / k;
        }
    }
    const auto pi = oracle::exact_stationary(P, 4);
    const double c = pi[0] + pi[1];
    const double inside = pi[0] * P[1] + pi[1] * P[4];
    const double expected = inside / c - c;

    EXPECT_GT(expected, 0.0);
    EXPECT_NEAR(community_strength(p, NodeSet{0, 1}), expected, 1e-12);
    EXPECT_TRUE(is_community(p, NodeSet{0, 1}).is_community);
}

TEST(IsCommunity, Examples) {
    const auto p = three_cycle_walk();
    const auto whole = is_community(p, NodeSet::all(3));
    EXPECT_TRUE(whole.is_community || std::abs(whole.strength) < 1e-15);
    EXPECT_FALSE(whole.diagnostic.has_value());

    const auto pair = is_community(p, NodeSet{0, 1});
    EXPECT_FALSE(pair.is_community);
    ASSERT_TRUE(pair.diagnostic.has_value());
    EXPECT_TRUE(pair.diagnostic->consistent());
    EXPECT_EQ(pair.diagnostic->verdicts[0], Verdict::fails);
    // Statement (v): the complement is then not a community either.
    EXPECT_LT(community_strength(p, NodeSet{2}), 0.0);
}

TEST(IsCommunity, DiagnosticAgreesOnRandomSets) {
    std::mt19937_64 rng(21);
    int tested = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const auto g = oracle::random_weakly_connected(rng, 4 + trial % 20, 0.15);
        const auto p = sample_bivariate(g, BackwardJumpWalk{});
        const auto s = oracle::random_set(rng, g.size());
        if (s.empty() || s.size() == g.size()) {
            continue;
        }
        const auto report = is_community(p, s);
        ASSERT_TRUE(report.diagnostic.has_value());
        EXPECT_TRUE(report.diagnostic->agree());
        if (std::abs(report.strength) > 1e-8) {
            EXPECT_TRUE(report.diagnostic->consistent());
            EXPECT_EQ(report.is_community, report.diagnostic->verdicts[0] == Verdict::holds);
        }
        ++tested;
    }
    EXPECT_GT(tested, 40);
}

TEST(Modularity, WorkedExamples) {
    const auto p = three_cycle_walk();
    EXPECT_NEAR(modularity(p, Partition::whole(3)), 0.0, 1e-12);
    EXPECT_NEAR(modularity(p, Partition::singletons(3)), -1.0 / 3.0, 1e-12);
    EXPECT_NEAR(modularity(p, Partition(3, {NodeSet{0, 1}, NodeSet{2}})), -2.0 / 9.0, 1e-12);
    EXPECT_THROW(modularity(p, Partition::singletons(4)), ValidationError);
}

TEST(Modularity, FormsAgreeAndMatchDefinition) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = oracle::random_weakly_connected(rng, 3 + trial % 25, 0.1, true);
        const auto p = sample_bivariate(g, PageRank{0.9});
        const auto labels = oracle::random_labels(rng, g.size(), 4);
        const auto part = Partition::from_labels(labels);
        const auto forms = modularity_forms(p, part);
        EXPECT_NEAR(forms.weighted_strength, forms.pairwise, 1e-10);
        const std::vector<double> dense(p.values().begin(), p.values().end());
        EXPECT_NEAR(modularity(p, part), oracle::modularity_by_definition(dense, g.size(), labels), 1e-12);
    }
}

TEST(Modularity, ZeroMassSetContributesNothing) {
    // Node 2 is never visited: it only points into the cycle.
    const std::vector<double> values = {0, 0.5, 0, 0.5, 0, 0, 0, 0, 0};
    const BivariateDistribution p(3, values);
    const auto forms = modularity_forms(p, Partition(3, {NodeSet{0, 1}, NodeSet{2}}));
    EXPECT_NEAR(forms.weighted_strength, forms.pairwise, 1e-15);
    EXPECT_THROW(community_strength(p, NodeSet{2}), ValidationError);
}

} // namespace

#include "dircom/edge_list.hpp"
#include "dircom/graph.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

namespace {

using dircom::DirectedGraph;
using dircom::Edge;
using dircom::load_edge_list;

TEST(EdgeList, ThreeCycle) {
    const auto g = load_edge_list("a\tb\nb\tc\nc\ta\n");
    EXPECT_EQ(g.size(), 3u);
    EXPECT_EQ(g.edges().size(), 3u);
    EXPECT_EQ(g.out_degrees(), (std::vector<double>{1, 1, 1}));
    EXPECT_EQ(g.labels(), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(EdgeList, EmptyInput) {
    const auto g = load_edge_list("");
    EXPECT_EQ(g.size(), 0u);
    EXPECT_TRUE(g.edges().empty());
}

TEST(EdgeList, DuplicatesMergeByWeightSum) {
    const auto g = load_edge_list("a\tb\t1\na\tb\t2\n");
    ASSERT_EQ(g.edges().size(), 1u);
    EXPECT_DOUBLE_EQ(g.edges()[0].weight, 3.0);
}

TEST(EdgeList, CommentsBlankLinesAndLabelOrder) {
    const auto g = load_edge_list("# header\n\nz\ty\r\n# mid\ny\tx\t0.5\n");
    EXPECT_EQ(g.labels(), (std::vector<std::string>{"z", "y", "x"}));
    EXPECT_DOUBLE_EQ(g.weight(1, 2), 0.5);
}

TEST(EdgeList, Utf8Labels) {
    const auto g = load_edge_list("n\xc3\xb6""de\t\xe7\xaf\x80\n");
    EXPECT_EQ(g.label(0), "n\xc3\xb6""de");
    EXPECT_TRUE(g.index_of("\xe7\xaf\x80").has_value());
}

TEST(EdgeList, MalformedLineReportsLineNumber) {
    try {
        load_edge_list("a\tb\nc\td\te\tf\n");
        FAIL() << "expected a parse error";
    } catch (const dircom::ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(load_edge_list("a\tb\tx\n"), dircom::ParseError);
    EXPECT_THROW(load_edge_list("a\t\n"), dircom::ParseError);
}

TEST(EdgeList, NegativeWeightIsValidationError) {
    EXPECT_THROW(load_edge_list("a\tb\t-1\n"), dircom::ValidationError);
}

TEST(EdgeList, RoundTripPreservesGraph) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = dircom::oracle::random_weakly_connected(rng, 1 + trial, 0.2, trial % 2 == 0);
        // An isolated node must survive the round trip too.
        std::vector<std::string> labels = g.labels();
        labels.push_back("lonely");
        g = DirectedGraph(labels, {g.edges().begin(), g.edges().end()});
        const auto once = load_edge_list(dircom::to_edge_list(g));
        const auto twice = load_edge_list(dircom::to_edge_list(once));
        EXPECT_EQ(once, g);
        EXPECT_EQ(twice, once);
    }
}

TEST(Graph, OutDegrees) {
    const auto cycle = DirectedGraph::with_index_labels(3, {{0, 1}, {1, 2}, {2, 0}});
    EXPECT_EQ(dircom::out_degrees(cycle), (std::vector<double>{1, 1, 1}));
    const auto star = DirectedGraph::with_index_labels(3, {{0, 1}, {0, 2}});
    EXPECT_EQ(dircom::out_degrees(star), (std::vector<double>{2, 0, 0}));
    const auto weighted = DirectedGraph::with_index_labels(2, {{0, 1, 2.5}});
    EXPECT_EQ(dircom::out_degrees(weighted), (std::vector<double>{2.5, 0}));
}

TEST(Graph, RejectsBadEdges) {
    EXPECT_THROW(DirectedGraph::with_index_labels(2, {{0, 2}}), dircom::ValidationError);
    EXPECT_THROW(DirectedGraph::with_index_labels(2, {{0, 1, -0.5}}), dircom::ValidationError);
    EXPECT_THROW(DirectedGraph({"a", "a"}, {}), dircom::ValidationError);
}

TEST(Graph, Transpose) {
    const auto g = DirectedGraph::with_index_labels(2, {{0, 1, 2.0}});
    const auto t = dircom::transpose(g);
    ASSERT_EQ(t.edges().size(), 1u);
    EXPECT_EQ(t.edges()[0], (Edge{1, 0, 2.0}));

    const auto sym = DirectedGraph::with_index_labels(3, {{0, 1}, {1, 0}, {1, 2}, {2, 1}});
    EXPECT_EQ(dircom::transpose(sym), sym);

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto r = dircom::oracle::random_weakly_connected(rng, 8, 0.3, true);
        EXPECT_EQ(dircom::transpose(dircom::transpose(r)), r);
        EXPECT_EQ(dircom::transpose(r).out_degrees(), r.in_degrees());
    }
}

TEST(Graph, WeakConnectivity) {
    EXPECT_TRUE(dircom::is_weakly_connected(DirectedGraph::with_index_labels(3, {{0, 1}, {2, 1}})));
    EXPECT_FALSE(dircom::is_weakly_connected(DirectedGraph::with_index_labels(3, {{0, 1}})));
    EXPECT_TRUE(dircom::is_weakly_connected(DirectedGraph::with_index_labels(3, {{0, 1}, {1, 2}, {2, 0}})));
    EXPECT_TRUE(dircom::is_weakly_connected(DirectedGraph()));
}

TEST(Graph, RemoveIsolated) {
    const auto g = dircom::remove_isolated(DirectedGraph({"1", "2", "3"}, {{0, 1}}));
    EXPECT_EQ(g.size(), 2u);
    EXPECT_EQ(g.labels(), (std::vector<std::string>{"1", "2"}));

    const auto cycle = DirectedGraph::with_index_labels(3, {{0, 1}, {1, 2}, {2, 0}});
    EXPECT_EQ(dircom::remove_isolated(cycle), cycle);

    EXPECT_EQ(dircom::remove_isolated(DirectedGraph::with_index_labels(3, {})).size(), 0u);
}

TEST(Graph, RemoveIsolatedKeepsDegrees) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Edge> edges;
        std::uniform_int_distribution<std::size_t> node(0, 14);
        for (int k = 0; k < 8; ++k) {
            edges.push_back({node(rng), node(rng), 1.0});
        }
        const auto g = DirectedGraph::with_index_labels(15, edges);
        const auto h = dircom::remove_isolated(g);
        for (std::size_t v = 0; v < h.size(); ++v) {
            const auto original = *g.index_of(h.label(v));
            EXPECT_EQ(h.out_degrees()[v], g.out_degrees()[original]);
            EXPECT_EQ(h.in_degrees()[v], g.in_degrees()[original]);
            EXPECT_GT(h.out_degrees()[v] + h.in_degrees()[v], 0.0);
        }
    }
}

} // namespace

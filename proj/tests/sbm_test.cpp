#include "dircom/sbm.hpp"
#include "dircom/stats.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

namespace {

using namespace dircom;

TEST(Sbm, ExtremeParametersGiveTwoCliques) {
    SbmConfig cfg;
    cfg.n = 10;
    cfg.c_in = 10.0;
    cfg.c_out = 0.0;
    cfg.mode = EdgeMode::undirected;
    const auto s = generate_sbm(cfg, 1);
    EXPECT_EQ(s.graph.size(), 10u);
    EXPECT_EQ(s.graph.edges().size(), 2u * 5u * 4u);
    for (const auto& e : s.graph.edges()) {
        EXPECT_EQ(s.truth[e.src], s.truth[e.dst]);
    }
    EXPECT_FALSE(is_weakly_connected(s.graph));
    EXPECT_EQ(weak_components(s.graph), (std::vector<std::size_t>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1}));
}

TEST(Sbm, DirectedModeSamplesOrderedPairs) {
    SbmConfig cfg;
    cfg.n = 6;
    cfg.c_in = 6.0;
    cfg.c_out = 6.0;
    const auto s = generate_sbm(cfg, 3);
    EXPECT_EQ(s.graph.edges().size(), 30u);
}

TEST(Sbm, RejectsInvalidProbabilities) {
    SbmConfig cfg;
    cfg.n = 10;
    cfg.c_in = 11.0;
    EXPECT_THROW(generate_sbm(cfg, 1), ValidationError);
    cfg.c_in = 1.0;
    cfg.c_out = -1.0;
    EXPECT_THROW(generate_sbm(cfg, 1), ValidationError);
    EXPECT_THROW(SbmConfig::from_separation(200, 3.0, 0.0), ValidationError);
    EXPECT_THROW(SbmConfig::from_separation(200, 3.0, 6.5), ValidationError);
}

TEST(Sbm, IsolatesRemovedAndTruthCompacted) {
    const auto cfg = SbmConfig::from_separation(200, 3.0, 4.0, EdgeMode::undirected);
    const auto raw = generate_sbm_raw(cfg, 99);
    const auto s = generate_sbm(cfg, 99);
    EXPECT_EQ(s.graph.size(), non_isolated_nodes(raw.graph).size());
    EXPECT_LT(s.graph.size(), 200u);
    for (std::size_t v = 0; v < s.graph.size(); ++v) {
        const auto original = *raw.graph.index_of(s.graph.label(v));
        EXPECT_EQ(s.truth[v], raw.truth[original]);
        EXPECT_GT(s.graph.out_degrees()[v] + s.graph.in_degrees()[v], 0.0);
    }
}

TEST(Sbm, MeanDegreeMatchesTarget) {
    for (auto mode : {EdgeMode::directed, EdgeMode::undirected}) {
        const auto cfg = SbmConfig::from_separation(200, 3.0, 4.0, mode);
        double total = 0.0;
        for (std::uint64_t r = 0; r < 100; ++r) {
            total += static_cast<double>(generate_sbm_raw(cfg, derive_seed(5, 0, r)).generated_edges) / 200.0;
        }
        EXPECT_NEAR(total / 100.0, 3.0, 0.15) << to_string(mode);
    }
}

TEST(Sbm, SameSeedSameGraph) {
    const auto cfg = SbmConfig::from_separation(100, 3.0, 3.0);
    EXPECT_EQ(generate_sbm(cfg, 17).graph, generate_sbm(cfg, 17).graph);
    EXPECT_FALSE(generate_sbm(cfg, 17).graph == generate_sbm(cfg, 18).graph);
}

TEST(Overlap, Examples) {
    const std::vector<std::size_t> truth{0, 0, 0, 1, 1, 1};
    EXPECT_EQ(overlap(Partition::from_labels(truth), truth), 1.0);
    EXPECT_EQ(overlap(Partition::from_labels({1, 1, 1, 0, 0, 0}), truth), 1.0);
    const std::vector<std::size_t> truth4{0, 0, 1, 1};
    EXPECT_EQ(overlap(Partition::from_labels({0, 1, 0, 1}), truth4), 0.5);
    EXPECT_THROW(overlap(Partition::from_labels({0, 1, 2, 0, 1, 2}), truth), ValidationError);
    EXPECT_THROW(overlap(Partition::from_labels({0, 1}), truth), ValidationError);
}

TEST(Overlap, ErdosRenyiCarriesNoSignal) {
    // With p_in = p_out the detected split is independent of the blocks, so
    // overlap with the truth is distributed like overlap with a shuffled
    // truth. Both means are above 0.5 because of the label-permutation max.
    SbmConfig cfg;
    cfg.n = 200;
    cfg.c_in = 3.0;
    cfg.c_out = 3.0;
    std::mt19937_64 shuffle_rng(77);
    std::vector<double> real;
    std::vector<double> null;
    for (std::uint64_t r = 0; r < 100; ++r) {
        const auto s = generate_sbm(cfg, derive_seed(11, 0, r));
        const auto p = sample_bivariate(s.graph, BackwardJumpWalk{});
        const auto trace = agglomerative_detect(p, MergePolicy::greedy, StopRule::force(2));
        real.push_back(overlap(trace.partition, s.truth));
        auto shuffled = s.truth;
        std::shuffle(shuffled.begin(), shuffled.end(), shuffle_rng);
        null.push_back(overlap(trace.partition, shuffled));
    }
    const auto diff = paired_difference(real, null);
    const double se = diff.half_width / 1.984;
    EXPECT_LT(std::abs(diff.mean), 3.0 * se);
    for (double x : real) {
        EXPECT_GE(x, 0.5);
        EXPECT_LE(x, 1.0);
    }
}

TEST(Grid, BenchmarkRange) {
    const auto grid = make_grid(2.5, 5.9, 0.1);
    ASSERT_EQ(grid.size(), 35u);
    EXPECT_EQ(grid.front(), 2.5);
    EXPECT_EQ(grid[5], 3.0);
    EXPECT_EQ(grid.back(), 5.9);
    EXPECT_THROW(make_grid(1.0, 0.0, 0.1), ValidationError);
}

TEST(Stats, MeanInterval) {
    const std::vector<double> xs{1, 2, 3, 4, 5};
    const auto ci = mean_interval(xs);
    EXPECT_DOUBLE_EQ(ci.mean, 3.0);
    // t_{0.975, 4} = 2.776445, sd = sqrt(2.5)
    EXPECT_NEAR(ci.half_width, 2.7764451051977987 * std::sqrt(2.5) / std::sqrt(5.0), 1e-12);
    EXPECT_TRUE(std::isnan(mean_interval(std::vector<double>{1.0}).half_width));
}

ExperimentConfig small_experiment() {
    ExperimentConfig cfg;
    cfg.n = 80;
    cfg.separations = {2.0, 5.0};
    cfg.replicates = 4;
    cfg.seed = 123;
    return cfg;
}

TEST(Experiment, RowsPerGridPointAndSampler) {
    const auto result = run_experiment(small_experiment());
    ASSERT_EQ(result.rows.size(), 4u);
    EXPECT_EQ(result.rows[0].method, "pagerank");
    EXPECT_EQ(result.rows[1].method, "backward");
    EXPECT_EQ(result.rows[2].separation, 5.0);
    for (const auto& row : result.rows) {
        EXPECT_EQ(row.replicates, 4u);
        EXPECT_GE(row.mean_overlap, 0.5);
        EXPECT_LE(row.mean_overlap, 1.0);
        EXPECT_LE(row.ci_low, row.mean_overlap);
        EXPECT_GE(row.ci_high, row.mean_overlap);
        EXPECT_LE(row.mean_n, 80.0);
    }
}

TEST(Experiment, DeterministicAcrossThreadCounts) {
    auto cfg = small_experiment();
    const auto a = run_experiment(cfg);
    cfg.threads = 4;
    const auto b = run_experiment(cfg);
    std::ostringstream ca;
    std::ostringstream cb;
    write_experiment_csv(ca, a);
    write_experiment_csv(cb, b);
    EXPECT_EQ(ca.str(), cb.str());
    EXPECT_EQ(a.overlaps, b.overlaps);
}

TEST(Experiment, SamplersSeeIdenticalGraphs) {
    auto cfg = small_experiment();
    cfg.samplers = {{"a", PageRank{0.9}}, {"b", PageRank{0.9}}};
    const auto result = run_experiment(cfg);
    for (const auto& per_grid : result.overlaps) {
        EXPECT_EQ(per_grid[0], per_grid[1]);
    }
}

TEST(Experiment, ConnectedRetryIsOptIn) {
    auto cfg = small_experiment();
    cfg.mode = EdgeMode::undirected;
    cfg.separations = {5.0};
    cfg.replicates = 6;
    cfg.require_connected = true;
    cfg.max_retries = 0;
    const auto strict = run_experiment(cfg);
    cfg.require_connected = false;
    const auto lenient = run_experiment(cfg);
    EXPECT_EQ(lenient.skipped, 0u);
    EXPECT_EQ(lenient.node_counts[0].size() + 0, 6u);
    EXPECT_EQ(strict.node_counts[0].size() + strict.skipped, 6u);
}

TEST(Experiment, CsvRoundTrip) {
    const auto result = run_experiment(small_experiment());
    std::stringstream csv;
    const std::vector<std::string> comments{"config: test"};
    write_experiment_csv(csv, result, comments);
    const auto rows = read_experiment_csv(csv);
    ASSERT_EQ(rows.size(), result.rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        EXPECT_EQ(rows[k].method, result.rows[k].method);
        EXPECT_EQ(rows[k].mean_overlap, result.rows[k].mean_overlap);
        EXPECT_EQ(rows[k].ci_high, result.rows[k].ci_high);
        EXPECT_EQ(rows[k].mean_n, result.rows[k].mean_n);
    }
}

TEST(Experiment, OverlapTrendsUpWithSeparation) {
    ExperimentConfig cfg;
    cfg.separations = {1.0, 2.0, 3.0, 4.0, 5.0, 5.9};
    cfg.replicates = 30;
    cfg.seed = 2024;
    cfg.threads = 4;
    const auto result = run_experiment(cfg);
    for (std::size_t s = 0; s < cfg.samplers.size(); ++s) {
        std::vector<double> mean;
        for (std::size_t g = 0; g < cfg.separations.size(); ++g) {
            mean.push_back(result.rows[g * cfg.samplers.size() + s].mean_overlap);
        }
        EXPECT_GT(oracle::spearman(cfg.separations, mean), 0.8) << cfg.samplers[s].name;
    }
}

} // namespace

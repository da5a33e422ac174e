#pragma once

#include "dircom/detect.hpp"
#include "dircom/edge_list.hpp"
#include "dircom/error.hpp"
#include "dircom/graph.hpp"
#include "dircom/markov.hpp"
#include "dircom/measures.hpp"
#include "dircom/stats.hpp"

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace dircom {

enum class EdgeMode {
    /// Every ordered pair (i, j), i != j, is drawn independently.
    directed,
    /// Every unordered pair is drawn once and added in both directions.
    undirected,
};

inline const char* to_string(EdgeMode m) { return m == EdgeMode::directed ? "directed" : "undirected"; }

/// Two equal blocks; c_in = n p_in and c_out = n p_out.
struct SbmConfig {
    std::size_t n = 200;
    double c_in = 0.0;
    double c_out = 0.0;
    EdgeMode mode = EdgeMode::directed;

    double p_in() const { return c_in / static_cast<double>(n); }
    double p_out() const { return c_out / static_cast<double>(n); }

    /// Expected degree (c_in + c_out) / 2 fixed to `average_degree`, with c_in - c_out = separation.
    static SbmConfig from_separation(std::size_t n, double average_degree, double separation,
                                     EdgeMode mode = EdgeMode::directed) {
        SbmConfig cfg;
        cfg.n = n;
        cfg.c_in = average_degree + separation / 2.0;
        cfg.c_out = average_degree - separation / 2.0;
        cfg.mode = mode;
        if (!(cfg.c_in > cfg.c_out) || cfg.c_out < 0.0) {
            throw ValidationError("SBM needs c_in > c_out >= 0; separation " + detail::format_double(separation) +
                                  " with average degree " + detail::format_double(average_degree) + " is invalid");
        }
        return cfg;
    }
};

/// Block of node i: the first ceil(n/2) nodes form block 0.
inline std::size_t sbm_block(std::size_t n, std::size_t i) { return i < (n + 1) / 2 ? 0 : 1; }

namespace detail {

inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Seed for one replicate, independent of the sampler so every method sees the same graph.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t grid_point, std::uint64_t replicate,
                                 std::uint64_t attempt = 0) {
    std::uint64_t s = detail::splitmix64(master);
    s = detail::splitmix64(s ^ grid_point);
    s = detail::splitmix64(s ^ replicate);
    return detail::splitmix64(s ^ attempt);
}

/// Graph drawn from the block model with its ground-truth blocks. Labels are
/// the original node indices, so they survive isolate removal.
struct SbmSample {
    DirectedGraph graph;
    std::vector<std::size_t> truth;
    /// Edge count before isolate removal (undirected pairs count twice).
    std::size_t generated_edges = 0;
};

/// Draws every potential edge independently, keeping all n nodes.
inline SbmSample generate_sbm_raw(const SbmConfig& cfg, std::uint64_t seed) {
    const double p_in = cfg.p_in();
    const double p_out = cfg.p_out();
    if (!(p_in >= 0.0 && p_in <= 1.0) || !(p_out >= 0.0 && p_out <= 1.0)) {
        throw ValidationError("SBM edge probabilities must lie in [0, 1] (p_in = " + detail::format_double(p_in) +
                              ", p_out = " + detail::format_double(p_out) + ")");
    }
    const std::size_t n = cfg.n;
    std::mt19937_64 rng(seed);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t first = cfg.mode == EdgeMode::directed ? 0 : i + 1;
        for (std::size_t j = first; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const double p = sbm_block(n, i) == sbm_block(n, j) ? p_in : p_out;
            if (detail::unit_uniform(rng) < p) {
                edges.push_back({i, j, 1.0});
                if (cfg.mode == EdgeMode::undirected) {
                    edges.push_back({j, i, 1.0});
                }
            }
        }
    }
    SbmSample out;
    out.generated_edges = edges.size();
    out.graph = DirectedGraph::with_index_labels(n, std::move(edges));
    out.truth.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.truth[i] = sbm_block(n, i);
    }
    return out;
}

/// Draws a block-model graph and drops isolated vertices, compacting the truth labels.
inline SbmSample generate_sbm(const SbmConfig& cfg, std::uint64_t seed) {
    auto raw = generate_sbm_raw(cfg, seed);
    const auto kept = non_isolated_nodes(raw.graph);
    SbmSample out;
    out.generated_edges = raw.generated_edges;
    out.graph = induced_subgraph(raw.graph, kept);
    out.truth.reserve(kept.size());
    for (auto v : kept) {
        out.truth.push_back(raw.truth[v]);
    }
    return out;
}

/// Fraction of nodes whose detected set matches the true block, maximized
/// over the two ways of pairing sets with blocks.
inline double overlap(const Partition& found, std::span<const std::size_t> truth) {
    if (found.size() != 2) {
        throw ValidationError("overlap needs a partition into exactly 2 sets, got " + std::to_string(found.size()));
    }
    if (found.node_count() != truth.size()) {
        throw ValidationError("partition and truth labels cover different node counts");
    }
    if (truth.empty()) {
        throw ValidationError("overlap of an empty graph");
    }
    const auto labels = found.labels();
    std::size_t agree = 0;
    for (std::size_t v = 0; v < truth.size(); ++v) {
        if (truth[v] > 1) {
            throw ValidationError("truth labels must be 0 or 1");
        }
        agree += labels[v] == truth[v] ? 1 : 0;
    }
    const auto total = static_cast<double>(truth.size());
    const auto same = static_cast<double>(agree);
    return std::max(same, total - same) / total;
}

struct NamedSampler {
    std::string name;
    Sampler sampler;
};

/// Samplers with the benchmark's default parameters.
inline std::vector<NamedSampler> default_benchmark_samplers() {
    return {{"pagerank", PageRank{0.9}}, {"backward", BackwardJumpWalk{0.05, 0.85, 0.1}}};
}

inline constexpr std::size_t kBenchmarkMaxIterations = 200000;

struct ExperimentConfig {
    std::size_t n = 200;
    double average_degree = 3.0;
    std::vector<double> separations;
    std::size_t replicates = 100;
    std::vector<NamedSampler> samplers = default_benchmark_samplers();
    EdgeMode mode = EdgeMode::directed;
    std::uint64_t seed = 1;
    /// Sparse directed SBM draws can mix slowly under the backward walk, so the
    /// benchmark caps power iteration at a fixed, larger count.
    StationaryOptions stationary{1e-10, kBenchmarkMaxIterations};
    /// Redraw replicates that are not weakly connected, up to `max_retries` times.
    bool require_connected = false;
    std::size_t max_retries = 20;
    std::size_t threads = 1;
};

struct ExperimentRow {
    double separation = 0.0;
    std::string method;
    double mean_overlap = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t replicates = 0;
    double mean_n = 0.0;
};

struct ExperimentResult {
    /// Grid-major, then sampler order.
    std::vector<ExperimentRow> rows;
    /// overlaps[g][s] holds the per-replicate overlaps of sampler s at grid point g,
    /// aligned across samplers (paired).
    std::vector<std::vector<std::vector<double>>> overlaps;
    /// Node counts after isolate removal, per grid point and kept replicate.
    std::vector<std::vector<double>> node_counts;
    /// Replicates dropped because no connected graph was drawn within the retry cap.
    std::size_t skipped = 0;
};

/// Grid `start:stop:step`, inclusive of `stop` up to rounding.
inline std::vector<double> make_grid(double start, double stop, double step) {
    if (!(step > 0.0) || stop < start) {
        throw ValidationError("grid needs step > 0 and stop >= start");
    }
    std::vector<double> grid;
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
        grid.push_back(std::round((start + static_cast<double>(i) * step) * 1e9) / 1e9);
    }
    return grid;
}

/// Runs every sampler on the same replicate graphs, cutting each detection
/// down to two sets with the greedy policy, and aggregates the overlaps.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.samplers.empty() || cfg.separations.empty() || cfg.replicates == 0) {
        throw ValidationError("experiment needs at least one sampler, grid point and replicate");
    }
    std::vector<SbmConfig> models;
    for (double sep : cfg.separations) {
        models.push_back(SbmConfig::from_separation(cfg.n, cfg.average_degree, sep, cfg.mode));
    }

    struct Outcome {
        bool kept = false;
        double nodes = 0.0;
        std::vector<double> overlaps;
    };
    const std::size_t jobs = models.size() * cfg.replicates;
    std::vector<Outcome> outcomes(jobs);

    auto run_job = [&](std::size_t job) {
        const std::size_t g = job / cfg.replicates;
        const std::size_t r = job % cfg.replicates;
        SbmSample sample;
        bool found = false;
        const std::size_t attempts = cfg.require_connected ? cfg.max_retries + 1 : 1;
        for (std::size_t a = 0; a < attempts && !found; ++a) {
            sample = generate_sbm(models[g], derive_seed(cfg.seed, g, r, a));
            found = !cfg.require_connected || is_weakly_connected(sample.graph);
        }
        Outcome& out = outcomes[job];
        if (!found || sample.graph.size() < 2) {
            return;
        }
        out.kept = true;
        out.nodes = static_cast<double>(sample.graph.size());
        for (const auto& s : cfg.samplers) {
            const auto p = sample_bivariate(sample.graph, s.sampler, cfg.stationary);
            const auto trace = agglomerative_detect(p, MergePolicy::greedy, StopRule::force(2));
            out.overlaps.push_back(overlap(trace.partition, sample.truth));
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.threads, jobs));
    if (workers == 1) {
        for (std::size_t job = 0; job < jobs; ++job) {
            run_job(job);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t job = next++; job < jobs; job = next++) {
                    try {
                        run_job(job);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) {
                            error = std::current_exception();
                        }
                    }
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
        if (error) {
            std::rethrow_exception(error);
        }
    }

    ExperimentResult result;
    result.overlaps.assign(models.size(), std::vector<std::vector<double>>(cfg.samplers.size()));
    result.node_counts.assign(models.size(), {});
    for (std::size_t job = 0; job < jobs; ++job) {
        const std::size_t g = job / cfg.replicates;
        const auto& out = outcomes[job];
        if (!out.kept) {
            ++result.skipped;
            continue;
        }
        result.node_counts[g].push_back(out.nodes);
        for (std::size_t s = 0; s < cfg.samplers.size(); ++s) {
            result.overlaps[g][s].push_back(out.overlaps[s]);
        }
    }
    for (std::size_t g = 0; g < models.size(); ++g) {
        double mean_n = 0.0;
        for (double x : result.node_counts[g]) {
            mean_n += x;
        }
        if (!result.node_counts[g].empty()) {
            mean_n /= static_cast<double>(result.node_counts[g].size());
        }
        for (std::size_t s = 0; s < cfg.samplers.size(); ++s) {
            const auto ci = mean_interval(result.overlaps[g][s]);
            result.rows.push_back({cfg.separations[g], cfg.samplers[s].name, ci.mean, ci.low(), ci.high(), ci.count,
                                   mean_n});
        }
    }
    return result;
}

inline constexpr const char* kExperimentCsvHeader = "separation,method,mean_overlap,ci_low,ci_high,replicates,mean_n";

/// CSV with one row per (separation, method); `#` comment lines come first.
inline void write_experiment_csv(std::ostream& out, const ExperimentResult& result,
                                 std::span<const std::string> comments = {}) {
    for (const auto& c : comments) {
        out << "# " << c << '\n';
    }
    out << kExperimentCsvHeader << '\n';
    for (const auto& row : result.rows) {
        out << detail::format_double(row.separation) << ',' << row.method << ',' << detail::format_double(row.mean_overlap)
            << ',' << detail::format_double(row.ci_low) << ',' << detail::format_double(row.ci_high) << ','
            << row.replicates << ',' << detail::format_double(row.mean_n) << '\n';
    }
}

inline std::vector<ExperimentRow> read_experiment_csv(std::istream& in) {
    std::vector<ExperimentRow> rows;
    std::string raw;
    std::size_t line_no = 0;
    bool header = false;
    auto number = [&](std::string_view field) {
        if (field == "nan" || field == "-nan") {
            return std::numeric_limits<double>::quiet_NaN();
        }
        const auto v = detail::parse_double(field);
        if (!v) {
            throw ParseError(line_no, "invalid number '" + std::string(field) + "'");
        }
        return *v;
    };
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = detail::strip_eol(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (!header) {
            if (line != kExperimentCsvHeader) {
                throw ParseError(line_no, "unexpected CSV header");
            }
            header = true;
            continue;
        }
        std::vector<std::string_view> f;
        std::size_t start = 0;
        while (true) {
            const auto pos = line.find(',', start);
            f.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
            if (pos == std::string_view::npos) {
                break;
            }
            start = pos + 1;
        }
        if (f.size() != 7) {
            throw ParseError(line_no, "expected 7 columns");
        }
        ExperimentRow row;
        row.separation = number(f[0]);
        row.method = std::string(f[1]);
        row.mean_overlap = number(f[2]);
        row.ci_low = number(f[3]);
        row.ci_high = number(f[4]);
        row.replicates = static_cast<std::size_t>(number(f[5]));
        row.mean_n = number(f[6]);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace dircom

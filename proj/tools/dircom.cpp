// dircom command-line front end.

#include "dircom/dircom.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::ordered_json;
using namespace dircom;

struct RunConfig {
    std::string subcommand;
    std::string input;
    std::string bivariate;
    std::string sampler = "backward";
    double lambda = 0.9;
    double l0 = 0.05;
    double l1 = 0.85;
    double l2 = 0.1;
    double tol = 1e-10;
    std::size_t max_iter = 0;
    std::string policy = "greedy";
    std::string stop = "natural";
    std::uint64_t seed = 1;
    std::string output;
    std::string dendrogram;
    std::string set;
    std::string given;
    std::string partition;

    // sbm-bench
    std::size_t n = 200;
    double avg_degree = 3.0;
    std::string grid = "2.5:5.9:0.1";
    std::size_t replicates = 100;
    std::size_t threads = 1;
    std::string mode = "directed";
    bool require_connected = false;
    std::size_t max_retries = 20;
    std::size_t bench_max_iter = kBenchmarkMaxIterations;
};

/// Loaded input: node labels plus the bivariate distribution.
struct SampledInput {
    std::vector<std::string> labels;
    BivariateDistribution p;
    std::optional<StationaryDistribution> stationary;
};

Sampler make_sampler(const RunConfig& cfg) {
    if (cfg.sampler == "simple") {
        return SimpleWalk{};
    }
    if (cfg.sampler == "pagerank") {
        return PageRank{cfg.lambda};
    }
    if (cfg.sampler == "backward") {
        return BackwardJumpWalk{cfg.l0, cfg.l1, cfg.l2};
    }
    throw ValidationError("unknown sampler '" + cfg.sampler + "'");
}

json sampler_json(const RunConfig& cfg) {
    json s;
    s["kind"] = cfg.sampler;
    if (cfg.sampler == "pagerank") {
        s["lambda"] = cfg.lambda;
    } else if (cfg.sampler == "backward") {
        s["l0"] = cfg.l0;
        s["l1"] = cfg.l1;
        s["l2"] = cfg.l2;
    }
    return s;
}

StationaryOptions stationary_options(const RunConfig& cfg) { return {cfg.tol, cfg.max_iter}; }

MergePolicy parse_policy(const std::string& text) {
    if (text == "greedy") {
        return MergePolicy::greedy;
    }
    if (text == "first-nonnegative") {
        return MergePolicy::first_nonnegative;
    }
    throw ValidationError("unknown policy '" + text + "'");
}

StopRule parse_stop(const std::string& text) {
    if (text == "natural") {
        return StopRule::natural();
    }
    if (text.rfind("k=", 0) == 0) {
        const auto k = detail::parse_double(std::string_view(text).substr(2));
        if (!k || *k < 1.0 || *k != static_cast<double>(static_cast<std::size_t>(*k))) {
            throw ValidationError("stop rule k must be a positive integer, got '" + text + "'");
        }
        return StopRule::force(static_cast<std::size_t>(*k));
    }
    throw ValidationError("stop rule must be 'natural' or 'k=K', got '" + text + "'");
}

EdgeMode parse_mode(const std::string& text) {
    if (text == "directed") {
        return EdgeMode::directed;
    }
    if (text == "undirected") {
        return EdgeMode::undirected;
    }
    throw ValidationError("unknown edge mode '" + text + "'");
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<std::string_view> parts;
    const char sep = text.find(':') != std::string::npos ? ':' : ',';
    std::string_view rest(text);
    while (true) {
        const auto pos = rest.find(sep);
        parts.push_back(rest.substr(0, pos));
        if (pos == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(pos + 1);
    }
    std::vector<double> values;
    for (auto p : parts) {
        const auto v = detail::parse_double(p);
        if (!v) {
            throw ValidationError("bad grid value '" + std::string(p) + "'");
        }
        values.push_back(*v);
    }
    if (sep == ':') {
        if (values.size() != 3) {
            throw ValidationError("grid must be start:stop:step");
        }
        return make_grid(values[0], values[1], values[2]);
    }
    return values;
}

json base_config(const RunConfig& cfg) {
    json c;
    c["subcommand"] = cfg.subcommand;
    c["version"] = std::string(kVersion);
    if (!cfg.bivariate.empty()) {
        c["bivariate"] = cfg.bivariate;
    } else {
        c["input"] = cfg.input;
        c["sampler"] = sampler_json(cfg);
        c["tol"] = cfg.tol;
        c["max_iter"] = cfg.max_iter;
    }
    c["seed"] = cfg.seed;
    return c;
}

SampledInput load_input(const RunConfig& cfg) {
    if (!cfg.bivariate.empty()) {
        std::ifstream in(cfg.bivariate, std::ios::binary);
        if (!in) {
            throw ValidationError("cannot open bivariate file '" + cfg.bivariate + "'");
        }
        auto p = read_bivariate(in);
        std::vector<std::string> labels;
        for (std::size_t v = 0; v < p.size(); ++v) {
            labels.push_back(std::to_string(v));
        }
        spdlog::info("loaded bivariate distribution on {} nodes", p.size());
        return {std::move(labels), std::move(p), std::nullopt};
    }
    if (cfg.input.empty()) {
        throw ValidationError("one of --input or --bivariate is required");
    }
    std::ifstream in(cfg.input, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open edge list '" + cfg.input + "'");
    }
    const auto g = load_edge_list(in);
    spdlog::info("loaded graph with {} nodes and {} edges", g.size(), g.edges().size());
    require_dense_size(g.size(), "sampled graph");
    const auto P = transition_matrix(g, make_sampler(cfg));
    auto pi = stationary_distribution(P, stationary_options(cfg));
    spdlog::info("stationary distribution: {} iterations, residual {}", pi.iterations, pi.residual);
    auto p = bivariate_from_chain(P, pi, 10.0 * cfg.tol);
    return {g.labels(), std::move(p), std::move(pi)};
}

std::size_t resolve_node(const json& item, const std::vector<std::string>& labels) {
    if (item.is_number_integer() || item.is_number_unsigned()) {
        const auto v = item.get<long long>();
        if (v < 0 || static_cast<std::size_t>(v) >= labels.size()) {
            throw ValidationError("node index " + std::to_string(v) + " is out of range");
        }
        return static_cast<std::size_t>(v);
    }
    if (item.is_string()) {
        const auto label = item.get<std::string>();
        for (std::size_t v = 0; v < labels.size(); ++v) {
            if (labels[v] == label) {
                return v;
            }
        }
        throw ValidationError("unknown node label '" + label + "'");
    }
    throw ValidationError("node references must be integers or strings");
}

json parse_json_arg(const std::string& text, const char* flag) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string(flag) + " is not valid JSON: " + e.what());
    }
}

NodeSet parse_set(const std::string& text, const char* flag, const std::vector<std::string>& labels) {
    const auto j = parse_json_arg(text, flag);
    if (!j.is_array()) {
        throw ValidationError(std::string(flag) + " must be a JSON array");
    }
    std::vector<std::size_t> nodes;
    for (const auto& item : j) {
        nodes.push_back(resolve_node(item, labels));
    }
    return NodeSet(std::move(nodes));
}

Partition parse_partition(const std::string& text, const std::vector<std::string>& labels) {
    const auto j = parse_json_arg(text, "--partition");
    if (!j.is_array()) {
        throw ValidationError("--partition must be a JSON array of arrays");
    }
    std::vector<NodeSet> sets;
    for (const auto& s : j) {
        if (!s.is_array()) {
            throw ValidationError("--partition must be a JSON array of arrays");
        }
        std::vector<std::size_t> nodes;
        for (const auto& item : s) {
            nodes.push_back(resolve_node(item, labels));
        }
        sets.emplace_back(std::move(nodes));
    }
    return Partition(labels.size(), std::move(sets));
}

json labels_of(const NodeSet& s, const std::vector<std::string>& labels) {
    json out = json::array();
    for (auto v : s) {
        out.push_back(labels[v]);
    }
    return out;
}

void add_stationary(json& out, const SampledInput& in) {
    if (in.stationary) {
        out["stationary"] = {{"iterations", in.stationary->iterations}, {"residual", in.stationary->residual}};
    }
}

/// Writes `text` to the --output path, or stdout when none is given.
void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.output.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot open output file '" + cfg.output + "'");
    }
    out << text;
}

void emit_json(const RunConfig& cfg, const json& j) { emit(cfg, j.dump(2) + "\n"); }

void run_centrality(const RunConfig& cfg) {
    const auto in = load_input(cfg);
    json out;
    out["config"] = base_config(cfg);
    if (!cfg.set.empty()) {
        out["config"]["set"] = cfg.set;
    }
    add_stationary(out, in);
    if (cfg.set.empty()) {
        json nodes = json::array();
        for (std::size_t v = 0; v < in.labels.size(); ++v) {
            nodes.push_back({{"node", in.labels[v]}, {"centrality", in.p.marginal_v()[v]}});
        }
        out["nodes"] = std::move(nodes);
    } else {
        const auto s = parse_set(cfg.set, "--set", in.labels);
        out["set"] = labels_of(s, in.labels);
        out["centrality"] = centrality(in.p, s);
    }
    emit_json(cfg, out);
}

void run_relcen(const RunConfig& cfg) {
    const auto in = load_input(cfg);
    const auto target = parse_set(cfg.set, "--set", in.labels);
    const auto given = parse_set(cfg.given, "--given", in.labels);
    json out;
    out["config"] = base_config(cfg);
    out["config"]["set"] = cfg.set;
    out["config"]["given"] = cfg.given;
    add_stationary(out, in);
    out["set"] = labels_of(target, in.labels);
    out["given"] = labels_of(given, in.labels);
    out["relative_centrality"] = relative_centrality(in.p, target, given);
    emit_json(cfg, out);
}

void run_strength(const RunConfig& cfg) {
    const auto in = load_input(cfg);
    const auto s = parse_set(cfg.set, "--set", in.labels);
    const auto report = is_community(in.p, s);
    json out;
    out["config"] = base_config(cfg);
    out["config"]["set"] = cfg.set;
    add_stationary(out, in);
    out["set"] = labels_of(s, in.labels);
    out["centrality"] = centrality(in.p, s);
    out["strength"] = report.strength;
    out["is_community"] = report.is_community;
    if (report.diagnostic) {
        json statements = json::array();
        for (std::size_t k = 0; k < 6; ++k) {
            statements.push_back(
                {{"margin", report.diagnostic->margins[k]}, {"verdict", to_string(report.diagnostic->verdicts[k])}});
        }
        out["diagnostic"] = {{"statements", std::move(statements)},
                             {"consistent", report.diagnostic->consistent()},
                             {"agree", report.diagnostic->agree()}};
    }
    emit_json(cfg, out);
}

void run_modularity(const RunConfig& cfg) {
    const auto in = load_input(cfg);
    if (cfg.partition.empty()) {
        throw ValidationError("--partition is required");
    }
    const auto part = parse_partition(cfg.partition, in.labels);
    const auto forms = modularity_forms(in.p, part);
    json out;
    out["config"] = base_config(cfg);
    out["config"]["partition"] = cfg.partition;
    add_stationary(out, in);
    out["modularity"] = modularity(in.p, part);
    out["forms"] = {{"weighted_strength", forms.weighted_strength}, {"pairwise", forms.pairwise}};
    json sets = json::array();
    for (const auto& s : part.sets()) {
        json entry;
        entry["members"] = labels_of(s, in.labels);
        entry["centrality"] = centrality(in.p, s);
        if (centrality(in.p, s) > 0.0) {
            entry["strength"] = community_strength(in.p, s);
        }
        sets.push_back(std::move(entry));
    }
    out["sets"] = std::move(sets);
    emit_json(cfg, out);
}

void run_detect(const RunConfig& cfg) {
    const auto policy = parse_policy(cfg.policy);
    const auto stop = parse_stop(cfg.stop);
    const auto in = load_input(cfg);
    const CorrelationTable table(in.p);
    const auto trace = agglomerative_detect(table, policy, stop);
    spdlog::info("detect: {} merges, {} sets, modularity {}", trace.merges.size(), trace.sets.size(),
                 trace.modularity());

    json out;
    out["config"] = base_config(cfg);
    out["config"]["policy"] = cfg.policy;
    out["config"]["stop"] = cfg.stop;
    add_stationary(out, in);
    out["modularity"] = trace.modularity();
    out["initial_modularity"] = trace.initial_modularity;
    out["forced_merges"] = trace.forced_merges();
    json communities = json::array();
    for (const auto& s : trace.sets) {
        json entry;
        entry["id"] = s.id;
        entry["members"] = labels_of(s.members, in.labels);
        entry["centrality"] = s.centrality;
        entry["self_correlation"] = s.self_correlation;
        entry["strength"] = s.strength ? json(*s.strength) : json(nullptr);
        communities.push_back(std::move(entry));
    }
    out["communities"] = std::move(communities);
    json merges = json::array();
    for (const auto& m : trace.merges) {
        merges.push_back({{"set_a", m.set_a},
                          {"set_b", m.set_b},
                          {"merged", m.merged},
                          {"average_correlation", m.average_correlation},
                          {"correlation", m.correlation},
                          {"modularity", m.modularity},
                          {"forced", m.forced}});
    }
    out["merges"] = std::move(merges);
    emit_json(cfg, out);

    if (!cfg.dendrogram.empty()) {
        std::ofstream csv(cfg.dendrogram, std::ios::binary);
        if (!csv) {
            throw ValidationError("cannot open dendrogram file '" + cfg.dendrogram + "'");
        }
        csv << "# config: " << out["config"].dump() << '\n';
        csv << "step,set_a,set_b,merged,average_correlation,correlation,modularity,forced\n";
        for (std::size_t t = 0; t < trace.merges.size(); ++t) {
            const auto& m = trace.merges[t];
            csv << t + 1 << ',' << m.set_a << ',' << m.set_b << ',' << m.merged << ','
                << detail::format_double(m.average_correlation) << ',' << detail::format_double(m.correlation) << ','
                << detail::format_double(m.modularity) << ',' << (m.forced ? 1 : 0) << '\n';
        }
    }
}

void run_sample(const RunConfig& cfg) {
    if (!cfg.bivariate.empty()) {
        throw ValidationError("sample needs --input, not --bivariate");
    }
    const auto in = load_input(cfg);
    std::vector<std::string> comments;
    comments.push_back("config: " + base_config(cfg).dump());
    comments.push_back("labels: " + json(in.labels).dump());
    comments.push_back("stationary: " + json({{"iterations", in.stationary->iterations},
                                               {"residual", in.stationary->residual}})
                                            .dump());
    std::ostringstream text;
    write_bivariate(text, in.p, comments);
    emit(cfg, text.str());
}

void run_sbm_bench(const RunConfig& cfg) {
    ExperimentConfig exp;
    exp.n = cfg.n;
    exp.average_degree = cfg.avg_degree;
    exp.separations = parse_grid(cfg.grid);
    exp.replicates = cfg.replicates;
    exp.samplers = {{"pagerank", PageRank{cfg.lambda}}, {"backward", BackwardJumpWalk{cfg.l0, cfg.l1, cfg.l2}}};
    exp.mode = parse_mode(cfg.mode);
    exp.seed = cfg.seed;
    exp.stationary = {cfg.tol, cfg.bench_max_iter};
    exp.require_connected = cfg.require_connected;
    exp.max_retries = cfg.max_retries;
    exp.threads = cfg.threads;
    if (exp.replicates == 0) {
        throw ValidationError("--replicates must be positive");
    }

    json config;
    config["subcommand"] = cfg.subcommand;
    config["version"] = std::string(kVersion);
    config["n"] = cfg.n;
    config["avg_degree"] = cfg.avg_degree;
    config["grid"] = cfg.grid;
    config["replicates"] = cfg.replicates;
    config["mode"] = cfg.mode;
    config["seed"] = cfg.seed;
    config["lambda"] = cfg.lambda;
    config["l0"] = cfg.l0;
    config["l1"] = cfg.l1;
    config["l2"] = cfg.l2;
    config["tol"] = cfg.tol;
    config["max_iter"] = cfg.bench_max_iter;
    config["policy"] = "greedy";
    config["stop"] = "k=2";
    config["require_connected"] = cfg.require_connected;
    config["max_retries"] = cfg.max_retries;

    spdlog::info("sbm-bench: {} grid points x {} replicates on {} threads", exp.separations.size(), exp.replicates,
                 exp.threads);
    const auto result = run_experiment(exp);
    std::vector<std::string> comments{"config: " + config.dump()};
    if (result.skipped > 0) {
        comments.push_back("skipped_disconnected: " + std::to_string(result.skipped));
    }
    std::ostringstream csv;
    write_experiment_csv(csv, result, comments);
    emit(cfg, csv.str());
}

void add_input_options(CLI::App* sub, RunConfig& cfg) {
    auto* input = sub->add_option("--input,-i", cfg.input, "Edge list (tab separated: src, dst, optional weight)");
    auto* biv = sub->add_option("--bivariate", cfg.bivariate, "Precomputed bivariate distribution file");
    input->excludes(biv);
    sub->add_option("--sampler", cfg.sampler, "Sampler: simple, pagerank or backward")
        ->check(CLI::IsMember({"simple", "pagerank", "backward"}))
        ->capture_default_str();
    sub->add_option("--lambda", cfg.lambda, "PageRank damping")->capture_default_str();
    sub->add_option("--l0", cfg.l0, "Backward walk self-loop weight")->capture_default_str();
    sub->add_option("--l1", cfg.l1, "Backward walk forward weight")->capture_default_str();
    sub->add_option("--l2", cfg.l2, "Backward walk backward weight")->capture_default_str();
    sub->add_option("--tol", cfg.tol, "Power iteration tolerance (L1)")->capture_default_str();
    sub->add_option("--max-iter", cfg.max_iter, "Power iteration cap (0 = 100n + 1000)")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Seed recorded in the output")->capture_default_str();
    sub->add_option("--output,-o", cfg.output, "Output path (default stdout)");
}

} // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_logger_mt("dircom");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    spdlog::cfg::load_env_levels();

    RunConfig cfg;
    CLI::App app{"Structural analysis of directed networks via sampled graphs"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    auto* detect = app.add_subcommand("detect", "Agglomerative community detection");
    add_input_options(detect, cfg);
    detect->add_option("--policy", cfg.policy, "Merge policy: greedy or first-nonnegative")
        ->check(CLI::IsMember({"greedy", "first-nonnegative"}))
        ->capture_default_str();
    detect->add_option("--stop", cfg.stop, "Stop rule: natural or k=K")->capture_default_str();
    detect->add_option("--dendrogram", cfg.dendrogram, "Write the merge sequence as CSV");

    auto* cen = app.add_subcommand("centrality", "Centrality of a set, or of every node");
    add_input_options(cen, cfg);
    cen->add_option("--set", cfg.set, "JSON list of nodes");

    auto* relcen = app.add_subcommand("relcen", "Relative centrality RC(set | given)");
    add_input_options(relcen, cfg);
    relcen->add_option("--set", cfg.set, "JSON list of nodes")->required();
    relcen->add_option("--given", cfg.given, "JSON list of nodes")->required();

    auto* strength = app.add_subcommand("strength", "Community strength with the equivalence diagnostic");
    add_input_options(strength, cfg);
    strength->add_option("--set", cfg.set, "JSON list of nodes")->required();

    auto* mod = app.add_subcommand("modularity", "Modularity of a partition");
    add_input_options(mod, cfg);
    mod->add_option("--partition", cfg.partition, "JSON list of node lists")->required();

    auto* sample = app.add_subcommand("sample", "Write the sampled bivariate distribution");
    add_input_options(sample, cfg);

    auto* bench = app.add_subcommand("sbm-bench", "Two-block SBM benchmark: PageRank vs backward walk");
    bench->add_option("--n", cfg.n, "Nodes per graph")->capture_default_str();
    bench->add_option("--avg-degree", cfg.avg_degree, "c_in + c_out = 2 * avg degree")->capture_default_str();
    bench->add_option("--grid", cfg.grid, "Separations c_in - c_out as start:stop:step or a,b,c")
        ->capture_default_str();
    bench->add_option("--replicates", cfg.replicates, "Graphs per grid point")->capture_default_str();
    bench->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    bench->add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();
    bench->add_option("--mode", cfg.mode, "Edge mode: directed or undirected")
        ->check(CLI::IsMember({"directed", "undirected"}))
        ->capture_default_str();
    bench->add_flag("--require-connected", cfg.require_connected, "Resample until weakly connected");
    bench->add_option("--max-retries", cfg.max_retries, "Resampling attempts per replicate")->capture_default_str();
    bench->add_option("--lambda", cfg.lambda, "PageRank damping")->capture_default_str();
    bench->add_option("--l0", cfg.l0, "Backward walk self-loop weight")->capture_default_str();
    bench->add_option("--l1", cfg.l1, "Backward walk forward weight")->capture_default_str();
    bench->add_option("--l2", cfg.l2, "Backward walk backward weight")->capture_default_str();
    bench->add_option("--tol", cfg.tol, "Power iteration tolerance (L1)")->capture_default_str();
    bench->add_option("--max-iter", cfg.bench_max_iter, "Power iteration cap (0 = 100n + 1000)")->capture_default_str();
    bench->add_option("--output,-o", cfg.output, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        for (auto* sub : app.get_subcommands()) {
            cfg.subcommand = sub->get_name();
        }
        if (cfg.subcommand == "detect") {
            run_detect(cfg);
        } else if (cfg.subcommand == "centrality") {
            run_centrality(cfg);
        } else if (cfg.subcommand == "relcen") {
            run_relcen(cfg);
        } else if (cfg.subcommand == "strength") {
            run_strength(cfg);
        } else if (cfg.subcommand == "modularity") {
            run_modularity(cfg);
        } else if (cfg.subcommand == "sample") {
            run_sample(cfg);
        } else {
            run_sbm_bench(cfg);
        }
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

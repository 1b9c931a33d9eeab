// rdf2vec: walk -> train -> eval/nearest pipeline over N-Triples graphs.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rdf2vec/pipeline.hpp"

namespace {

// Fills options that were not given on the command line from `key=value` lines.
void apply_config(CLI::App& cmd, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw CLI::FileError::Missing(path);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw CLI::ConversionError("config line without '=': " + line);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t"), e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        CLI::Option* opt = cmd.get_option_no_throw("--" + key);
        if (!opt || key == "config") throw CLI::ExtrasError("unknown config key '" + key + "'", CLI::ExitCodes::ExtrasError);
        if (opt->count() > 0) continue;
        opt->add_result(value);
        opt->run_callback();
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace rdf2vec;

    CLI::App app{"RDF2vec embeddings with classic or order-aware skip-gram training"};
    app.require_subcommand(1);
    std::string config_path;

    WalkOptions walk;
    auto* walk_cmd = app.add_subcommand("walk", "Generate random walks from every entity of an N-Triples graph");
    walk_cmd->add_option("--config", config_path, "key=value file; command-line flags take precedence");
    walk_cmd->add_option("--graph", walk.graph_path, "N-Triples input (.nt or .nt.gz)")->required();
    walk_cmd->add_option("-o,--out", walk.out_path, "Walk file to write")->required();
    walk_cmd->add_option("--walks", walk.walk.walks_per_node, "Walks per entity")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    walk_cmd->add_option("--depth", walk.walk.depth, "Node hops per walk")->capture_default_str()->check(CLI::PositiveNumber);
    walk_cmd->add_option("--seed", walk.walk.seed, "Random seed")->capture_default_str();
    walk_cmd->add_option("--threads", walk.walk.threads, "Worker threads (output is identical for any value)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    TrainOptions train;
    std::string mode = "classic";
    bool fixed_window = false;
    auto* train_cmd = app.add_subcommand("train", "Train skip-gram embeddings from a walk file");
    train_cmd->add_option("--config", config_path, "key=value file; command-line flags take precedence");
    train_cmd->add_option("--walks-file", train.walks_path, "Walk file produced by `walk`")->required();
    train_cmd->add_option("-o,--out", train.model_path, "Embedding file to write")->required();
    train_cmd->add_option("--mode", mode, "classic: one output matrix; ordered: one per window offset")
        ->capture_default_str()
        ->check(CLI::IsMember({"classic", "ordered"}));
    train_cmd->add_option("--dim", train.train.dimension, "Embedding dimension")->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--window", train.train.window, "Context window")->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--epochs", train.train.epochs, "Passes over the walks")->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--negatives", train.train.negatives, "Negative samples per context")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", train.train.initial_lr, "Initial learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", train.train.seed, "Random seed")->capture_default_str();
    train_cmd->add_option("--threads", train.train.threads, "Worker threads (deterministic only with 1)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    train_cmd->add_flag("--fixed-window", fixed_window, "Disable dynamic window shrinking in classic mode");
    train_cmd->add_option("--sample", train.train.sample, "Frequent-token subsampling threshold (0 = off)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--min-count", train.min_count, "Drop tokens rarer than this")->capture_default_str();
    train_cmd->add_option("--table-size", train.table_size, "Negative sampling table slots")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--vocab-out", train.vocab_path, "Optional `token<TAB>count` dump");

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate embeddings on an analogy or labeled dataset");
    eval_cmd->add_option("--config", config_path, "key=value file; command-line flags take precedence");
    eval_cmd->add_option("--model", eval.model_path, "Embedding file")->required();
    eval_cmd->add_option("--task", eval.task, "analogy | cluster | classify | regress")->required();
    eval_cmd->add_option("--dataset", eval.dataset_path, "Dataset file")->required();
    eval_cmd->add_option("--k", eval.k, "Neighbours (kNN, default 3) or clusters (default: number of labels)");
    eval_cmd->add_option("--seed", eval.seed, "k-means seed")->capture_default_str();
    eval_cmd->add_option("--restarts", eval.restarts, "k-means runs; the lowest objective is kept")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    NearestOptions near;
    auto* near_cmd = app.add_subcommand("nearest", "List the cosine-nearest tokens");
    near_cmd->add_option("--model", near.model_path, "Embedding file")->required();
    near_cmd->add_option("token", near.token, "Query token")->required();
    near_cmd->add_option("--k", near.k, "Number of neighbours")->capture_default_str();

    try {
        app.parse(argc, argv);
        for (auto* cmd : app.get_subcommands()) apply_config(*cmd, config_path);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (*walk_cmd) return cmd_walk(walk);
    if (*train_cmd) {
        train.train.mode = parse_mode(mode);
        train.train.dynamic_window = !fixed_window;
        return cmd_train(train);
    }
    if (*eval_cmd) return cmd_eval(eval);
    if (*near_cmd) return cmd_nearest(near);
    return 1;
}

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include "embedding_store.hpp"
#include "evaluator.hpp"
#include "graph.hpp"
#include "trainer.hpp"
#include "vocabulary.hpp"
#include "walker.hpp"

namespace rdf2vec {

/// Writes through `fn` into a sibling temp file and renames it over `path` on success.
/// On failure the temp file is removed and `path` is left untouched.
inline void write_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
    auto tmp = path;
    tmp += ".tmp";
    try {
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
            fn(out);
            out.flush();
            if (!out) throw std::runtime_error("write error on " + tmp.string());
        }
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

inline std::optional<std::string> missing_input(const std::string& path) {
    if (path.empty()) return "no input path given";
    if (!std::filesystem::exists(path)) return "no such file: " + path;
    return std::nullopt;
}

struct WalkOptions {
    std::string graph_path;
    std::string out_path;
    WalkConfig walk;
};

struct TrainOptions {
    std::string walks_path;
    std::string model_path;
    std::string vocab_path;  // optional vocabulary dump
    TrainConfig train;
    std::uint64_t min_count = 1;
    double power = 0.75;
    std::size_t table_size = 10'000'000;
};

struct EvalOptions {
    std::string model_path;
    std::string task;  // analogy | cluster | classify | regress
    std::string dataset_path;
    std::size_t k = 0;  // 0: task default (3 for kNN, #labels for clustering)
    std::uint64_t seed = 1;
    std::size_t restarts = 10;  // k-means runs; the lowest objective wins
};

struct NearestOptions {
    std::string model_path;
    std::string token;
    std::size_t k = 10;
};

inline int cmd_walk(const WalkOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        opt.walk.validate();
        if (auto m = missing_input(opt.graph_path)) throw std::runtime_error(*m);
        err << "walks=" << opt.walk.walks_per_node << " depth=" << opt.walk.depth << " seed=" << opt.walk.seed
            << " threads=" << opt.walk.threads << '\n';
        KnowledgeGraph g = load_graph(opt.graph_path);
        Corpus corpus = generate_walks(g, opt.walk);
        std::size_t lines = 0;
        write_atomically(opt.out_path, [&](std::ostream& o) { lines = write_walks(corpus, g, o); });
        out << "entities\t" << g.entity_count() << '\n' << "walks\t" << lines << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "walk: " << e.what() << '\n';
        return 1;
    }
}

inline int cmd_train(const TrainOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        opt.train.validate();
        if (auto m = missing_input(opt.walks_path)) throw std::runtime_error(*m);
        err << "mode=" << to_string(opt.train.mode) << " dim=" << opt.train.dimension << " window=" << opt.train.window
            << " epochs=" << opt.train.epochs << " negatives=" << opt.train.negatives << " seed=" << opt.train.seed
            << " threads=" << opt.train.threads << '\n';

        std::ifstream walks(opt.walks_path, std::ios::binary);
        if (!walks) throw std::runtime_error("cannot open " + opt.walks_path);
        Vocabulary vocab = build_vocabulary(walks, opt.min_count);
        NegativeTable table(vocab, opt.power, std::max(opt.table_size, vocab.size()));
        out << "vocabulary\t" << vocab.size() << '\n' << "tokens\t" << vocab.total_tokens() << '\n';
        if (!opt.vocab_path.empty()) write_atomically(opt.vocab_path, [&](std::ostream& o) { vocab.write(o); });

        auto result = train<float>(walks, vocab, table, opt.train, &err);
        for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) out << "loss_epoch_" << (e + 1) << '\t' << result.epoch_loss[e] << '\n';
        write_atomically(opt.model_path, [&](std::ostream& o) { export_text(result.model, vocab, o); });
        return 0;
    } catch (const std::exception& e) {
        err << "train: " << e.what() << '\n';
        return 1;
    }
}

inline EmbeddingTable load_embeddings(const std::string& path) {
    if (auto m = missing_input(path)) throw std::runtime_error(*m);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return import_text(in);
}

/// Unit-length copies of the dataset entities' vectors, with their labels. OOV records are dropped.
inline std::pair<std::vector<Point>, std::vector<std::string>> labeled_points(const EmbeddingTable& table,
                                                                               const LabeledDataset& ds, std::size_t& oov) {
    std::vector<Point> points;
    std::vector<std::string> labels;
    oov = 0;
    for (const auto& r : ds.records) {
        auto id = table.find(r.entity);
        if (!id) {
            ++oov;
            continue;
        }
        auto row = table.row(*id);
        Point p(row.begin(), row.end());
        double n = 0;
        for (double x : p) n += x * x;
        n = std::sqrt(n);
        if (n > 0)
            for (double& x : p) x /= n;
        points.push_back(std::move(p));
        labels.push_back(r.label);
    }
    return {std::move(points), std::move(labels)};
}

inline int cmd_eval(const EvalOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        if (opt.task != "analogy" && opt.task != "cluster" && opt.task != "classify" && opt.task != "regress")
            throw std::invalid_argument("unknown task '" + opt.task + "' (expected analogy, cluster, classify or regress)");
        if (auto m = missing_input(opt.dataset_path)) throw std::runtime_error(*m);
        EmbeddingTable table = load_embeddings(opt.model_path);
        std::ifstream in(opt.dataset_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open " + opt.dataset_path);

        if (opt.task == "analogy") {
            auto set = read_analogies(in);
            auto r = evaluate_analogies(table, set);
            out << "accuracy\t" << r.accuracy << '\n' << "oov\t" << r.oov << '\n';
        } else if (opt.task == "cluster") {
            auto ds = read_labeled(in);
            std::size_t oov = 0;
            auto [points, labels] = labeled_points(table, ds, oov);
            if (points.empty()) throw std::invalid_argument("no in-vocabulary records");
            std::size_t k = opt.k ? opt.k : std::set<std::string>(labels.begin(), labels.end()).size();
            auto km = kmeans_restarts(points, k, opt.seed, opt.restarts);
            out << "acc\t" << clustering_accuracy(km.assignments, labels) << '\n' << "oov\t" << oov << '\n';
        } else {
            auto ds = read_labeled(in);
            auto task = opt.task == "classify" ? KnnTask::classify : KnnTask::regress;
            auto r = knn_evaluate(table, ds, opt.k ? opt.k : 3, task);
            out << (task == KnnTask::classify ? "accuracy\t" : "rmse\t") << r.metric << '\n' << "oov\t" << r.oov << '\n';
        }
        return 0;
    } catch (const std::exception& e) {
        err << "eval: " << e.what() << '\n';
        return 1;
    }
}

inline int cmd_nearest(const NearestOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        EmbeddingTable table = load_embeddings(opt.model_path);
        if (!table.find(opt.token)) {
            err << "nearest: unknown token '" << opt.token << "'; did you mean:";
            for (const auto& s : close_spellings(table, opt.token)) err << ' ' << s;
            err << '\n';
            return 1;
        }
        for (const auto& n : nearest(table, opt.token, opt.k)) out << n.token << '\t' << n.similarity << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "nearest: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace rdf2vec

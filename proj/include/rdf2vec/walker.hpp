#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "graph.hpp"
#include "random.hpp"

namespace rdf2vec {

struct WalkConfig {
    std::size_t walks_per_node = 500;
    std::size_t depth = 4;  // node hops
    std::uint64_t seed = 1;
    std::size_t threads = 1;

    void validate() const {
        if (walks_per_node < 1) throw std::invalid_argument("walks_per_node must be >= 1");
        if (depth < 1) throw std::invalid_argument("depth must be >= 1");
        if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    }
};

/// Alternating entity / predicate ids: even positions index entities, odd positions predicates.
struct Walk {
    std::vector<std::uint32_t> tokens;

    std::size_t hops() const noexcept { return tokens.size() / 2; }
    EntityId entity_at(std::size_t hop) const { return tokens.at(2 * hop); }
    PredicateId predicate_at(std::size_t hop) const { return tokens.at(2 * hop + 1); }

    friend bool operator==(const Walk&, const Walk&) = default;
};

using Corpus = std::vector<Walk>;

class EmptyGraphError : public std::invalid_argument {
public:
    EmptyGraphError() : std::invalid_argument("graph has no entities") {}
};

/// One uniform random walk from `start`. The stream depends only on (seed, start, index).
inline Walk random_walk(const KnowledgeGraph& graph, EntityId start, std::size_t index, const WalkConfig& config) {
    Rng rng(derive_seed(config.seed, start, index));
    Walk w;
    w.tokens.reserve(2 * config.depth + 1);
    w.tokens.push_back(start);
    EntityId at = start;
    for (std::size_t hop = 0; hop < config.depth; ++hop) {
        const auto& edges = graph.out_edges(at);
        if (edges.empty()) break;
        const Edge& e = edges[rng.below(edges.size())];
        w.tokens.push_back(e.predicate);
        w.tokens.push_back(e.object);
        at = e.object;
    }
    return w;
}

/// walks_per_node walks from every entity with out-degree >= 1, in entity-id order.
/// The output is identical for any thread count.
inline Corpus generate_walks(const KnowledgeGraph& graph, const WalkConfig& config) {
    config.validate();
    const std::size_t n = graph.entity_count();
    if (n == 0) throw EmptyGraphError();

    auto walk_range = [&](std::size_t begin, std::size_t end, Corpus& out) {
        for (std::size_t e = begin; e < end; ++e) {
            auto id = static_cast<EntityId>(e);
            if (graph.out_edges(id).empty()) continue;
            for (std::size_t i = 0; i < config.walks_per_node; ++i) out.push_back(random_walk(graph, id, i, config));
        }
    };

    const std::size_t workers = std::min(config.threads, n);
    if (workers <= 1) {
        Corpus corpus;
        walk_range(0, n, corpus);
        return corpus;
    }

    std::vector<Corpus> buffers(workers);
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t begin = std::min(n, w * chunk);
        std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, w, begin, end] { walk_range(begin, end, buffers[w]); });
    }
    for (auto& t : pool) t.join();

    Corpus corpus;
    std::size_t total = 0;
    for (const auto& b : buffers) total += b.size();
    corpus.reserve(total);
    for (auto& b : buffers) std::move(b.begin(), b.end(), std::back_inserter(corpus));
    return corpus;
}

/// Serializes walks as space-separated labels, one walk per line. Returns the number of lines.
inline std::size_t write_walks(const Corpus& corpus, const KnowledgeGraph& graph, std::ostream& out) {
    std::string line;
    for (const Walk& w : corpus) {
        line.clear();
        for (std::size_t i = 0; i < w.tokens.size(); ++i) {
            if (i) line.push_back(' ');
            try {
                line += (i % 2 == 0) ? graph.entity(w.tokens[i]) : graph.predicate(w.tokens[i]);
            } catch (const InvalidId& e) {
                throw std::logic_error(std::string("walk references unresolvable token: ") + e.what());
            }
        }
        line.push_back('\n');
        out.write(line.data(), static_cast<std::streamsize>(line.size()));
    }
    if (!out) throw std::runtime_error("write error while writing walks");
    return corpus.size();
}

}  // namespace rdf2vec

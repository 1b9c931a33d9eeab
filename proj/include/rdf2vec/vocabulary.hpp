#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "random.hpp"

namespace rdf2vec {

using TokenId = std::uint32_t;

class EmptyCorpusError : public std::invalid_argument {
public:
    EmptyCorpusError() : std::invalid_argument("corpus contains no tokens") {}
};

/// Splits a walk line on single spaces (tabs and CR tolerated), calling fn(token) per token.
template <typename Fn>
void for_each_token(std::string_view line, Fn&& fn) {
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) fn(line.substr(i, j - i));
        i = j;
    }
}

/// Dense token ids in descending count order, ties broken by token string.
class Vocabulary {
public:
    Vocabulary() = default;

    /// Builds from raw (token, count) pairs; entries below min_count are dropped.
    static Vocabulary from_counts(const std::unordered_map<std::string, std::uint64_t>& counts, std::uint64_t min_count) {
        std::vector<std::pair<std::string, std::uint64_t>> kept;
        for (const auto& [tok, c] : counts)
            if (c >= min_count && c > 0) kept.emplace_back(tok, c);
        std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
            return a.second != b.second ? a.second > b.second : a.first < b.first;
        });
        Vocabulary v;
        v.tokens_.reserve(kept.size());
        v.counts_.reserve(kept.size());
        for (auto& [tok, c] : kept) {
            v.index_.emplace(tok, static_cast<TokenId>(v.tokens_.size()));
            v.tokens_.push_back(std::move(tok));
            v.counts_.push_back(c);
            v.total_ += c;
        }
        return v;
    }

    std::size_t size() const noexcept { return tokens_.size(); }
    bool empty() const noexcept { return tokens_.empty(); }
    std::uint64_t total_tokens() const noexcept { return total_; }

    const std::string& token(TokenId id) const { return tokens_.at(id); }
    std::uint64_t count(TokenId id) const { return counts_.at(id); }
    const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

    std::optional<TokenId> find(std::string_view tok) const {
        auto it = index_.find(std::string(tok));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// `token<TAB>count` lines in id order.
    void write(std::ostream& out) const {
        for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << counts_[i] << '\n';
    }

private:
    std::vector<std::string> tokens_;
    std::vector<std::uint64_t> counts_;
    std::unordered_map<std::string, TokenId> index_;
    std::uint64_t total_ = 0;
};

inline Vocabulary build_vocabulary(std::istream& walks, std::uint64_t min_count = 1) {
    std::unordered_map<std::string, std::uint64_t> counts;
    std::string line;
    std::uint64_t seen = 0;
    while (std::getline(walks, line)) {
        for_each_token(line, [&](std::string_view tok) {
            ++counts[std::string(tok)];
            ++seen;
        });
    }
    if (walks.bad()) throw std::runtime_error("read error while counting tokens");
    if (seen == 0) throw EmptyCorpusError();
    return Vocabulary::from_counts(counts, min_count);
}

/// Unigram^power lookup table for negative sampling.
class NegativeTable {
public:
    NegativeTable() = default;

    NegativeTable(const Vocabulary& vocab, double power = 0.75, std::size_t table_size = 10'000'000) {
        if (vocab.empty()) throw std::invalid_argument("negative table needs a non-empty vocabulary");
        if (!(power > 0)) throw std::invalid_argument("negative table power must be > 0");
        if (table_size < vocab.size())
            throw std::invalid_argument("table size " + std::to_string(table_size) + " is smaller than vocabulary size " +
                                        std::to_string(vocab.size()));

        std::vector<double> weights(vocab.size());
        double norm = 0;
        for (std::size_t i = 0; i < vocab.size(); ++i) {
            weights[i] = std::pow(static_cast<double>(vocab.count(static_cast<TokenId>(i))), power);
            norm += weights[i];
        }

        // Slot boundaries at rounded cumulative mass, so every token gets within one slot of its share.
        table_.resize(table_size);
        double cumulative = 0;
        std::size_t begin = 0;
        for (std::size_t i = 0; i < vocab.size(); ++i) {
            cumulative += weights[i];
            std::size_t end = i + 1 == vocab.size()
                                  ? table_size
                                  : std::min(table_size, static_cast<std::size_t>(std::llround(cumulative / norm * table_size)));
            for (std::size_t s = begin; s < end; ++s) table_[s] = static_cast<TokenId>(i);
            begin = std::max(begin, end);
        }
    }

    std::size_t size() const noexcept { return table_.size(); }
    TokenId operator[](std::size_t slot) const { return table_[slot]; }
    const std::vector<TokenId>& slots() const noexcept { return table_; }

    TokenId sample(Rng& rng) const { return table_[rng.below(table_.size())]; }

private:
    std::vector<TokenId> table_;
};

}  // namespace rdf2vec

#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trainer.hpp"
#include "vocabulary.hpp"

namespace rdf2vec {

class FormatError : public std::runtime_error {
public:
    FormatError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ExportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Token-keyed table of dense vectors, as read back from an embedding file.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    explicit EmbeddingTable(std::size_t dimension) : dim_(dimension) {}

    /// Returns false if the token is already present.
    bool add(std::string token, std::span<const float> vec) {
        if (vec.size() != dim_) throw std::invalid_argument("vector dimension mismatch for " + token);
        auto [it, inserted] = index_.emplace(token, tokens_.size());
        if (!inserted) return false;
        tokens_.push_back(std::move(token));
        data_.insert(data_.end(), vec.begin(), vec.end());
        return true;
    }

    std::size_t size() const noexcept { return tokens_.size(); }
    std::size_t dimension() const noexcept { return dim_; }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    const std::string& token(std::size_t i) const { return tokens_.at(i); }
    std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

    std::optional<std::size_t> find(std::string_view token) const {
        auto it = index_.find(std::string(token));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::span<const float> at(std::string_view token) const {
        auto i = find(token);
        if (!i) throw std::out_of_range("unknown token " + std::string(token));
        return row(*i);
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::string> tokens_;
    std::vector<float> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

inline void append_fixed(std::string& out, double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, 6);
    out.append(buf, r.ptr);
}

inline void check_token(const std::string& tok) {
    if (tok.empty()) throw ExportError("empty token cannot be exported");
    for (char c : tok)
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f')
            throw ExportError("token contains whitespace: '" + tok + "'");
}

}  // namespace detail

/// Writes `V D` then one `token x1 ... xD` line per vocabulary id. Only the input matrix is written.
template <typename Real>
std::size_t export_text(const EmbeddingModel<Real>& model, const Vocabulary& vocab, std::ostream& out) {
    if (model.vocab_size() != vocab.size())
        throw ExportError("model has " + std::to_string(model.vocab_size()) + " rows but vocabulary has " +
                          std::to_string(vocab.size()) + " tokens");
    for (std::size_t i = 0; i < vocab.size(); ++i) detail::check_token(vocab.token(static_cast<TokenId>(i)));

    std::string line = std::to_string(vocab.size()) + ' ' + std::to_string(model.dimension()) + '\n';
    out << line;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        line = vocab.token(static_cast<TokenId>(i));
        for (Real x : model.input.row(i)) {
            line.push_back(' ');
            detail::append_fixed(line, static_cast<double>(x));
        }
        line.push_back('\n');
        out << line;
    }
    if (!out) throw std::runtime_error("write error while exporting embeddings");
    return vocab.size();
}

inline EmbeddingTable import_text(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw FormatError(1, "missing header");

    auto fields = [](std::string_view s) {
        std::vector<std::string_view> f;
        for_each_token(s, [&](std::string_view t) { f.push_back(t); });
        return f;
    };
    auto to_size = [&](std::string_view s, std::size_t at) {
        std::size_t v = 0;
        auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw FormatError(at, "non-numeric header field '" + std::string(s) + "'");
        return v;
    };

    auto header = fields(line);
    if (header.size() != 2) throw FormatError(1, "header must be `V D`");
    const std::size_t count = to_size(header[0], 1), dim = to_size(header[1], 1);
    if (dim == 0) throw FormatError(1, "dimension must be positive");

    EmbeddingTable table(dim);
    std::vector<float> vec(dim);
    while (std::getline(in, line)) {
        ++lineno;
        auto f = fields(line);
        if (f.empty()) continue;
        if (table.size() == count) throw FormatError(lineno, "more records than the header declares");
        if (f.size() != dim + 1)
            throw FormatError(lineno, "expected " + std::to_string(dim) + " values, found " + std::to_string(f.size() - 1));
        for (std::size_t k = 0; k < dim; ++k) {
            auto s = f[k + 1];
            auto r = std::from_chars(s.data(), s.data() + s.size(), vec[k]);
            if (r.ec != std::errc() || r.ptr != s.data() + s.size())
                throw FormatError(lineno, "non-numeric value '" + std::string(s) + "'");
        }
        if (!table.add(std::string(f[0]), vec)) throw FormatError(lineno, "duplicate token '" + std::string(f[0]) + "'");
    }
    if (in.bad()) throw std::runtime_error("read error while importing embeddings");
    if (table.size() != count)
        throw FormatError(lineno, "header declares " + std::to_string(count) + " records, found " + std::to_string(table.size()));
    return table;
}

/// In-memory table view of a trained model's input vectors.
template <typename Real>
EmbeddingTable to_table(const EmbeddingModel<Real>& model, const Vocabulary& vocab) {
    EmbeddingTable t(model.dimension());
    std::vector<float> vec(model.dimension());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        auto row = model.input.row(i);
        for (std::size_t k = 0; k < vec.size(); ++k) vec[k] = static_cast<float>(row[k]);
        t.add(vocab.token(static_cast<TokenId>(i)), vec);
    }
    return t;
}

}  // namespace rdf2vec

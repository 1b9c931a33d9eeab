#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <zlib.h>

namespace rdf2vec {

using EntityId = std::uint32_t;
using PredicateId = std::uint32_t;

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    /// 1-based line number of the offending statement.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class InvalidId : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Bidirectional string <-> dense id table. Ids are assigned in order of first appearance.
class Interner {
public:
    std::uint32_t intern(std::string_view s) {
        auto it = index_.find(std::string(s));
        if (it != index_.end()) return it->second;
        auto id = static_cast<std::uint32_t>(strings_.size());
        strings_.emplace_back(s);
        index_.emplace(strings_.back(), id);
        return id;
    }

    std::optional<std::uint32_t> find(std::string_view s) const {
        auto it = index_.find(std::string(s));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& resolve(std::uint32_t id) const {
        if (id >= strings_.size()) throw InvalidId("unknown id " + std::to_string(id));
        return strings_[id];
    }

    std::size_t size() const noexcept { return strings_.size(); }

private:
    std::vector<std::string> strings_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

struct Edge {
    PredicateId predicate;
    EntityId object;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// An object term is either a resource (IRI or blank node label) or a literal.
struct Triple {
    std::string subject;
    std::string predicate;
    std::string object;
    bool object_is_literal = false;
};

/// Interned directed labeled multigraph. Immutable once parsed.
class KnowledgeGraph {
public:
    std::size_t entity_count() const noexcept { return entities_.size(); }
    std::size_t predicate_count() const noexcept { return predicates_.size(); }
    std::size_t triple_count() const noexcept { return triple_count_; }
    std::size_t literal_triple_count() const noexcept { return literal_count_; }

    std::size_t edge_count() const noexcept {
        std::size_t n = 0;
        for (const auto& a : adjacency_) n += a.size();
        return n;
    }

    const std::string& entity(EntityId id) const { return entities_.resolve(id); }
    const std::string& predicate(PredicateId id) const { return predicates_.resolve(id); }

    std::optional<EntityId> find_entity(std::string_view iri) const { return entities_.find(iri); }
    std::optional<PredicateId> find_predicate(std::string_view iri) const { return predicates_.find(iri); }

    const std::vector<Edge>& out_edges(EntityId id) const {
        if (id >= adjacency_.size()) throw InvalidId("unknown entity id " + std::to_string(id));
        return adjacency_[id];
    }

    /// Adds one statement. Literal objects are counted but not linked.
    void add(const Triple& t) {
        ++triple_count_;
        EntityId s = entity_id(t.subject);
        PredicateId p = predicates_.intern(t.predicate);
        if (t.object_is_literal) {
            ++literal_count_;
            return;
        }
        EntityId o = entity_id(t.object);
        edge_order_.push_back({s, static_cast<std::uint32_t>(adjacency_[s].size())});
        adjacency_[s].push_back({p, o});
    }

    /// Writes the walkable edges back as N-Triples in input order, so re-parsing a
    /// literal-free graph reproduces the same ids.
    void write_ntriples(std::ostream& out) const {
        for (const auto& [s, i] : edge_order_) {
            const Edge& e = adjacency_[s][i];
            out << term(entities_.resolve(s)) << ' ' << '<' << predicates_.resolve(e.predicate) << "> "
                << term(entities_.resolve(e.object)) << " .\n";
        }
    }

private:
    static std::string term(const std::string& label) {
        if (label.starts_with("_:")) return label;
        return "<" + label + ">";
    }

    EntityId entity_id(std::string_view label) {
        EntityId id = entities_.intern(label);
        if (id >= adjacency_.size()) adjacency_.resize(id + 1);
        return id;
    }

    Interner entities_;
    Interner predicates_;
    std::vector<std::vector<Edge>> adjacency_;
    std::vector<std::pair<EntityId, std::uint32_t>> edge_order_;
    std::size_t triple_count_ = 0;
    std::size_t literal_count_ = 0;
};

namespace detail {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

inline void skip_space(std::string_view& s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
}

// Reads `<iri>` or `_:label`; returns the IRI without brackets or the blank label as written.
inline std::string read_resource(std::string_view& s, std::size_t line, const char* role) {
    skip_space(s);
    if (s.starts_with('<')) {
        auto close = s.find('>');
        if (close == std::string_view::npos) throw ParseError(line, std::string("unbalanced '<' in ") + role);
        auto iri = s.substr(1, close - 1);
        if (iri.find('<') != std::string_view::npos)
            throw ParseError(line, std::string("unbalanced '<' in ") + role);
        s.remove_prefix(close + 1);
        return std::string(iri);
    }
    if (s.starts_with("_:")) {
        std::size_t end = 2;
        while (end < s.size() && !is_space(s[end])) ++end;
        if (end == 2) throw ParseError(line, std::string("empty blank node label in ") + role);
        std::string label(s.substr(0, end));
        s.remove_prefix(end);
        return label;
    }
    throw ParseError(line, std::string("expected IRI or blank node as ") + role);
}

// Consumes a quoted literal with optional @lang or ^^<datatype>; returns the lexical form.
inline std::string read_literal(std::string_view& s, std::size_t line) {
    std::string value;
    std::size_t i = 1;
    bool closed = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c == '\\' && i + 1 < s.size()) {
            value.push_back(s[++i]);
            continue;
        }
        if (c == '"') {
            closed = true;
            ++i;
            break;
        }
        value.push_back(c);
    }
    if (!closed) throw ParseError(line, "unterminated literal");
    s.remove_prefix(i);
    if (s.starts_with('@')) {
        std::size_t end = 1;
        while (end < s.size() && !is_space(s[end]) && s[end] != '.') ++end;
        s.remove_prefix(end);
    } else if (s.starts_with("^^")) {
        s.remove_prefix(2);
        read_resource(s, line, "datatype");
    }
    return value;
}

}  // namespace detail

/// Parses one N-Triples statement. Returns nullopt for blank and comment lines.
inline std::optional<Triple> parse_ntriples_line(std::string_view s, std::size_t line) {
    detail::skip_space(s);
    if (s.empty() || s.front() == '#') return std::nullopt;

    Triple t;
    t.subject = detail::read_resource(s, line, "subject");
    detail::skip_space(s);
    if (!s.starts_with('<')) throw ParseError(line, "predicate must be an IRI");
    t.predicate = detail::read_resource(s, line, "predicate");
    detail::skip_space(s);
    if (s.starts_with('"')) {
        t.object = detail::read_literal(s, line);
        t.object_is_literal = true;
    } else {
        t.object = detail::read_resource(s, line, "object");
    }
    detail::skip_space(s);
    if (!s.starts_with('.')) throw ParseError(line, "missing terminal '.'");
    s.remove_prefix(1);
    detail::skip_space(s);
    if (!s.empty() && s.front() != '#') throw ParseError(line, "trailing content after '.'");
    return t;
}

inline KnowledgeGraph parse_ntriples(std::istream& in) {
    KnowledgeGraph g;
    std::string buf;
    std::size_t line = 0;
    while (std::getline(in, buf)) {
        ++line;
        if (auto t = parse_ntriples_line(buf, line)) g.add(*t);
    }
    if (in.bad()) throw std::runtime_error("read error after line " + std::to_string(line));
    return g;
}

inline KnowledgeGraph parse_ntriples(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_ntriples(in);
}

/// Reads a whole file, transparently inflating it when the name ends in `.gz`.
inline std::string read_file(const std::string& path) {
    if (path.ends_with(".gz")) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (!f) throw std::runtime_error("cannot open " + path);
        std::string out;
        char chunk[1 << 16];
        int n;
        while ((n = gzread(f, chunk, sizeof chunk)) > 0) out.append(chunk, static_cast<std::size_t>(n));
        int err = 0;
        const char* msg = gzerror(f, &err);
        std::string message = msg ? msg : "";
        gzclose(f);
        if (n < 0 || (err != Z_OK && err != Z_STREAM_END)) throw std::runtime_error("gzip error in " + path + ": " + message);
        return out;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline KnowledgeGraph load_graph(const std::string& path) { return parse_ntriples(std::string_view(read_file(path))); }

}  // namespace rdf2vec

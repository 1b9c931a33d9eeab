#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "embedding_store.hpp"
#include "random.hpp"

namespace rdf2vec {

class UndefinedSimilarity : public std::domain_error {
public:
    UndefinedSimilarity() : std::domain_error("cosine similarity is undefined for a zero vector") {}
};

class UnknownToken : public std::out_of_range {
public:
    explicit UnknownToken(const std::string& token) : std::out_of_range("unknown token '" + token + "'"), token_(token) {}
    const std::string& token() const noexcept { return token_; }

private:
    std::string token_;
};

template <typename A, typename B>
double cosine(std::span<const A> u, std::span<const B> v) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine of vectors with different dimensions");
    double uv = 0, uu = 0, vv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = static_cast<double>(u[i]), b = static_cast<double>(v[i]);
        uv += a * b;
        uu += a * a;
        vv += b * b;
    }
    if (uu == 0 || vv == 0) throw UndefinedSimilarity();
    return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
    return cosine(std::span<const double>(u), std::span<const double>(v));
}

// --- datasets --------------------------------------------------------------

struct LabeledRecord {
    std::string entity;
    std::string label;
};

/// Entity -> class label (or numeric target, kept as text until a regression needs it).
struct LabeledDataset {
    std::vector<LabeledRecord> records;

    void add(std::string entity, std::string label) {
        for (const auto& r : records)
            if (r.entity == entity) throw std::invalid_argument("duplicate entity '" + entity + "' in dataset");
        records.push_back({std::move(entity), std::move(label)});
    }

    std::size_t size() const noexcept { return records.size(); }
};

using AnalogyQuad = std::array<std::string, 4>;

/// "a is to b as c is to d".
struct AnalogySet {
    std::vector<AnalogyQuad> quads;
};

inline LabeledDataset read_labeled(std::istream& in) {
    LabeledDataset ds;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
            throw FormatError(lineno, "expected `entity<TAB>label`");
        std::string entity = line.substr(0, tab), label = line.substr(tab + 1);
        if (!seen.insert(entity).second) throw FormatError(lineno, "duplicate entity '" + entity + "'");
        ds.records.push_back({std::move(entity), std::move(label)});
    }
    return ds;
}

inline AnalogySet read_analogies(std::istream& in) {
    AnalogySet set;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::vector<std::string> f;
        for_each_token(line, [&](std::string_view t) { f.emplace_back(t); });
        if (f.empty() || f.front().starts_with('#')) continue;
        if (f.size() != 4) throw FormatError(lineno, "expected 4 tokens `a b c d`");
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                if (f[i] == f[j]) throw FormatError(lineno, "analogy tokens must be distinct");
        set.quads.push_back({f[0], f[1], f[2], f[3]});
    }
    return set;
}

// --- similarity queries ----------------------------------------------------

namespace detail {

inline double norm(std::span<const float> v) {
    double s = 0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

inline double dot(std::span<const float> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

}  // namespace detail

/// Row of maximum cosine to `query`, skipping excluded rows and zero rows.
/// Ties go to the lexicographically smallest token. Returns nullopt if nothing qualifies.
inline std::optional<std::size_t> best_match(const EmbeddingTable& table, std::span<const double> query,
                                             const std::vector<std::size_t>& exclude) {
    double qn = 0;
    for (double x : query) qn += x * x;
    if (qn == 0) throw UndefinedSimilarity();
    qn = std::sqrt(qn);

    std::optional<std::size_t> best;
    double best_sim = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (std::find(exclude.begin(), exclude.end(), i) != exclude.end()) continue;
        auto row = table.row(i);
        double rn = detail::norm(row);
        if (rn == 0) continue;
        double sim = detail::dot(row, query) / (rn * qn);
        if (!best || sim > best_sim || (sim == best_sim && table.token(i) < table.token(*best))) {
            best = i;
            best_sim = sim;
        }
    }
    return best;
}

/// 3CosAdd: argmax_t cos(t, b - a + c) over t not in {a, b, c}.
inline std::string solve_analogy(const EmbeddingTable& table, std::string_view a, std::string_view b, std::string_view c) {
    std::array<std::size_t, 3> ids{};
    std::array<std::string_view, 3> names{a, b, c};
    for (int i = 0; i < 3; ++i) {
        auto id = table.find(names[i]);
        if (!id) throw UnknownToken(std::string(names[i]));
        ids[i] = *id;
    }
    std::vector<double> target(table.dimension());
    auto va = table.row(ids[0]), vb = table.row(ids[1]), vc = table.row(ids[2]);
    for (std::size_t k = 0; k < target.size(); ++k)
        target[k] = static_cast<double>(vb[k]) - static_cast<double>(va[k]) + static_cast<double>(vc[k]);
    auto best = best_match(table, target, {ids[0], ids[1], ids[2]});
    if (!best) throw std::invalid_argument("no candidate token outside the query");
    return table.token(*best);
}

struct AnalogyResult {
    double accuracy = 0;
    std::size_t correct = 0;
    std::size_t total = 0;
    std::size_t oov = 0;  // quadruples with any token missing; counted as wrong
};

inline AnalogyResult evaluate_analogies(const EmbeddingTable& table, const AnalogySet& set) {
    if (set.quads.empty()) throw std::invalid_argument("analogy set is empty");
    AnalogyResult r;
    r.total = set.quads.size();
    for (const auto& q : set.quads) {
        if (!table.find(q[0]) || !table.find(q[1]) || !table.find(q[2]) || !table.find(q[3])) {
            ++r.oov;
            continue;
        }
        if (solve_analogy(table, q[0], q[1], q[2]) == q[3]) ++r.correct;
    }
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
    return r;
}

struct Neighbor {
    std::string token;
    double similarity;
};

/// Up to k cosine-nearest tokens to `token`, excluding itself; descending, ties lexicographic.
inline std::vector<Neighbor> nearest(const EmbeddingTable& table, std::string_view token, std::size_t k) {
    auto id = table.find(token);
    if (!id) throw UnknownToken(std::string(token));
    auto q = table.row(*id);
    std::vector<Neighbor> all;
    all.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (i == *id) continue;
        all.push_back({table.token(i), cosine(q, table.row(i))});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& x, const Neighbor& y) {
        return x.similarity != y.similarity ? x.similarity > y.similarity : x.token < y.token;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

/// Tokens closest to `token` by edit distance.
inline std::vector<std::string> close_spellings(const EmbeddingTable& table, std::string_view token, std::size_t n = 5) {
    std::vector<std::pair<std::size_t, std::string>> scored;
    for (const auto& t : table.tokens()) scored.emplace_back(edit_distance(token, t), t);
    std::sort(scored.begin(), scored.end());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < scored.size() && i < n; ++i) out.push_back(scored[i].second);
    return out;
}

// --- clustering ------------------------------------------------------------

using Point = std::vector<double>;

struct KMeansResult {
    std::vector<std::size_t> assignments;
    std::vector<Point> centroids;
    std::vector<double> objective;  // within-cluster sum of squares after each assignment step
    std::size_t iterations = 0;
};

namespace detail {

inline double squared_distance(const Point& a, const Point& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding. Stops after max_iterations or when no point moves.
inline KMeansResult kmeans(const std::vector<Point>& points, std::size_t k, std::uint64_t seed, std::size_t max_iterations = 100) {
    if (k == 0) throw std::invalid_argument("k must be positive");
    if (k > points.size())
        throw std::invalid_argument("k = " + std::to_string(k) + " exceeds number of points " + std::to_string(points.size()));
    const std::size_t n = points.size();
    for (const auto& p : points)
        if (p.size() != points.front().size()) throw std::invalid_argument("points have different dimensions");

    Rng rng(derive_seed(seed, 0x6b6d));
    KMeansResult r;
    r.centroids.push_back(points[rng.below(n)]);
    std::vector<double> d2(n);
    while (r.centroids.size() < k) {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : r.centroids) best = std::min(best, detail::squared_distance(points[i], c));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = n - 1;
        if (total > 0) {
            double x = rng.uniform() * total;
            for (std::size_t i = 0; i < n; ++i) {
                if (x < d2[i]) {
                    pick = i;
                    break;
                }
                x -= d2[i];
            }
        } else {
            pick = rng.below(n);
        }
        r.centroids.push_back(points[pick]);
    }

    r.assignments.assign(n, k);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        bool moved = false;
        double wcss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                double d = detail::squared_distance(points[i], r.centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (r.assignments[i] != best) moved = true;
            r.assignments[i] = best;
            wcss += best_d;
        }
        r.objective.push_back(wcss);
        r.iterations = iter + 1;
        if (!moved) break;

        // Empty clusters keep their previous centroid.
        std::vector<Point> sums(k, Point(points.front().size(), 0.0));
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto& s = sums[r.assignments[i]];
            for (std::size_t j = 0; j < s.size(); ++j) s[j] += points[i][j];
            ++sizes[r.assignments[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] == 0) continue;
            for (std::size_t j = 0; j < sums[c].size(); ++j) r.centroids[c][j] = sums[c][j] / static_cast<double>(sizes[c]);
        }
    }
    return r;
}

/// Runs kmeans `restarts` times and keeps the run with the lowest final objective
/// (earliest on ties). The first run uses `seed` itself, so restarts = 1 equals kmeans().
inline KMeansResult kmeans_restarts(const std::vector<Point>& points, std::size_t k, std::uint64_t seed, std::size_t restarts,
                                    std::size_t max_iterations = 100) {
    if (restarts == 0) throw std::invalid_argument("restarts must be positive");
    KMeansResult best = kmeans(points, k, seed, max_iterations);
    for (std::size_t r = 1; r < restarts; ++r) {
        auto run = kmeans(points, k, derive_seed(seed, r), max_iterations);
        if (run.objective.back() < best.objective.back()) best = std::move(run);
    }
    return best;
}

/// Maximum-weight perfect matching on a square weight matrix (Hungarian method).
/// Returns the column assigned to each row.
inline std::vector<std::size_t> max_weight_matching(const std::vector<std::vector<double>>& weight) {
    const std::size_t n = weight.size();
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials over cost = -weight.
    std::vector<double> u(n + 1, 0), v(n + 1, 0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            std::size_t i0 = match[j0], j1 = 0;
            double delta = inf;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = -weight[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<std::size_t> row_to_col(n);
    for (std::size_t j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

/// Fraction of points whose cluster maps to their label under the best one-to-one mapping.
inline double clustering_accuracy(const std::vector<std::size_t>& assignments, const std::vector<std::string>& labels) {
    if (assignments.size() != labels.size())
        throw std::invalid_argument("assignments (" + std::to_string(assignments.size()) + ") and labels (" +
                                    std::to_string(labels.size()) + ") differ in size");
    if (labels.empty()) throw std::invalid_argument("no points to score");

    std::map<std::size_t, std::size_t> cluster_index;
    std::map<std::string, std::size_t> label_index;
    for (auto a : assignments) cluster_index.emplace(a, cluster_index.size());
    for (const auto& l : labels) label_index.emplace(l, label_index.size());

    const std::size_t n = std::max(cluster_index.size(), label_index.size());
    std::vector<std::vector<double>> table(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < labels.size(); ++i) table[cluster_index[assignments[i]]][label_index[labels[i]]] += 1;

    auto match = max_weight_matching(table);
    double hit = 0;
    for (std::size_t r = 0; r < n; ++r) hit += table[r][match[r]];
    return hit / static_cast<double>(labels.size());
}

// --- nearest-neighbour learners --------------------------------------------

enum class KnnTask { classify, regress };

struct KnnResult {
    double metric = 0;       // accuracy or RMSE
    std::size_t evaluated = 0;
    std::size_t oov = 0;     // records dropped because the entity has no vector
};

/// Leave-one-out kNN over cosine similarity. Neighbour ties go to the smaller entity token;
/// vote ties to the smaller label.
inline KnnResult knn_evaluate(const EmbeddingTable& table, const LabeledDataset& data, std::size_t k, KnnTask task) {
    if (k == 0) throw std::invalid_argument("k must be positive");
    std::vector<std::size_t> rows;
    std::vector<const LabeledRecord*> recs;
    KnnResult r;
    for (const auto& rec : data.records) {
        if (auto id = table.find(rec.entity)) {
            rows.push_back(*id);
            recs.push_back(&rec);
        } else {
            ++r.oov;
        }
    }
    if (rows.empty()) throw std::invalid_argument("no in-vocabulary records");
    if (rows.size() < k + 1)
        throw std::invalid_argument("need at least k+1 = " + std::to_string(k + 1) + " in-vocabulary records, have " +
                                    std::to_string(rows.size()));

    std::vector<double> targets;
    if (task == KnnTask::regress) {
        for (const auto* rec : recs) {
            double t = 0;
            const auto& s = rec->label;
            auto res = std::from_chars(s.data(), s.data() + s.size(), t);
            if (res.ec != std::errc() || res.ptr != s.data() + s.size())
                throw std::invalid_argument("non-numeric regression target '" + s + "' for " + rec->entity);
            targets.push_back(t);
        }
    }

    const std::size_t n = rows.size();
    std::size_t correct = 0;
    double sq = 0;
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t i = 0; i < n; ++i) {
        cand.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) cand.emplace_back(cosine(table.row(rows[i]), table.row(rows[j])), j);
        std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(k), cand.end(), [&](const auto& x, const auto& y) {
            return x.first != y.first ? x.first > y.first : recs[x.second]->entity < recs[y.second]->entity;
        });
        if (task == KnnTask::classify) {
            std::map<std::string, std::size_t> votes;
            for (std::size_t m = 0; m < k; ++m) ++votes[recs[cand[m].second]->label];
            // std::map iterates labels in ascending order, so the first maximum wins ties.
            auto best = votes.begin();
            for (auto it = votes.begin(); it != votes.end(); ++it)
                if (it->second > best->second) best = it;
            if (best->first == recs[i]->label) ++correct;
        } else {
            double mean = 0;
            for (std::size_t m = 0; m < k; ++m) mean += targets[cand[m].second];
            mean /= static_cast<double>(k);
            sq += (mean - targets[i]) * (mean - targets[i]);
        }
    }
    r.evaluated = n;
    r.metric = task == KnnTask::classify ? static_cast<double>(correct) / static_cast<double>(n)
                                         : std::sqrt(sq / static_cast<double>(n));
    return r;
}

}  // namespace rdf2vec

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "random.hpp"
#include "vocabulary.hpp"

namespace rdf2vec {

enum class Mode { classic, ordered };

inline std::string_view to_string(Mode m) { return m == Mode::classic ? "classic" : "ordered"; }

inline Mode parse_mode(std::string_view s) {
    if (s == "classic") return Mode::classic;
    if (s == "ordered") return Mode::ordered;
    throw std::invalid_argument("unknown mode '" + std::string(s) + "' (expected classic or ordered)");
}

struct TrainConfig {
    Mode mode = Mode::classic;
    std::size_t dimension = 100;
    std::size_t window = 5;
    std::size_t epochs = 5;
    std::size_t negatives = 5;
    double initial_lr = 0.025;
    std::uint64_t seed = 1;
    bool dynamic_window = true;  // classic mode only
    std::size_t threads = 1;
    double sample = 0;  // frequent-token subsampling threshold; 0 disables
    // Ordered mode with a single output matrix shared by every offset. Test hook: with
    // dynamic_window off this is the classic objective computed along the ordered code path.
    bool tie_output_matrices = false;

    void validate() const {
        if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
        if (window < 1) throw std::invalid_argument("window must be >= 1");
        if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
        if (negatives < 1) throw std::invalid_argument("negatives must be >= 1");
        if (threads < 1) throw std::invalid_argument("threads must be >= 1");
        if (!(initial_lr > 0) || !std::isfinite(initial_lr)) throw std::invalid_argument("learning rate must be > 0");
        if (sample < 0) throw std::invalid_argument("sample must be >= 0");
    }
};

class NumericalDivergence : public std::runtime_error {
public:
    NumericalDivergence(TokenId center, TokenId target)
        : std::runtime_error("non-finite value in update of center " + std::to_string(center) + " / target " +
                             std::to_string(target)),
          center_(center),
          target_(target) {}

    TokenId center() const noexcept { return center_; }
    TokenId target() const noexcept { return target_; }

private:
    TokenId center_, target_;
};

template <typename Real>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Real(0)) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::span<Real> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const Real> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<Real>& data() noexcept { return data_; }
    const std::vector<Real>& data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Real> data_;
};

/// Input (embedding) matrix plus the prediction-side matrices: one in classic mode,
/// one per window offset -window..-1, +1..+window in ordered mode.
template <typename Real = float>
struct EmbeddingModel {
    Mode mode = Mode::classic;
    std::size_t window = 0;
    Matrix<Real> input;
    std::vector<Matrix<Real>> outputs;

    std::size_t dimension() const noexcept { return input.cols(); }
    std::size_t vocab_size() const noexcept { return input.rows(); }

    std::size_t output_index(int offset) const {
        if (offset == 0 || static_cast<std::size_t>(std::abs(offset)) > window)
            throw std::out_of_range("offset " + std::to_string(offset) + " outside window");
        if (outputs.size() == 1) return 0;
        auto w = static_cast<int>(window);
        return static_cast<std::size_t>(offset < 0 ? offset + w : offset + w - 1);
    }

    Matrix<Real>& output(int offset) { return outputs[output_index(offset)]; }
    const Matrix<Real>& output(int offset) const { return outputs[output_index(offset)]; }
};

template <typename Real = float>
EmbeddingModel<Real> init_model(const Vocabulary& vocab, const TrainConfig& config) {
    config.validate();
    if (vocab.empty()) throw std::invalid_argument("cannot initialise a model for an empty vocabulary");
    const std::size_t v = vocab.size(), d = config.dimension;

    EmbeddingModel<Real> m;
    m.mode = config.mode;
    m.window = config.window;
    m.input = Matrix<Real>(v, d);
    Rng rng(derive_seed(config.seed, 0));
    const double half = 0.5 / static_cast<double>(d);
    for (auto& x : m.input.data()) x = static_cast<Real>(rng.uniform(-half, half));

    std::size_t n_out = (config.mode == Mode::ordered && !config.tie_output_matrices) ? 2 * config.window : 1;
    m.outputs.assign(n_out, Matrix<Real>(v, d));
    return m;
}

namespace detail {

inline double sigmoid(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// ln(1 + e^x) without overflow.
inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

template <typename Real>
double dot(std::span<const Real> a, std::span<const Real> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return s;
}

}  // namespace detail

/// Reusable buffers for sgns_step.
struct StepScratch {
    std::vector<double> center_grad;
    std::vector<double> coef;
};

/// One skip-gram negative-sampling update for (center, context) at `offset`.
///
/// Loss is -ln s(u.v) - sum_n ln s(-u_n.v), where v is the center's input row and u, u_n
/// are rows of the output matrix selected by `offset` (classic models have only one).
/// All gradients are taken at the pre-update parameters, so repeated negatives accumulate
/// exactly. Returns the pre-update loss.
template <typename Real>
double sgns_step(EmbeddingModel<Real>& model, TokenId center, TokenId context, int offset,
                 std::span<const TokenId> negatives, double lr, StepScratch& scratch) {
    Matrix<Real>& out = model.output(offset);
    auto v = model.input.row(center);
    const std::size_t d = v.size();

    scratch.center_grad.assign(d, 0.0);
    scratch.coef.resize(negatives.size() + 1);

    double loss = 0;
    for (std::size_t t = 0; t <= negatives.size(); ++t) {
        TokenId target = t == 0 ? context : negatives[t - 1];
        auto u = out.row(target);
        double score = detail::dot<Real>(u, v);
        if (!std::isfinite(score)) throw NumericalDivergence(center, target);
        const double label = t == 0 ? 1.0 : 0.0;
        loss += t == 0 ? detail::softplus(-score) : detail::softplus(score);
        // g = -dL/dscore
        const double g = label - detail::sigmoid(score);
        scratch.coef[t] = g;
        for (std::size_t k = 0; k < d; ++k) scratch.center_grad[k] += g * static_cast<double>(u[k]);
    }

    for (std::size_t t = 0; t <= negatives.size(); ++t) {
        TokenId target = t == 0 ? context : negatives[t - 1];
        auto u = out.row(target);
        const double step = lr * scratch.coef[t];
        for (std::size_t k = 0; k < d; ++k) u[k] = static_cast<Real>(static_cast<double>(u[k]) + step * static_cast<double>(v[k]));
    }
    for (std::size_t k = 0; k < d; ++k) {
        v[k] = static_cast<Real>(static_cast<double>(v[k]) + lr * scratch.center_grad[k]);
        if (!std::isfinite(static_cast<double>(v[k]))) throw NumericalDivergence(center, context);
    }
    return loss;
}

template <typename Real>
double sgns_step(EmbeddingModel<Real>& model, TokenId center, TokenId context, int offset,
                 std::span<const TokenId> negatives, double lr) {
    StepScratch scratch;
    return sgns_step(model, center, context, offset, negatives, lr, scratch);
}

template <typename Real = float>
struct TrainResult {
    EmbeddingModel<Real> model;
    std::vector<double> epoch_loss;  // mean per-step loss for each epoch
};

namespace detail {

struct Schedule {
    double initial_lr;
    double total;  // scheduled center tokens over all epochs
    std::atomic<std::uint64_t> processed{0};

    double rate() const {
        double progress = static_cast<double>(processed.load(std::memory_order_relaxed)) / (total + 1.0);
        return initial_lr * std::max(1e-4, 1.0 - progress);
    }
};

struct LossSum {
    double sum = 0;
    std::uint64_t steps = 0;
};

template <typename Real>
void train_sentence(EmbeddingModel<Real>& model, const std::vector<TokenId>& sentence, const NegativeTable& table,
                    const TrainConfig& config, Schedule& schedule, Rng& rng, LossSum& loss, StepScratch& scratch,
                    std::vector<TokenId>& negs) {
    const bool shrink = config.mode == Mode::classic && config.dynamic_window;
    const auto n = static_cast<long>(sentence.size());
    negs.resize(config.negatives);
    for (long i = 0; i < n; ++i) {
        const double lr = schedule.rate();
        const long reach = shrink ? 1 + static_cast<long>(rng.below(config.window)) : static_cast<long>(config.window);
        for (long o = -reach; o <= reach; ++o) {
            if (o == 0 || i + o < 0 || i + o >= n) continue;
            const TokenId context = sentence[static_cast<std::size_t>(i + o)];
            for (auto& neg : negs) {
                int attempts = 0;
                do {
                    neg = table.sample(rng);
                    if (++attempts > 10000) throw std::runtime_error("negative table has no token other than the context");
                } while (neg == context);
            }
            loss.sum += sgns_step(model, sentence[static_cast<std::size_t>(i)], context, static_cast<int>(o), negs, lr, scratch);
            ++loss.steps;
        }
        schedule.processed.fetch_add(1, std::memory_order_relaxed);
    }
}

}  // namespace detail

/// Trains for config.epochs passes over `walks`, rewinding the stream between epochs.
/// With threads > 1 workers update the shared matrices without locking; only the
/// single-thread path is reproducible.
template <typename Real = float>
TrainResult<Real> train(std::istream& walks, const Vocabulary& vocab, const NegativeTable& table, const TrainConfig& config,
                        std::ostream* diagnostics = nullptr) {
    config.validate();
    if (vocab.size() < 2) throw std::invalid_argument("training needs at least two distinct tokens");

    TrainResult<Real> result{init_model<Real>(vocab, config), {}};
    auto& model = result.model;

    detail::Schedule schedule{config.initial_lr, static_cast<double>(vocab.total_tokens()) * static_cast<double>(config.epochs)};
    Rng rng(derive_seed(config.seed, 1));
    StepScratch scratch;
    std::vector<TokenId> negs;

    // word2vec's keep probability: (sqrt(f / (s * total)) + 1) * (s * total) / f
    const double threshold = config.sample * static_cast<double>(vocab.total_tokens());
    auto keep = [&](TokenId id, Rng& r) {
        if (config.sample <= 0) return true;
        double f = static_cast<double>(vocab.count(id));
        double p = (std::sqrt(f / threshold) + 1.0) * threshold / f;
        return p >= 1.0 || r.uniform() < p;
    };

    constexpr std::size_t kChunkLines = 8192;
    std::vector<std::string> lines;
    std::vector<std::vector<TokenId>> sentences;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        walks.clear();
        walks.seekg(0);
        if (!walks) throw std::runtime_error("cannot rewind walk stream for epoch " + std::to_string(epoch + 1));

        detail::LossSum epoch_loss;
        std::size_t chunk_index = 0;
        bool more = true;
        while (more) {
            lines.clear();
            std::string line;
            while (lines.size() < kChunkLines && std::getline(walks, line)) lines.push_back(std::move(line));
            more = lines.size() == kChunkLines;
            if (walks.bad()) throw std::runtime_error("read error in walk stream during epoch " + std::to_string(epoch + 1));
            if (lines.empty()) break;

            if (config.threads == 1) {
                std::vector<TokenId> sentence;
                for (const auto& l : lines) {
                    sentence.clear();
                    for_each_token(l, [&](std::string_view tok) {
                        if (auto id = vocab.find(tok)) {
                            if (keep(*id, rng)) sentence.push_back(*id);
                            else schedule.processed.fetch_add(1, std::memory_order_relaxed);
                        }
                    });
                    detail::train_sentence(model, sentence, table, config, schedule, rng, epoch_loss, scratch, negs);
                }
            } else {
                const std::size_t workers = std::min(config.threads, lines.size());
                std::vector<detail::LossSum> losses(workers);
                std::vector<std::thread> pool;
                for (std::size_t w = 0; w < workers; ++w) {
                    pool.emplace_back([&, w] {
                        Rng local(derive_seed(config.seed, 2, epoch, chunk_index, w));
                        StepScratch s;
                        std::vector<TokenId> local_negs, sentence;
                        for (std::size_t li = w; li < lines.size(); li += workers) {
                            sentence.clear();
                            for_each_token(lines[li], [&](std::string_view tok) {
                                if (auto id = vocab.find(tok)) {
                                    if (keep(*id, local)) sentence.push_back(*id);
                                    else schedule.processed.fetch_add(1, std::memory_order_relaxed);
                                }
                            });
                            detail::train_sentence(model, sentence, table, config, schedule, local, losses[w], s, local_negs);
                        }
                    });
                }
                for (auto& t : pool) t.join();
                for (const auto& l : losses) {
                    epoch_loss.sum += l.sum;
                    epoch_loss.steps += l.steps;
                }
            }
            ++chunk_index;
        }

        double mean = epoch_loss.steps ? epoch_loss.sum / static_cast<double>(epoch_loss.steps) : 0.0;
        result.epoch_loss.push_back(mean);
        if (diagnostics) *diagnostics << (epoch + 1) << '\t' << mean << '\n' << std::flush;
    }
    return result;
}

}  // namespace rdf2vec

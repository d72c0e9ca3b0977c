#include "punct/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "punct/error.hpp"
#include "punct/rng.hpp"

namespace punct {

namespace {

void check_shapes(const GloveParams& params, const CoocMatrix& x) {
    require(params.vocab_size == x.vocab_size(),
            "embeddings: params and co-occurrence matrix disagree on vocabulary size");
    require(params.dim >= 1, "embeddings: dimension must be >= 1");
    require(params.w.size() == params.vocab_size * params.dim &&
                params.w_ctx.size() == params.vocab_size * params.dim &&
                params.b.size() == params.vocab_size && params.b_ctx.size() == params.vocab_size,
            "embeddings: parameter block shapes are inconsistent");
}

double dot(std::span<const double> u, std::span<const double> v) {
    double sum = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) sum += u[k] * v[k];
    return sum;
}

double residual(const GloveParams& params, const CoocEntry& e) {
    return dot(params.row_w(e.i), params.row_ctx(e.j)) + params.b[e.i] + params.b_ctx[e.j] -
           std::log(e.value);
}

// Vocabulary indices of words that have a pre-trained anchor, ascending.
std::vector<std::size_t> anchored_indices(const EmbeddingTable& pretrained,
                                          const Vocabulary& vocab, std::size_t dim) {
    require(pretrained.dim() == dim,
            "embeddings: pre-trained dimension " + std::to_string(pretrained.dim()) +
                " does not match configured dimension " + std::to_string(dim));
    std::vector<std::size_t> anchored;
    const auto& entries = vocab.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (pretrained.find(entries[i].first) != nullptr) anchored.push_back(i);
    }
    return anchored;
}

double penalty_cost(const GloveParams& params, const EmbeddingTable& pretrained,
                    const Vocabulary& vocab, double mu) {
    if (mu == 0.0) return 0.0;
    double sum = 0.0;
    const auto& entries = vocab.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::vector<double>* anchor = pretrained.find(entries[i].first);
        if (!anchor) continue;
        auto wi = params.row_w(i);
        auto ci = params.row_ctx(i);
        for (std::size_t k = 0; k < params.dim; ++k) {
            double diff = wi[k] + ci[k] - (*anchor)[k];
            sum += diff * diff;
        }
    }
    return mu * sum;
}

}  // namespace

GloveParams GloveParams::zeros(std::size_t vocab_size, std::size_t dim) {
    GloveParams p;
    p.vocab_size = vocab_size;
    p.dim = dim;
    p.w.assign(vocab_size * dim, 0.0);
    p.w_ctx.assign(vocab_size * dim, 0.0);
    p.b.assign(vocab_size, 0.0);
    p.b_ctx.assign(vocab_size, 0.0);
    return p;
}

const std::vector<double>* EmbeddingTable::find(std::string_view token) const {
    auto it = vectors_.find(std::string(token));
    if (it == vectors_.end()) return nullptr;
    return &it->second;
}

void EmbeddingTable::insert(std::string token, std::vector<double> vector) {
    require(vector.size() == dim_, "embedding table: vector dimension mismatch");
    vectors_[std::move(token)] = std::move(vector);
}

double glove_weight(double x, const TrainConfig& cfg) {
    return x < cfg.x_max ? std::pow(x / cfg.x_max, cfg.alpha) : 1.0;
}

double glove_cost(const GloveParams& params, const CoocMatrix& x, const TrainConfig& cfg) {
    check_shapes(params, x);
    double cost = 0.0;
    for (const CoocEntry& e : x.entries()) {
        double r = residual(params, e);
        cost += glove_weight(e.value, cfg) * r * r;
    }
    return cost;
}

double mittens_cost(const GloveParams& params, const CoocMatrix& x,
                    const EmbeddingTable& pretrained, const Vocabulary& vocab,
                    const TrainConfig& cfg) {
    require(pretrained.dim() == params.dim,
            "mittens_cost: pre-trained dimension does not match parameter dimension");
    return glove_cost(params, x, cfg) + penalty_cost(params, pretrained, vocab, cfg.mu);
}

GloveParams gradients(const GloveParams& params, const CoocMatrix& x,
                      const EmbeddingTable* pretrained, const Vocabulary& vocab,
                      const TrainConfig& cfg) {
    check_shapes(params, x);
    GloveParams grad = GloveParams::zeros(params.vocab_size, params.dim);
    for (const CoocEntry& e : x.entries()) {
        double common = 2.0 * glove_weight(e.value, cfg) * residual(params, e);
        auto wi = params.row_w(e.i);
        auto cj = params.row_ctx(e.j);
        auto gwi = grad.row_w(e.i);
        auto gcj = grad.row_ctx(e.j);
        for (std::size_t k = 0; k < params.dim; ++k) {
            gwi[k] += common * cj[k];
            gcj[k] += common * wi[k];
        }
        grad.b[e.i] += common;
        grad.b_ctx[e.j] += common;
    }
    if (pretrained != nullptr && cfg.mu != 0.0) {
        for (std::size_t i : anchored_indices(*pretrained, vocab, params.dim)) {
            const std::vector<double>& anchor = *pretrained->find(vocab.entries()[i].first);
            auto wi = params.row_w(i);
            auto ci = params.row_ctx(i);
            auto gwi = grad.row_w(i);
            auto gci = grad.row_ctx(i);
            for (std::size_t k = 0; k < params.dim; ++k) {
                double g = 2.0 * cfg.mu * (wi[k] + ci[k] - anchor[k]);
                gwi[k] += g;
                gci[k] += g;
            }
        }
    }
    return grad;
}

TrainResult train(const CoocMatrix& x, const Vocabulary& vocab, const TrainConfig& cfg,
                  const EmbeddingTable* pretrained) {
    require(vocab.size() == x.vocab_size(),
            "train: vocabulary and co-occurrence matrix disagree on size");
    require(cfg.dim >= 1, "train: dim must be >= 1");
    require(cfg.x_max > 0.0, "train: x_max must be positive");
    require(cfg.alpha > 0.0 && cfg.alpha <= 1.0, "train: alpha must be in (0, 1]");
    require(cfg.mu >= 0.0, "train: mu must be non-negative");
    require(cfg.learning_rate > 0.0, "train: learning rate must be positive");
    require(cfg.iterations >= 1, "train: iterations must be >= 1");

    const std::size_t v = vocab.size();
    const std::size_t d = cfg.dim;
    GloveParams params = GloveParams::zeros(v, d);
    Rng rng(cfg.seed);
    const double init = 0.5 / static_cast<double>(d);
    for (double& p : params.w) p = rng.uniform(-init, init);
    for (double& p : params.w_ctx) p = rng.uniform(-init, init);
    for (double& p : params.b) p = rng.uniform(-init, init);
    for (double& p : params.b_ctx) p = rng.uniform(-init, init);

    if (pretrained != nullptr) {
        for (std::size_t i : anchored_indices(*pretrained, vocab, d)) {
            const std::vector<double>& anchor = *pretrained->find(vocab.entries()[i].first);
            auto wi = params.row_w(i);
            auto ci = params.row_ctx(i);
            for (std::size_t k = 0; k < d; ++k) {
                wi[k] = anchor[k] / 2.0;
                ci[k] = anchor[k] / 2.0;
            }
        }
    }

    GloveParams accum = GloveParams::zeros(v, d);  // AdaGrad squared-gradient sums
    auto adagrad = [&cfg](std::vector<double>& theta, const std::vector<double>& g,
                          std::vector<double>& acc) {
        for (std::size_t k = 0; k < theta.size(); ++k) {
            acc[k] += g[k] * g[k];
            if (acc[k] > 0.0) theta[k] -= cfg.learning_rate * g[k] / std::sqrt(acc[k]);
        }
    };

    TrainResult result;
    result.cost_log.reserve(cfg.iterations);
    for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
        double cost = pretrained != nullptr
                          ? mittens_cost(params, x, *pretrained, vocab, cfg)
                          : glove_cost(params, x, cfg);
        if (!std::isfinite(cost)) {
            std::string offenders;
            int shown = 0;
            for (const CoocEntry& e : x.entries()) {
                if (!std::isfinite(residual(params, e))) {
                    offenders += " (" + std::to_string(e.i) + "," + std::to_string(e.j) + ")";
                    if (++shown == 5) break;
                }
            }
            throw Error("embedding training diverged at iteration " + std::to_string(iter) +
                        "; non-finite entries:" + offenders);
        }
        result.cost_log.push_back(cost);
        GloveParams grad = gradients(params, x, pretrained, vocab, cfg);
        adagrad(params.w, grad.w, accum.w);
        adagrad(params.w_ctx, grad.w_ctx, accum.w_ctx);
        adagrad(params.b, grad.b, accum.b);
        adagrad(params.b_ctx, grad.b_ctx, accum.b_ctx);
    }
    result.params = std::move(params);
    return result;
}

EmbeddingTable final_embedding(const GloveParams& params, const Vocabulary& vocab) {
    require(params.vocab_size == vocab.size(), "final_embedding: vocabulary size mismatch");
    EmbeddingTable table(params.dim);
    const auto& entries = vocab.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        std::vector<double> sum(params.dim);
        auto wi = params.row_w(i);
        auto ci = params.row_ctx(i);
        for (std::size_t k = 0; k < params.dim; ++k) sum[k] = wi[k] + ci[k];
        table.insert(entries[i].first, std::move(sum));
    }
    return table;
}

double cosine(std::span<const double> u, std::span<const double> v) {
    require(u.size() == v.size(), "cosine: dimension mismatch");
    double nu = std::sqrt(dot(u, u));
    double nv = std::sqrt(dot(v, v));
    if (nu == 0.0 || nv == 0.0) throw Error("cosine: zero-norm vector");
    return dot(u, v) / (nu * nv);
}

double phrase_similarity(const std::vector<std::string>& phrase_a,
                         const std::vector<std::string>& phrase_b,
                         const EmbeddingTable& embeddings) {
    require(!phrase_a.empty() && !phrase_b.empty(), "phrase_similarity: empty phrase");
    std::string missing;
    auto mean_vector = [&](const std::vector<std::string>& phrase) {
        std::vector<double> mean(embeddings.dim(), 0.0);
        for (const std::string& word : phrase) {
            const std::vector<double>* vec = embeddings.find(word);
            if (!vec) {
                missing += missing.empty() ? word : ", " + word;
                continue;
            }
            for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += (*vec)[k];
        }
        for (double& m : mean) m /= static_cast<double>(phrase.size());
        return mean;
    };
    std::vector<double> ma = mean_vector(phrase_a);
    std::vector<double> mb = mean_vector(phrase_b);
    if (!missing.empty()) throw Error("phrase_similarity: words missing from embeddings: " + missing);
    return cosine(ma, mb);
}

EmbeddingTable load_pretrained(std::istream& input, std::size_t expected_dim,
                               PretrainedLoadStats* stats) {
    require(expected_dim >= 1, "load_pretrained: expected_dim must be >= 1");
    EmbeddingTable table(expected_dim);
    PretrainedLoadStats local;
    std::string line;
    while (std::getline(input, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        std::vector<double> vec;
        vec.reserve(expected_dim);
        double value = 0.0;
        while (ls >> value) vec.push_back(value);
        if (token.empty() || vec.size() != expected_dim) {
            ++local.skipped_dimension;
            continue;
        }
        if (table.find(token) != nullptr) ++local.duplicates;
        table.insert(std::move(token), std::move(vec));
    }
    local.loaded = table.size();
    if (stats != nullptr) *stats = local;
    if (table.size() == 0) throw Error("embedding file contains no usable vectors");
    return table;
}

EmbeddingTable load_pretrained_file(const std::string& path, std::size_t expected_dim,
                                    PretrainedLoadStats* stats) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open embedding file '" + path + "'");
    return load_pretrained(in, expected_dim, stats);
}

void save_embeddings(const EmbeddingTable& table, std::ostream& out) {
    std::vector<const std::string*> tokens;
    tokens.reserve(table.size());
    for (const auto& [token, _] : table.vectors()) tokens.push_back(&token);
    std::sort(tokens.begin(), tokens.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    char buf[64];
    for (const std::string* token : tokens) {
        out << *token;
        for (double v : *table.find(*token)) {
            std::snprintf(buf, sizeof(buf), " %.17g", v);
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace punct

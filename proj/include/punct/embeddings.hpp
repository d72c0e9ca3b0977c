#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "punct/cooc.hpp"

namespace punct {

// Word vectors w, context vectors w_ctx, and the two bias blocks. The final
// embedding of word i is row_w(i) + row_ctx(i). The same struct carries
// gradients, which share the shapes.
struct GloveParams {
    std::size_t vocab_size = 0;
    std::size_t dim = 0;
    std::vector<double> w;      // vocab_size x dim, row-major
    std::vector<double> w_ctx;  // vocab_size x dim, row-major
    std::vector<double> b;      // vocab_size
    std::vector<double> b_ctx;  // vocab_size

    static GloveParams zeros(std::size_t vocab_size, std::size_t dim);

    std::span<double> row_w(std::size_t i) { return {w.data() + i * dim, dim}; }
    std::span<const double> row_w(std::size_t i) const { return {w.data() + i * dim, dim}; }
    std::span<double> row_ctx(std::size_t i) { return {w_ctx.data() + i * dim, dim}; }
    std::span<const double> row_ctx(std::size_t i) const { return {w_ctx.data() + i * dim, dim}; }
};

// token -> d-vector table; used both for pre-trained anchors and for trained
// output embeddings.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return vectors_.size(); }
    const std::vector<double>* find(std::string_view token) const;
    void insert(std::string token, std::vector<double> vector);
    const std::unordered_map<std::string, std::vector<double>>& vectors() const { return vectors_; }

private:
    std::size_t dim_ = 0;
    std::unordered_map<std::string, std::vector<double>> vectors_;
};

struct TrainConfig {
    std::size_t dim = 50;
    double x_max = 100.0;       // weighting cap
    double alpha = 0.75;        // weighting exponent
    double mu = 0.1;            // retrofitting penalty weight
    double learning_rate = 0.05;
    std::size_t iterations = 200;
    std::uint64_t seed = 42;
};

struct PretrainedLoadStats {
    std::size_t loaded = 0;
    std::size_t skipped_dimension = 0;  // lines whose vector length != expected_dim
    std::size_t duplicates = 0;         // tokens seen more than once (last wins)
};

// GloVe weighting f(x) = (x/x_max)^alpha for x < x_max, else 1.
double glove_weight(double x, const TrainConfig& cfg);

// J = sum over stored entries of f(X_ij) (w_i . w~_j + b_i + b~_j - log X_ij)^2.
double glove_cost(const GloveParams& params, const CoocMatrix& x, const TrainConfig& cfg);

// J + mu * sum over anchored words of ||(w_i + w~_i) - v_i||^2. Only words
// with a pre-trained vector are anchored; mu = 0 reduces exactly to glove_cost.
double mittens_cost(const GloveParams& params, const CoocMatrix& x,
                    const EmbeddingTable& pretrained, const Vocabulary& vocab,
                    const TrainConfig& cfg);

// Analytic gradients of the cost above. Pass pretrained = nullptr for the
// plain GloVe objective.
GloveParams gradients(const GloveParams& params, const CoocMatrix& x,
                      const EmbeddingTable* pretrained, const Vocabulary& vocab,
                      const TrainConfig& cfg);

struct TrainResult {
    GloveParams params;
    std::vector<double> cost_log;  // cost before each iteration's update
};

// Full-batch AdaGrad. Parameters start uniform in [-0.5/d, +0.5/d] from
// cfg.seed; anchored words start at w = w~ = v/2 so their final embedding
// equals the pre-trained vector at step 0.
TrainResult train(const CoocMatrix& x, const Vocabulary& vocab, const TrainConfig& cfg,
                  const EmbeddingTable* pretrained = nullptr);

// Final embeddings w + w~ for every vocabulary word.
EmbeddingTable final_embedding(const GloveParams& params, const Vocabulary& vocab);

double cosine(std::span<const double> u, std::span<const double> v);

// Cosine of the unweighted mean vectors of the two phrases. Throws listing
// any words missing from the table.
double phrase_similarity(const std::vector<std::string>& phrase_a,
                         const std::vector<std::string>& phrase_b,
                         const EmbeddingTable& embeddings);

// GloVe text format: `token v1 ... vd`, space separated. Lines with a
// mismatched dimension are skipped and counted; duplicate tokens keep the
// last occurrence.
EmbeddingTable load_pretrained(std::istream& input, std::size_t expected_dim,
                               PretrainedLoadStats* stats = nullptr);
EmbeddingTable load_pretrained_file(const std::string& path, std::size_t expected_dim,
                                    PretrainedLoadStats* stats = nullptr);
void save_embeddings(const EmbeddingTable& table, std::ostream& out);

}  // namespace punct

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "punct/corpus.hpp"

namespace punct {

// Frequency-ranked vocabulary (ties broken lexicographically). Indices are
// dense, 0..size()-1.
class Vocabulary {
public:
    using Entry = std::pair<std::string, std::uint64_t>;

    static Vocabulary build(const std::vector<Conversation>& convs, std::size_t max_size,
                            std::uint64_t min_count);
    // Assembles a vocabulary from explicit (token, frequency) counts; applies
    // the same ranking, truncation, and threshold rules as build().
    static Vocabulary from_counts(std::vector<Entry> counts, std::size_t max_size,
                                  std::uint64_t min_count);

    std::optional<std::size_t> index_of(std::string_view token) const;
    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    void save(std::ostream& out) const;  // `token<TAB>frequency`, index order
    static Vocabulary load(std::istream& input);

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

// One directed nonzero of the symmetric co-occurrence matrix.
struct CoocEntry {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    double value = 0.0;
};

// Immutable sparse symmetric matrix X. Entries are stored in both directions,
// sorted by (i, j), so iteration order is reproducible.
class CoocMatrix {
public:
    CoocMatrix() = default;

    // Low-level constructor from explicit directed entries (no symmetry is
    // imposed). build_cooc and load() always produce symmetric matrices.
    static CoocMatrix from_entries(std::size_t vocab_size, std::vector<CoocEntry> directed);

    std::size_t vocab_size() const { return vocab_size_; }
    const std::vector<CoocEntry>& entries() const { return entries_; }  // all directed, i != j
    std::size_t nnz_upper() const { return entries_.size() / 2; }
    double at(std::size_t i, std::size_t j) const;

    // Snapshot format: `COOC v1 <vocab_size> <nnz>` then one upper-triangle
    // entry per line, `i<TAB>j<TAB>x_ij`, full decimal precision.
    void save(std::ostream& out) const;
    static CoocMatrix load(std::istream& input);

private:
    friend class CoocBuilder;
    std::size_t vocab_size_ = 0;
    std::vector<CoocEntry> entries_;
};

// Accumulates weighted counts. Builders for disjoint conversation shards can
// be merged; addition is associative, so sharding does not change the result.
class CoocBuilder {
public:
    explicit CoocBuilder(std::size_t vocab_size) : vocab_size_(vocab_size) {}

    // Symmetric accumulate. Pairs with i == j are ignored; the diagonal stays
    // empty.
    void add(std::size_t i, std::size_t j, double weight);

    // For every pair of in-vocabulary tokens at distance d <= window in the
    // merged sequence, adds 1/d. Windows never cross conversations.
    void add_conversation(const Conversation& conv, const Vocabulary& vocab, std::size_t window);

    void merge(const CoocBuilder& other);
    CoocMatrix finish() const;

private:
    std::size_t vocab_size_;
    std::unordered_map<std::uint64_t, double> upper_;  // key (i<<32)|j with i < j
};

CoocMatrix build_cooc(const std::vector<Conversation>& convs, const Vocabulary& vocab,
                      std::size_t window);

}  // namespace punct

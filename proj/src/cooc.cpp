#include "punct/cooc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "punct/error.hpp"

namespace punct {

namespace {

std::uint64_t pair_key(std::size_t i, std::size_t j) {
    return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
}

}  // namespace

Vocabulary Vocabulary::build(const std::vector<Conversation>& convs, std::size_t max_size,
                             std::uint64_t min_count) {
    require(max_size >= 1, "build_vocab: max_size must be >= 1");
    require(min_count >= 1, "build_vocab: min_count must be >= 1");
    std::unordered_map<std::string, std::uint64_t> freq;
    for (const Conversation& conv : convs) {
        for (const Token& t : conv.tokens) ++freq[t.text];
    }
    if (freq.empty()) throw Error("build_vocab: corpus is empty");
    std::vector<Entry> counts(freq.begin(), freq.end());
    return from_counts(std::move(counts), max_size, min_count);
}

Vocabulary Vocabulary::from_counts(std::vector<Entry> counts, std::size_t max_size,
                                   std::uint64_t min_count) {
    std::sort(counts.begin(), counts.end(), [](const Entry& a, const Entry& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocabulary vocab;
    for (Entry& e : counts) {
        if (vocab.entries_.size() >= max_size) break;
        if (e.second < min_count) break;  // sorted by frequency, nothing later qualifies
        vocab.index_.emplace(e.first, vocab.entries_.size());
        vocab.entries_.push_back(std::move(e));
    }
    if (vocab.entries_.empty()) throw Error("build_vocab: no token meets min_count");
    return vocab;
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void Vocabulary::save(std::ostream& out) const {
    for (const Entry& e : entries_) out << e.first << '\t' << e.second << '\n';
}

Vocabulary Vocabulary::load(std::istream& input) {
    Vocabulary vocab;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError("vocabulary line " + std::to_string(line_no) + ": missing tab");
        }
        std::string token = line.substr(0, tab);
        std::uint64_t count = 0;
        const char* begin = line.data() + tab + 1;
        const char* end = line.data() + line.size();
        auto [ptr, ec] = std::from_chars(begin, end, count);
        if (ec != std::errc{} || ptr != end) {
            throw ParseError("vocabulary line " + std::to_string(line_no) + ": bad frequency");
        }
        vocab.index_.emplace(token, vocab.entries_.size());
        vocab.entries_.emplace_back(std::move(token), count);
    }
    if (vocab.entries_.empty()) throw Error("vocabulary file is empty");
    return vocab;
}

CoocMatrix CoocMatrix::from_entries(std::size_t vocab_size, std::vector<CoocEntry> directed) {
    for (const CoocEntry& e : directed) {
        require(e.i < vocab_size && e.j < vocab_size, "cooc from_entries: index out of range");
        require(e.i != e.j, "cooc from_entries: diagonal entries are not allowed");
        require(e.value > 0.0, "cooc from_entries: stored values must be positive");
    }
    std::sort(directed.begin(), directed.end(), [](const CoocEntry& a, const CoocEntry& b) {
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    CoocMatrix matrix;
    matrix.vocab_size_ = vocab_size;
    matrix.entries_ = std::move(directed);
    return matrix;
}

double CoocMatrix::at(std::size_t i, std::size_t j) const {
    CoocEntry probe{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), 0.0};
    auto it = std::lower_bound(entries_.begin(), entries_.end(), probe,
                               [](const CoocEntry& a, const CoocEntry& b) {
                                   if (a.i != b.i) return a.i < b.i;
                                   return a.j < b.j;
                               });
    if (it != entries_.end() && it->i == i && it->j == j) return it->value;
    return 0.0;
}

void CoocMatrix::save(std::ostream& out) const {
    out << "COOC v1 " << vocab_size_ << ' ' << nnz_upper() << '\n';
    char buf[320];
    for (const CoocEntry& e : entries_) {
        if (e.i > e.j) continue;
        std::snprintf(buf, sizeof(buf), "%u\t%u\t%.17g\n", e.i, e.j, e.value);
        out << buf;
    }
}

CoocMatrix CoocMatrix::load(std::istream& input) {
    std::string header;
    if (!std::getline(input, header)) throw ParseError("co-occurrence file: missing header");
    std::istringstream hs(header);
    std::string magic, version;
    std::size_t vocab_size = 0, nnz = 0;
    if (!(hs >> magic >> version >> vocab_size >> nnz) || magic != "COOC" || version != "v1") {
        throw ParseError("co-occurrence file: bad header '" + header + "'");
    }
    CoocBuilder builder(vocab_size);
    std::string line;
    std::size_t line_no = 1, seen = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::size_t i = 0, j = 0;
        double value = 0.0;
        if (!(ls >> i >> j >> value) || i > j || i >= vocab_size || j >= vocab_size) {
            throw ParseError("co-occurrence file line " + std::to_string(line_no) + ": bad entry");
        }
        builder.add(i, j, value);
        ++seen;
    }
    if (seen != nnz) {
        throw ParseError("co-occurrence file: header promises " + std::to_string(nnz) +
                         " entries, found " + std::to_string(seen));
    }
    return builder.finish();
}

void CoocBuilder::add(std::size_t i, std::size_t j, double weight) {
    require(i < vocab_size_ && j < vocab_size_, "cooc add: index out of range");
    if (i == j || weight == 0.0) return;
    if (i > j) std::swap(i, j);
    upper_[pair_key(i, j)] += weight;
}

void CoocBuilder::add_conversation(const Conversation& conv, const Vocabulary& vocab,
                                   std::size_t window) {
    require(window >= 1, "build_cooc: window must be >= 1");
    const std::size_t n = conv.tokens.size();
    std::vector<std::optional<std::size_t>> ids(n);
    for (std::size_t p = 0; p < n; ++p) ids[p] = vocab.index_of(conv.tokens[p].text);
    for (std::size_t p = 0; p < n; ++p) {
        if (!ids[p]) continue;
        const std::size_t limit = std::min(n, p + window + 1);
        for (std::size_t q = p + 1; q < limit; ++q) {
            if (!ids[q]) continue;
            add(*ids[p], *ids[q], 1.0 / static_cast<double>(q - p));
        }
    }
}

void CoocBuilder::merge(const CoocBuilder& other) {
    require(vocab_size_ == other.vocab_size_, "cooc merge: vocabulary sizes differ");
    for (const auto& [key, value] : other.upper_) upper_[key] += value;
}

CoocMatrix CoocBuilder::finish() const {
    CoocMatrix matrix;
    matrix.vocab_size_ = vocab_size_;
    matrix.entries_.reserve(upper_.size() * 2);
    for (const auto& [key, value] : upper_) {
        if (value == 0.0) continue;
        auto i = static_cast<std::uint32_t>(key >> 32);
        auto j = static_cast<std::uint32_t>(key & 0xffffffffu);
        matrix.entries_.push_back({i, j, value});
        matrix.entries_.push_back({j, i, value});
    }
    std::sort(matrix.entries_.begin(), matrix.entries_.end(),
              [](const CoocEntry& a, const CoocEntry& b) {
                  if (a.i != b.i) return a.i < b.i;
                  return a.j < b.j;
              });
    return matrix;
}

CoocMatrix build_cooc(const std::vector<Conversation>& convs, const Vocabulary& vocab,
                      std::size_t window) {
    CoocBuilder builder(vocab.size());
    for (const Conversation& conv : convs) builder.add_conversation(conv, vocab, window);
    return builder.finish();
}

}  // namespace punct

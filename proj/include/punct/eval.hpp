#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "punct/corpus.hpp"
#include "punct/embeddings.hpp"

namespace punct {

struct ClassMetrics {
    std::array<double, kNumClasses> precision{};
    std::array<double, kNumClasses> recall{};
    std::array<double, kNumClasses> f1{};
    std::array<std::uint64_t, kNumClasses> support{};  // gold count per class
    double accuracy = 0.0;                             // micro: correct / total
};

// rows = actual class, columns = predicted class.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

    std::uint64_t total() const;
    std::array<std::array<double, kNumClasses>, kNumClasses> row_percentages() const;
};

// Per-class precision/recall/F1 tallied directly from the sequences, plus the
// exact confusion counts. Zero-denominator cells report 0.
std::pair<ClassMetrics, ConfusionMatrix> score(std::span<const PunctuationClass> preds,
                                               std::span<const PunctuationClass> golds);

// Same metrics derived from confusion counts alone; used as an independent
// cross-check of score().
ClassMetrics metrics_from_confusion(const ConfusionMatrix& confusion);

// Per-class change of the confusion diagonal, in percentage points:
// delta_c = diag%(second) - diag%(first).
std::array<double, kNumClasses> compare_confusions(const ConfusionMatrix& first,
                                                   const ConfusionMatrix& second);

struct SimilarityRow {
    std::vector<std::string> phrase_a;
    std::vector<std::string> phrase_b;
    double cosine_original = 0.0;
    double cosine_retrofitted = 0.0;
};

struct SimilarityReport {
    std::vector<SimilarityRow> rows;
    std::size_t increased = 0;  // pairs whose similarity went up
};

SimilarityReport similarity_report(
    const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>& pairs,
    const EmbeddingTable& original, const EmbeddingTable& retrofitted);

// Machine-readable lines `class<TAB>precision<TAB>recall<TAB>f1<TAB>support`
// plus a trailing `accuracy<TAB>value` line.
void write_metrics(const ClassMetrics& metrics, std::ostream& out);
// Confusion matrix as 4 rows of 4 tab-separated row percentages, one decimal.
void write_confusion(const ConfusionMatrix& confusion, std::ostream& out);
// Human-readable aligned table with both of the above.
void write_report(const ClassMetrics& metrics, const ConfusionMatrix& confusion, std::ostream& out);

}  // namespace punct

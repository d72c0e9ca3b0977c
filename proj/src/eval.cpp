#include "punct/eval.hpp"

#include <cstdio>
#include <ostream>

#include "punct/error.hpp"

namespace punct {

namespace {

double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

const char* kClassDisplay[kNumClasses] = {"BLANK", "PERIOD", "QUESTION", "COMMA"};

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t sum = 0;
    for (const auto& row : counts) {
        for (std::uint64_t c : row) sum += c;
    }
    return sum;
}

std::array<std::array<double, kNumClasses>, kNumClasses> ConfusionMatrix::row_percentages() const {
    std::array<std::array<double, kNumClasses>, kNumClasses> pct{};
    for (int a = 0; a < kNumClasses; ++a) {
        std::uint64_t row_sum = 0;
        for (std::uint64_t c : counts[a]) row_sum += c;
        for (int p = 0; p < kNumClasses; ++p) {
            pct[a][p] = row_sum > 0
                            ? 100.0 * static_cast<double>(counts[a][p]) / static_cast<double>(row_sum)
                            : 0.0;
        }
    }
    return pct;
}

std::pair<ClassMetrics, ConfusionMatrix> score(std::span<const PunctuationClass> preds,
                                               std::span<const PunctuationClass> golds) {
    require(preds.size() == golds.size(), "score: prediction and gold lengths differ (" +
                                              std::to_string(preds.size()) + " vs " +
                                              std::to_string(golds.size()) + ")");
    ConfusionMatrix confusion;
    std::array<std::uint64_t, kNumClasses> tp{}, fp{}, fn{};
    std::uint64_t correct = 0;
    for (std::size_t k = 0; k < preds.size(); ++k) {
        const int g = static_cast<int>(golds[k]);
        const int p = static_cast<int>(preds[k]);
        ++confusion.counts[g][p];
        if (g == p) {
            ++tp[g];
            ++correct;
        } else {
            ++fp[p];
            ++fn[g];
        }
    }
    ClassMetrics metrics;
    for (int c = 0; c < kNumClasses; ++c) {
        metrics.precision[c] = safe_div(static_cast<double>(tp[c]), static_cast<double>(tp[c] + fp[c]));
        metrics.recall[c] = safe_div(static_cast<double>(tp[c]), static_cast<double>(tp[c] + fn[c]));
        metrics.f1[c] = f1_of(metrics.precision[c], metrics.recall[c]);
        metrics.support[c] = tp[c] + fn[c];
    }
    metrics.accuracy =
        preds.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(preds.size());
    return {metrics, confusion};
}

ClassMetrics metrics_from_confusion(const ConfusionMatrix& confusion) {
    ClassMetrics metrics;
    std::uint64_t correct = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        std::uint64_t tp = confusion.counts[c][c];
        std::uint64_t row = 0, col = 0;
        for (int k = 0; k < kNumClasses; ++k) {
            row += confusion.counts[c][k];
            col += confusion.counts[k][c];
        }
        metrics.precision[c] = safe_div(static_cast<double>(tp), static_cast<double>(col));
        metrics.recall[c] = safe_div(static_cast<double>(tp), static_cast<double>(row));
        metrics.f1[c] = f1_of(metrics.precision[c], metrics.recall[c]);
        metrics.support[c] = row;
        correct += tp;
    }
    const std::uint64_t total = confusion.total();
    metrics.accuracy = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    return metrics;
}

std::array<double, kNumClasses> compare_confusions(const ConfusionMatrix& first,
                                                   const ConfusionMatrix& second) {
    const auto p1 = first.row_percentages();
    const auto p2 = second.row_percentages();
    std::array<double, kNumClasses> deltas{};
    for (int c = 0; c < kNumClasses; ++c) deltas[c] = p2[c][c] - p1[c][c];
    return deltas;
}

SimilarityReport similarity_report(
    const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>& pairs,
    const EmbeddingTable& original, const EmbeddingTable& retrofitted) {
    SimilarityReport report;
    for (const auto& [a, b] : pairs) {
        SimilarityRow row;
        row.phrase_a = a;
        row.phrase_b = b;
        row.cosine_original = phrase_similarity(a, b, original);
        row.cosine_retrofitted = phrase_similarity(a, b, retrofitted);
        if (row.cosine_retrofitted > row.cosine_original) ++report.increased;
        report.rows.push_back(std::move(row));
    }
    return report;
}

void write_metrics(const ClassMetrics& metrics, std::ostream& out) {
    char buf[160];
    for (int c = 0; c < kNumClasses; ++c) {
        std::snprintf(buf, sizeof(buf), "%s\t%.6f\t%.6f\t%.6f\t%llu\n", kClassDisplay[c],
                      metrics.precision[c], metrics.recall[c], metrics.f1[c],
                      static_cast<unsigned long long>(metrics.support[c]));
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "accuracy\t%.6f\n", metrics.accuracy);
    out << buf;
}

void write_confusion(const ConfusionMatrix& confusion, std::ostream& out) {
    const auto pct = confusion.row_percentages();
    char buf[160];
    for (int a = 0; a < kNumClasses; ++a) {
        std::snprintf(buf, sizeof(buf), "%.1f\t%.1f\t%.1f\t%.1f\n", pct[a][0], pct[a][1], pct[a][2],
                      pct[a][3]);
        out << buf;
    }
}

void write_report(const ClassMetrics& metrics, const ConfusionMatrix& confusion, std::ostream& out) {
    char buf[200];
    out << "class      precision   recall       f1    support\n";
    for (int c = 0; c < kNumClasses; ++c) {
        std::snprintf(buf, sizeof(buf), "%-10s %9.3f %8.3f %8.3f %10llu\n", kClassDisplay[c],
                      metrics.precision[c], metrics.recall[c], metrics.f1[c],
                      static_cast<unsigned long long>(metrics.support[c]));
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "accuracy %.4f\n\n", metrics.accuracy);
    out << buf;
    out << "confusion (rows = actual, row %):\n";
    const auto pct = confusion.row_percentages();
    out << "            BLANK   PERIOD QUESTION    COMMA\n";
    for (int a = 0; a < kNumClasses; ++a) {
        std::snprintf(buf, sizeof(buf), "%-10s %6.1f %8.1f %8.1f %8.1f\n", kClassDisplay[a],
                      pct[a][0], pct[a][1], pct[a][2], pct[a][3]);
        out << buf;
    }
}

}  // namespace punct

#include "punct/align.hpp"

#include <algorithm>

#include "punct/error.hpp"

namespace punct {

Alignment align(std::span<const std::string> a, std::span<const std::string> b,
                const AlignScoring& scoring) {
    require(!a.empty() && !b.empty(), "align: both sequences must be non-empty");
    require(scoring.match > scoring.mismatch && scoring.match > scoring.gap,
            "align: scoring must satisfy match > mismatch and match > gap");

    const std::size_t n = a.size();
    const std::size_t m = b.size();
    // score[i][j] = best score aligning a[0..i) with b[0..j)
    std::vector<double> score((n + 1) * (m + 1));
    auto cell = [m, &score](std::size_t i, std::size_t j) -> double& {
        return score[i * (m + 1) + j];
    };
    for (std::size_t i = 0; i <= n; ++i) cell(i, 0) = static_cast<double>(i) * scoring.gap;
    for (std::size_t j = 0; j <= m; ++j) cell(0, j) = static_cast<double>(j) * scoring.gap;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            double diag = cell(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? scoring.match : scoring.mismatch);
            double del = cell(i - 1, j) + scoring.gap;
            double ins = cell(i, j - 1) + scoring.gap;
            cell(i, j) = std::max(diag, std::max(del, ins));
        }
    }

    // Backtrace; each cell equals at least one candidate exactly, so the
    // comparisons below are safe. Preference order fixes tie-breaking.
    Alignment result;
    result.score = cell(n, m);
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0) {
            bool same = a[i - 1] == b[j - 1];
            double diag = cell(i - 1, j - 1) + (same ? scoring.match : scoring.mismatch);
            if (cell(i, j) == diag) {
                result.ops.push_back({same ? AlignOpKind::Match : AlignOpKind::Subst,
                                      static_cast<int>(i - 1), static_cast<int>(j - 1)});
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && cell(i, j) == cell(i - 1, j) + scoring.gap) {
            result.ops.push_back({AlignOpKind::Delete, static_cast<int>(i - 1), -1});
            --i;
            continue;
        }
        result.ops.push_back({AlignOpKind::Insert, -1, static_cast<int>(j - 1)});
        --j;
    }
    std::reverse(result.ops.begin(), result.ops.end());
    return result;
}

Conversation transfer_labels(const Conversation& conv,
                             const std::vector<std::pair<std::string, PunctuationClass>>& punct,
                             const Alignment& alignment) {
    Conversation out = conv;
    for (const AlignOp& op : alignment.ops) {
        switch (op.kind) {
            case AlignOpKind::Match:
            case AlignOpKind::Subst: {
                require(op.i >= 0 && static_cast<std::size_t>(op.i) < out.tokens.size(),
                        "transfer_labels: alignment index i out of range");
                require(op.j >= 0 && static_cast<std::size_t>(op.j) < punct.size(),
                        "transfer_labels: alignment index j out of range");
                out.tokens[op.i].label = punct[op.j].second;
                break;
            }
            case AlignOpKind::Delete: {
                require(op.i >= 0 && static_cast<std::size_t>(op.i) < out.tokens.size(),
                        "transfer_labels: alignment index i out of range");
                out.tokens[op.i].label = PunctuationClass::Blank;
                break;
            }
            case AlignOpKind::Insert:
                require(op.j >= 0 && static_cast<std::size_t>(op.j) < punct.size(),
                        "transfer_labels: alignment index j out of range");
                break;
        }
    }
    for (const Token& t : out.tokens) {
        require(t.label.has_value(), "transfer_labels: alignment did not cover every token");
    }
    return out;
}

}  // namespace punct

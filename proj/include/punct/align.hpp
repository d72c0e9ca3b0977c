#pragma once

#include <span>
#include <string>
#include <vector>

#include "punct/corpus.hpp"

namespace punct {

enum class AlignOpKind { Match, Subst, Delete, Insert };

// One alignment step. i indexes the time-annotated sequence, j the punctuated
// sequence; -1 marks the side an op does not consume.
struct AlignOp {
    AlignOpKind kind;
    int i = -1;
    int j = -1;
};

struct AlignScoring {
    double match = 1.0;
    double mismatch = -1.0;
    double gap = -1.0;
};

struct Alignment {
    std::vector<AlignOp> ops;
    double score = 0.0;
};

// Needleman-Wunsch global alignment maximizing the total score. The backtrace
// breaks ties deterministically: Match/Subst over Delete over Insert.
// Requires both sequences non-empty and match > mismatch, match > gap.
Alignment align(std::span<const std::string> a, std::span<const std::string> b,
                const AlignScoring& scoring = {});

// Copies labels from the punctuated word sequence onto the time-annotated
// tokens: Match/Subst transfer the class, Delete yields Blank, Insert is
// dropped. Every token in the result carries a label.
Conversation transfer_labels(const Conversation& conv,
                             const std::vector<std::pair<std::string, PunctuationClass>>& punct,
                             const Alignment& alignment);

}  // namespace punct

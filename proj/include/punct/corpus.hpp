#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace punct {

// The four target classes. Every other mark found in a punctuated transcript
// maps to Blank during parsing.
enum class PunctuationClass : int { Blank = 0, Period = 1, Question = 2, Comma = 3 };

inline constexpr int kNumClasses = 4;

// Canonical names used in labeled dataset files: BLANK, PERIOD, QUESTION, COMMA.
std::string_view class_name(PunctuationClass c);
PunctuationClass class_from_name(std::string_view name);

// The mark rendered after a word ("" for Blank).
std::string_view class_mark(PunctuationClass c);

enum class Side : char { A = 'A', B = 'B' };

// One spoken word: text, channel, timing, and (once transferred) its label.
struct Token {
    std::string text;    // lowercased, edge punctuation stripped, no whitespace
    Side side = Side::A;
    double start = 0.0;     // seconds
    double duration = 0.0;  // seconds
    std::optional<PunctuationClass> label;
};

// Both channels merged into one sequence, sorted by start time
// (ties: side A before B, then original file order).
struct Conversation {
    std::string id;
    std::vector<Token> tokens;
};

// Per-token standardized timing features.
struct TimingFeatures {
    double offset = 0.0;      // z-scored gap between this word's start and the previous word's end
    double duration_z = 0.0;  // z-scored word duration
};

struct TimingOptions {
    // When true, the raw offset uses the previous word uttered by the same
    // speaker instead of the previous word in the merged sequence.
    bool offset_within_speaker = false;
};

struct ClassDistribution {
    std::array<std::uint64_t, kNumClasses> counts{};
    std::array<double, kNumClasses> percentages{};
    std::uint64_t total = 0;
};

struct DatasetSplit {
    std::vector<Conversation> train;
    std::vector<Conversation> validation;
    std::vector<Conversation> test;
};

// Lowercases and strips leading/trailing punctuation. Inner characters
// (apostrophes, hyphens) are kept. May return an empty string.
std::string normalize_word(std::string_view raw);

// Reads a time-annotated transcript: one token per line,
// `start<TAB>duration<TAB>side<TAB>token`, '#' comment lines ignored.
// Tokens come back normalized, merged across sides and sorted.
Conversation parse_time_annotated(std::istream& input, std::string id);

// Reads plain punctuated text. Each word is paired with the class of the mark
// attached to its end; `!`, `...`, `;` and everything else map to Blank.
std::vector<std::pair<std::string, PunctuationClass>> parse_punctuated(std::istream& input);

// Labeled dataset lines: `start<TAB>duration<TAB>side<TAB>token<TAB>label`.
void write_labeled(const Conversation& conv, std::ostream& out);
Conversation load_labeled(std::istream& input, std::string id);

// Raw offset of token i is start_i - (start_{i-1} + duration_{i-1}); the first
// token's raw offset is 0. Offsets and durations are then z-scored per
// (conversation, speaker) group with the population standard deviation;
// constant groups and singleton groups map to zero.
std::vector<TimingFeatures> timing_features(const Conversation& conv,
                                            const TimingOptions& options = {});

// Deterministic shuffle by seed, then an 80:10:10 split over whole
// conversations; train takes the rounding remainder. Requires >= 10
// conversations.
DatasetSplit split_dataset(const std::vector<Conversation>& convs, std::uint64_t seed);

// Counts labels over fully labeled conversations. Throws on unlabeled tokens.
ClassDistribution class_distribution(const std::vector<Conversation>& convs);

}  // namespace punct

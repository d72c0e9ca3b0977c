#include "punct/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "punct/error.hpp"
#include "punct/rng.hpp"

namespace punct {

namespace {

constexpr std::string_view kEdgePunct = ".,?!;:'\"()[]{}<>`~@#$%^&*_+=|\\/-";

bool is_edge_punct(char c) { return kEdgePunct.find(c) != std::string_view::npos; }

std::vector<std::string> split_fields(std::string_view line, char sep) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = line.find(sep, pos);
        if (next == std::string_view::npos) {
            fields.emplace_back(line.substr(pos));
            break;
        }
        fields.emplace_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return fields;
}

double parse_seconds(const std::string& field, const std::string& what, std::size_t line_no) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
        throw ParseError("line " + std::to_string(line_no) + ": non-numeric " + what + " '" +
                         field + "'");
    }
    return value;
}

bool contains_whitespace(std::string_view s) {
    return s.find_first_of(" \t\r\n\v\f") != std::string_view::npos;
}

struct GroupStats {
    double mean = 0.0;
    double stddev = 0.0;  // population
    std::size_t count = 0;
};

GroupStats group_stats(const std::vector<double>& values) {
    GroupStats stats;
    stats.count = values.size();
    if (values.empty()) return stats;
    double sum = 0.0;
    for (double v : values) sum += v;
    stats.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - stats.mean) * (v - stats.mean);
    stats.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    return stats;
}

}  // namespace

std::string_view class_name(PunctuationClass c) {
    switch (c) {
        case PunctuationClass::Blank: return "BLANK";
        case PunctuationClass::Period: return "PERIOD";
        case PunctuationClass::Question: return "QUESTION";
        case PunctuationClass::Comma: return "COMMA";
    }
    throw ContractError("invalid punctuation class");
}

PunctuationClass class_from_name(std::string_view name) {
    if (name == "BLANK") return PunctuationClass::Blank;
    if (name == "PERIOD") return PunctuationClass::Period;
    if (name == "QUESTION") return PunctuationClass::Question;
    if (name == "COMMA") return PunctuationClass::Comma;
    throw ParseError("unknown punctuation label '" + std::string(name) + "'");
}

std::string_view class_mark(PunctuationClass c) {
    switch (c) {
        case PunctuationClass::Blank: return "";
        case PunctuationClass::Period: return ".";
        case PunctuationClass::Question: return "?";
        case PunctuationClass::Comma: return ",";
    }
    throw ContractError("invalid punctuation class");
}

std::string normalize_word(std::string_view raw) {
    std::size_t begin = 0;
    std::size_t end = raw.size();
    while (begin < end && is_edge_punct(raw[begin])) ++begin;
    while (end > begin && is_edge_punct(raw[end - 1])) --end;
    std::string out;
    out.reserve(end - begin);
    for (std::size_t k = begin; k < end; ++k) {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[k]))));
    }
    return out;
}

Conversation parse_time_annotated(std::istream& input, std::string id) {
    Conversation conv;
    conv.id = std::move(id);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line, '\t');
        if (fields.size() != 4) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 tab-separated fields, got " +
                             std::to_string(fields.size()));
        }
        Token token;
        token.start = parse_seconds(fields[0], "start time", line_no);
        token.duration = parse_seconds(fields[1], "duration", line_no);
        if (token.start < 0.0) {
            throw ParseError("line " + std::to_string(line_no) + ": negative start time");
        }
        if (token.duration < 0.0) {
            throw ParseError("line " + std::to_string(line_no) + ": negative duration");
        }
        if (fields[2] == "A") {
            token.side = Side::A;
        } else if (fields[2] == "B") {
            token.side = Side::B;
        } else {
            throw ParseError("line " + std::to_string(line_no) + ": invalid side '" + fields[2] +
                             "' (expected A or B)");
        }
        if (contains_whitespace(fields[3])) {
            throw ParseError("line " + std::to_string(line_no) + ": token contains whitespace");
        }
        token.text = normalize_word(fields[3]);
        if (token.text.empty()) {
            throw ParseError("line " + std::to_string(line_no) + ": token is empty after normalization");
        }
        conv.tokens.push_back(std::move(token));
    }
    // stable sort keeps original file order for equal (start, side)
    std::stable_sort(conv.tokens.begin(), conv.tokens.end(), [](const Token& a, const Token& b) {
        if (a.start != b.start) return a.start < b.start;
        return a.side < b.side;
    });
    return conv;
}

std::vector<std::pair<std::string, PunctuationClass>> parse_punctuated(std::istream& input) {
    std::vector<std::pair<std::string, PunctuationClass>> words;
    std::string raw;
    while (input >> raw) {
        std::string core = normalize_word(raw);
        if (core.empty()) continue;  // a bare mark with no attached word carries no label
        // the trailing punctuation cluster decides the class; only a lone
        // '.', ',' or '?' counts, "?!" or "..." fall back to Blank
        std::size_t tail = raw.size();
        while (tail > 0 && is_edge_punct(raw[tail - 1])) --tail;
        std::string_view cluster = std::string_view(raw).substr(tail);
        PunctuationClass cls = PunctuationClass::Blank;
        if (cluster == ".") cls = PunctuationClass::Period;
        else if (cluster == ",") cls = PunctuationClass::Comma;
        else if (cluster == "?") cls = PunctuationClass::Question;
        words.emplace_back(std::move(core), cls);
    }
    return words;
}

void write_labeled(const Conversation& conv, std::ostream& out) {
    char buf[64];
    for (const Token& t : conv.tokens) {
        if (!t.label) throw ContractError("conversation '" + conv.id + "' has an unlabeled token");
        std::snprintf(buf, sizeof(buf), "%.17g\t%.17g\t", t.start, t.duration);
        out << buf << static_cast<char>(t.side) << '\t' << t.text << '\t'
            << class_name(*t.label) << '\n';
    }
}

Conversation load_labeled(std::istream& input, std::string id) {
    Conversation conv;
    conv.id = std::move(id);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line, '\t');
        if (fields.size() != 5) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected 5 tab-separated fields, got " + std::to_string(fields.size()));
        }
        Token token;
        token.start = parse_seconds(fields[0], "start time", line_no);
        token.duration = parse_seconds(fields[1], "duration", line_no);
        if (fields[2] != "A" && fields[2] != "B") {
            throw ParseError("line " + std::to_string(line_no) + ": invalid side '" + fields[2] + "'");
        }
        token.side = fields[2] == "A" ? Side::A : Side::B;
        token.text = fields[3];
        token.label = class_from_name(fields[4]);
        conv.tokens.push_back(std::move(token));
    }
    return conv;
}

std::vector<TimingFeatures> timing_features(const Conversation& conv, const TimingOptions& options) {
    const std::size_t n = conv.tokens.size();
    std::vector<double> raw_offset(n, 0.0);
    if (options.offset_within_speaker) {
        double prev_end[2] = {-1.0, -1.0};
        bool seen[2] = {false, false};
        for (std::size_t i = 0; i < n; ++i) {
            const Token& t = conv.tokens[i];
            int s = t.side == Side::A ? 0 : 1;
            raw_offset[i] = seen[s] ? t.start - prev_end[s] : 0.0;
            prev_end[s] = t.start + t.duration;
            seen[s] = true;
        }
    } else {
        for (std::size_t i = 1; i < n; ++i) {
            const Token& prev = conv.tokens[i - 1];
            raw_offset[i] = conv.tokens[i].start - (prev.start + prev.duration);
        }
    }

    std::vector<TimingFeatures> features(n);
    for (Side side : {Side::A, Side::B}) {
        std::vector<std::size_t> members;
        std::vector<double> offsets;
        std::vector<double> durations;
        for (std::size_t i = 0; i < n; ++i) {
            if (conv.tokens[i].side != side) continue;
            members.push_back(i);
            offsets.push_back(raw_offset[i]);
            durations.push_back(conv.tokens[i].duration);
        }
        GroupStats off = group_stats(offsets);
        GroupStats dur = group_stats(durations);
        for (std::size_t k = 0; k < members.size(); ++k) {
            std::size_t i = members[k];
            features[i].offset =
                (members.size() < 2 || off.stddev == 0.0) ? 0.0 : (offsets[k] - off.mean) / off.stddev;
            features[i].duration_z =
                (members.size() < 2 || dur.stddev == 0.0) ? 0.0 : (durations[k] - dur.mean) / dur.stddev;
        }
    }
    return features;
}

DatasetSplit split_dataset(const std::vector<Conversation>& convs, std::uint64_t seed) {
    if (convs.size() < 10) {
        throw Error("dataset split needs at least 10 conversations, got " +
                    std::to_string(convs.size()) + "; add more data");
    }
    std::vector<std::size_t> order(convs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    const std::size_t n = convs.size();
    const std::size_t n_val = n / 10;
    const std::size_t n_test = n / 10;
    const std::size_t n_train = n - n_val - n_test;

    DatasetSplit split;
    for (std::size_t k = 0; k < n; ++k) {
        const Conversation& c = convs[order[k]];
        if (k < n_train) split.train.push_back(c);
        else if (k < n_train + n_val) split.validation.push_back(c);
        else split.test.push_back(c);
    }
    return split;
}

ClassDistribution class_distribution(const std::vector<Conversation>& convs) {
    ClassDistribution dist;
    for (const Conversation& conv : convs) {
        for (const Token& t : conv.tokens) {
            if (!t.label) {
                throw Error("conversation '" + conv.id + "' contains an unlabeled token ('" +
                            t.text + "')");
            }
            ++dist.counts[static_cast<int>(*t.label)];
            ++dist.total;
        }
    }
    if (dist.total > 0) {
        for (int c = 0; c < kNumClasses; ++c) {
            dist.percentages[c] = 100.0 * static_cast<double>(dist.counts[c]) /
                                  static_cast<double>(dist.total);
        }
    }
    return dist;
}

}  // namespace punct

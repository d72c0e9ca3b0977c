#include <doctest.h>

#include <cmath>
#include <sstream>

#include "punct/corpus.hpp"
#include "punct/error.hpp"
#include "punct/rng.hpp"

using namespace punct;

namespace {

Conversation parse(const std::string& text) {
    std::istringstream in(text);
    return parse_time_annotated(in, "test");
}

std::vector<std::pair<std::string, PunctuationClass>> parse_punct(const std::string& text) {
    std::istringstream in(text);
    return parse_punctuated(in);
}

Conversation random_conversation(Rng& rng, std::size_t n_tokens) {
    Conversation conv;
    conv.id = "rand";
    double clock[2] = {0.0, 0.15};
    for (std::size_t i = 0; i < n_tokens; ++i) {
        int s = static_cast<int>(rng.below(2));
        Token t;
        t.side = s == 0 ? Side::A : Side::B;
        t.text = "w" + std::to_string(rng.below(20));
        t.duration = rng.uniform(0.1, 0.6);
        t.start = clock[s];
        clock[s] += t.duration + rng.uniform(0.02, 0.5);
        conv.tokens.push_back(t);
    }
    std::stable_sort(conv.tokens.begin(), conv.tokens.end(),
                     [](const Token& a, const Token& b) { return a.start < b.start; });
    return conv;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("sorted input stays sorted") {
    Conversation conv = parse("0.0\t0.4\tA\thi\n0.5\t0.3\tB\thello\n");
    REQUIRE(conv.tokens.size() == 2);
    CHECK(conv.tokens[0].text == "hi");
    CHECK(conv.tokens[0].side == Side::A);
    CHECK(conv.tokens[1].text == "hello");
}

TEST_CASE("tokens merge in start-time order across sides") {
    Conversation conv = parse("1.2\t0.4\tA\tlate\n0.8\t0.3\tB\tearly\n");
    REQUIRE(conv.tokens.size() == 2);
    CHECK(conv.tokens[0].text == "early");
    CHECK(conv.tokens[0].side == Side::B);
    CHECK(conv.tokens[1].text == "late");
}

TEST_CASE("start-time ties put side A first") {
    Conversation conv = parse("1.0\t0.4\tB\tbee\n1.0\t0.3\tA\taye\n");
    CHECK(conv.tokens[0].side == Side::A);
    CHECK(conv.tokens[1].side == Side::B);
}

TEST_CASE("comment lines and blank lines are ignored") {
    Conversation conv = parse("# header\n\n0.0\t0.4\tA\thi\n");
    CHECK(conv.tokens.size() == 1);
}

TEST_CASE("malformed lines fail with the line number") {
    CHECK_THROWS_WITH_AS(parse("0.0\t0.4\tC\thi\n"), doctest::Contains("invalid side"), ParseError);
    CHECK_THROWS_WITH_AS(parse("0.0\t0.4\tA\n"), doctest::Contains("line 1"), ParseError);
    CHECK_THROWS_WITH_AS(parse("0.0\txyz\tA\thi\n"), doctest::Contains("non-numeric"), ParseError);
    CHECK_THROWS_WITH_AS(parse("0.0\t-0.1\tA\thi\n"), doctest::Contains("negative duration"),
                         ParseError);
    CHECK_THROWS_WITH_AS(parse("0.0\t0.4\tA\thi\n0.5\t0.1\tD\tho\n"), doctest::Contains("line 2"),
                         ParseError);
}

TEST_CASE("token text is normalized") {
    Conversation conv = parse("0.0\t0.4\tA\tHello,\n");
    CHECK(conv.tokens[0].text == "hello");
    CHECK(normalize_word("don't") == "don't");
    CHECK(normalize_word("--").empty());
    CHECK(normalize_word("\"Quoted.\"") == "quoted");
}

TEST_CASE("punctuated parsing maps marks to classes") {
    auto words = parse_punct("Hello, how are you?");
    REQUIRE(words.size() == 4);
    CHECK(words[0] == std::pair<std::string, PunctuationClass>{"hello", PunctuationClass::Comma});
    CHECK(words[1].second == PunctuationClass::Blank);
    CHECK(words[2].second == PunctuationClass::Blank);
    CHECK(words[3] == std::pair<std::string, PunctuationClass>{"you", PunctuationClass::Question});
}

TEST_CASE("non-target marks become blanks") {
    auto words = parse_punct("Stop!");
    REQUIRE(words.size() == 1);
    CHECK(words[0].first == "stop");
    CHECK(words[0].second == PunctuationClass::Blank);
    CHECK(parse_punct("well...")[0].second == PunctuationClass::Blank);
    CHECK(parse_punct("so;")[0].second == PunctuationClass::Blank);
    CHECK(parse_punct("what?!")[0].second == PunctuationClass::Blank);
}

TEST_CASE("repeated sentences keep their periods") {
    auto words = parse_punct("ok. ok.");
    REQUIRE(words.size() == 2);
    CHECK(words[0].second == PunctuationClass::Period);
    CHECK(words[1].second == PunctuationClass::Period);
}

TEST_CASE("empty input gives an empty sequence") { CHECK(parse_punct("").empty()); }

TEST_CASE("round-trip re-rendering reproduces lowercase text") {
    const std::string original = "yeah, i think so. do you want the report? fine.";
    auto words = parse_punct(original);
    std::string rendered;
    for (const auto& [word, cls] : words) {
        if (!rendered.empty()) rendered += ' ';
        rendered += word;
        rendered += class_mark(cls);
    }
    CHECK(rendered == original);
}

TEST_CASE("labeled dataset round-trips") {
    Conversation conv = parse("0.0\t0.4\tA\thi\n0.5\t0.3\tB\tthere\n");
    conv.tokens[0].label = PunctuationClass::Blank;
    conv.tokens[1].label = PunctuationClass::Period;
    std::ostringstream out;
    write_labeled(conv, out);
    std::istringstream in(out.str());
    Conversation back = load_labeled(in, "test");
    REQUIRE(back.tokens.size() == 2);
    CHECK(back.tokens[0].text == "hi");
    CHECK(back.tokens[0].start == 0.0);
    CHECK(back.tokens[1].label == PunctuationClass::Period);
    CHECK(back.tokens[1].side == Side::B);
}

TEST_CASE("z-scored offsets match the hand computation") {
    // raw offsets come out as {0.0, 0.2, 0.4}
    Conversation conv = parse("0.0\t1.0\tA\tone\n1.2\t1.0\tA\ttwo\n2.6\t1.0\tA\tthree\n");
    auto feats = timing_features(conv);
    REQUIRE(feats.size() == 3);
    const double z = 1.224744871391589;  // sqrt(3/2)
    CHECK(feats[0].offset == doctest::Approx(-z).epsilon(1e-9));
    CHECK(feats[1].offset == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(feats[2].offset == doctest::Approx(z).epsilon(1e-9));
}

TEST_CASE("constant durations give all-zero duration z-scores") {
    Conversation conv = parse("0.0\t0.5\tA\ta\n1.0\t0.5\tA\tb\n2.0\t0.5\tA\tc\n");
    for (const TimingFeatures& f : timing_features(conv)) CHECK(f.duration_z == 0.0);
}

TEST_CASE("singleton speaker groups standardize to zero") {
    Conversation conv = parse("0.0\t0.5\tA\ta\n1.0\t0.7\tB\tb\n2.0\t0.9\tA\tc\n");
    auto feats = timing_features(conv);
    CHECK(feats[1].offset == 0.0);
    CHECK(feats[1].duration_z == 0.0);
}

TEST_CASE("each speaker group has mean 0 and population std 1") {
    Rng rng(555);
    for (int trial = 0; trial < 30; ++trial) {
        Conversation conv = random_conversation(rng, 40);
        auto feats = timing_features(conv);
        for (Side side : {Side::A, Side::B}) {
            std::vector<double> offsets, durations;
            for (std::size_t i = 0; i < conv.tokens.size(); ++i) {
                if (conv.tokens[i].side != side) continue;
                offsets.push_back(feats[i].offset);
                durations.push_back(feats[i].duration_z);
            }
            if (offsets.size() < 2) continue;
            for (const std::vector<double>* group : {&offsets, &durations}) {
                double mean = 0.0;
                for (double v : *group) mean += v;
                mean /= static_cast<double>(group->size());
                double var = 0.0;
                for (double v : *group) var += (v - mean) * (v - mean);
                var /= static_cast<double>(group->size());
                CHECK(std::abs(mean) < 1e-6);
                CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-6);
            }
        }
    }
}

TEST_CASE("offset source flag switches between merged and per-speaker gaps") {
    Conversation conv = parse(
        "0.0\t0.5\tA\ta1\n"
        "5.0\t0.5\tB\tb1\n"
        "10.0\t0.5\tA\ta2\n"
        "11.0\t0.5\tA\ta3\n");
    auto merged = timing_features(conv, TimingOptions{false});
    auto within = timing_features(conv, TimingOptions{true});
    // merged: a2's gap counts from b1's end; within-speaker: from a1's end
    CHECK(merged[2].offset != within[2].offset);
}

TEST_CASE("dataset split sizes follow the remainder-to-train rule") {
    std::vector<Conversation> convs(10);
    for (std::size_t i = 0; i < convs.size(); ++i) convs[i].id = "c" + std::to_string(i);
    DatasetSplit split = split_dataset(convs, 1);
    CHECK(split.train.size() == 8);
    CHECK(split.validation.size() == 1);
    CHECK(split.test.size() == 1);

    convs.resize(12);
    for (std::size_t i = 0; i < convs.size(); ++i) convs[i].id = "c" + std::to_string(i);
    split = split_dataset(convs, 1);
    CHECK(split.train.size() == 10);
    CHECK(split.validation.size() == 1);
    CHECK(split.test.size() == 1);
}

TEST_CASE("split is deterministic, disjoint, and exhaustive") {
    std::vector<Conversation> convs(23);
    for (std::size_t i = 0; i < convs.size(); ++i) convs[i].id = "c" + std::to_string(i);
    DatasetSplit first = split_dataset(convs, 99);
    DatasetSplit second = split_dataset(convs, 99);
    auto ids = [](const std::vector<Conversation>& cs) {
        std::vector<std::string> out;
        for (const Conversation& c : cs) out.push_back(c.id);
        return out;
    };
    CHECK(ids(first.train) == ids(second.train));
    CHECK(ids(first.validation) == ids(second.validation));
    CHECK(ids(first.test) == ids(second.test));

    std::vector<std::string> all = ids(first.train);
    for (const auto& id : ids(first.validation)) all.push_back(id);
    for (const auto& id : ids(first.test)) all.push_back(id);
    std::sort(all.begin(), all.end());
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    CHECK(all.size() == convs.size());

    DatasetSplit other_seed = split_dataset(convs, 100);
    CHECK(ids(first.train) != ids(other_seed.train));
}

TEST_CASE("split rejects fewer than 10 conversations") {
    std::vector<Conversation> convs(9);
    CHECK_THROWS_WITH_AS(split_dataset(convs, 1), doctest::Contains("more data"), Error);
}

TEST_CASE("class distribution counts and percentages") {
    Conversation conv;
    conv.id = "d";
    for (PunctuationClass c : {PunctuationClass::Blank, PunctuationClass::Blank,
                               PunctuationClass::Period, PunctuationClass::Question}) {
        conv.tokens.push_back({"w", Side::A, 0.0, 0.1, c});
    }
    ClassDistribution dist = class_distribution({conv});
    CHECK(dist.total == 4);
    CHECK(dist.counts[static_cast<int>(PunctuationClass::Blank)] == 2);
    CHECK(dist.percentages[static_cast<int>(PunctuationClass::Blank)] == doctest::Approx(50.0));
    CHECK(dist.percentages[static_cast<int>(PunctuationClass::Period)] == doctest::Approx(25.0));
    CHECK(dist.percentages[static_cast<int>(PunctuationClass::Question)] == doctest::Approx(25.0));
    CHECK(dist.percentages[static_cast<int>(PunctuationClass::Comma)] == doctest::Approx(0.0));
    double sum = 0.0;
    for (double p : dist.percentages) sum += p;
    CHECK(sum == doctest::Approx(100.0).epsilon(0.002));
}

TEST_CASE("class distribution rejects unlabeled tokens") {
    Conversation conv;
    conv.id = "d";
    conv.tokens.push_back({"w", Side::A, 0.0, 0.1, std::nullopt});
    CHECK_THROWS_AS(class_distribution({conv}), Error);
}

}  // TEST_SUITE

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "punct/cooc.hpp"
#include "punct/error.hpp"
#include "punct/rng.hpp"

using namespace punct;

namespace {

Conversation conv_of(const std::vector<std::string>& words) {
    Conversation conv;
    conv.id = "c";
    double start = 0.0;
    for (const std::string& w : words) {
        conv.tokens.push_back({w, Side::A, start, 0.2, PunctuationClass::Blank});
        start += 0.3;
    }
    return conv;
}

std::vector<Conversation> random_corpus(Rng& rng, std::size_t n_convs) {
    std::vector<Conversation> convs;
    for (std::size_t c = 0; c < n_convs; ++c) {
        std::vector<std::string> words(5 + rng.below(40));
        for (auto& w : words) w = "w" + std::to_string(rng.below(12));
        convs.push_back(conv_of(words));
        convs.back().id = "c" + std::to_string(c);
    }
    return convs;
}

}  // namespace

TEST_SUITE("cooc") {

TEST_CASE("vocabulary ranks by frequency then lexicographically") {
    auto convs = std::vector<Conversation>{conv_of({"a", "a", "b"})};
    Vocabulary vocab = Vocabulary::build(convs, 10, 1);
    REQUIRE(vocab.size() == 2);
    CHECK(vocab.entries()[0] == Vocabulary::Entry{"a", 2});
    CHECK(vocab.entries()[1] == Vocabulary::Entry{"b", 1});
    CHECK(vocab.index_of("a") == 0);
    CHECK(vocab.index_of("b") == 1);
    CHECK(!vocab.index_of("missing").has_value());
}

TEST_CASE("min_count filters and max_size truncates") {
    auto convs = std::vector<Conversation>{conv_of({"a", "a", "b"})};
    Vocabulary vocab = Vocabulary::build(convs, 10, 2);
    REQUIRE(vocab.size() == 1);
    CHECK(vocab.entries()[0].first == "a");

    auto tied = std::vector<Conversation>{conv_of({"z", "y", "x"})};
    Vocabulary lex = Vocabulary::build(tied, 2, 1);
    REQUIRE(lex.size() == 2);
    CHECK(lex.entries()[0].first == "x");
    CHECK(lex.entries()[1].first == "y");
}

TEST_CASE("empty corpus is an error") {
    std::vector<Conversation> empty;
    CHECK_THROWS_AS(Vocabulary::build(empty, 10, 1), Error);
}

TEST_CASE("vocabulary file round-trips") {
    auto convs = std::vector<Conversation>{conv_of({"a", "a", "b", "c", "c", "c"})};
    Vocabulary vocab = Vocabulary::build(convs, 10, 1);
    std::ostringstream out;
    vocab.save(out);
    std::istringstream in(out.str());
    Vocabulary back = Vocabulary::load(in);
    CHECK(back.entries() == vocab.entries());
}

TEST_CASE("adjacent pair counts 1") {
    auto convs = std::vector<Conversation>{conv_of({"a", "b"})};
    Vocabulary vocab = Vocabulary::build(convs, 10, 1);
    CoocMatrix x = build_cooc(convs, vocab, 1);
    std::size_t ia = *vocab.index_of("a"), ib = *vocab.index_of("b");
    CHECK(x.at(ia, ib) == 1.0);
    CHECK(x.at(ib, ia) == 1.0);
    CHECK(x.nnz_upper() == 1);
}

TEST_CASE("harmonic weighting by distance") {
    auto convs = std::vector<Conversation>{conv_of({"a", "c", "b"})};
    Vocabulary vocab = Vocabulary::build(convs, 10, 1);
    CoocMatrix x = build_cooc(convs, vocab, 2);
    auto at = [&](const char* u, const char* v) {
        return x.at(*vocab.index_of(u), *vocab.index_of(v));
    };
    CHECK(at("a", "b") == 0.5);
    CHECK(at("a", "c") == 1.0);
    CHECK(at("c", "b") == 1.0);
}

TEST_CASE("windows never cross conversation boundaries") {
    std::vector<Conversation> convs = {conv_of({"a"}), conv_of({"b"})};
    convs[1].id = "c2";
    Vocabulary vocab = Vocabulary::build(convs, 10, 1);
    CoocMatrix x = build_cooc(convs, vocab, 5);
    CHECK(x.entries().empty());
}

TEST_CASE("repeated words do not touch the diagonal") {
    auto convs = std::vector<Conversation>{conv_of({"a", "a"})};
    Vocabulary vocab = Vocabulary::build(convs, 10, 1);
    CoocMatrix x = build_cooc(convs, vocab, 2);
    CHECK(x.at(0, 0) == 0.0);
    CHECK(x.entries().empty());
}

TEST_CASE("out-of-vocabulary tokens contribute nothing but keep distances") {
    auto convs = std::vector<Conversation>{conv_of({"a", "rare", "b"})};
    Vocabulary vocab = Vocabulary::from_counts({{"a", 5}, {"b", 5}}, 10, 1);
    CoocMatrix x = build_cooc(convs, vocab, 2);
    // a..b are two positions apart, so the weight is 1/2
    CHECK(x.at(*vocab.index_of("a"), *vocab.index_of("b")) == 0.5);
}

TEST_CASE("matrix is symmetric and strictly positive") {
    Rng rng(31);
    auto convs = random_corpus(rng, 6);
    Vocabulary vocab = Vocabulary::build(convs, 50, 1);
    CoocMatrix x = build_cooc(convs, vocab, 10);
    for (const CoocEntry& e : x.entries()) {
        CHECK(e.i != e.j);
        CHECK(e.value > 0.0);
        CHECK(x.at(e.j, e.i) == doctest::Approx(e.value).epsilon(1e-9));
    }
}

TEST_CASE("sharded counting merges to the whole-corpus matrix") {
    Rng rng(77);
    auto convs = random_corpus(rng, 9);
    Vocabulary vocab = Vocabulary::build(convs, 50, 1);
    CoocMatrix whole = build_cooc(convs, vocab, 8);

    CoocBuilder merged(vocab.size());
    for (std::size_t shard = 0; shard < 3; ++shard) {
        CoocBuilder builder(vocab.size());
        for (std::size_t c = shard; c < convs.size(); c += 3) {
            builder.add_conversation(convs[c], vocab, 8);
        }
        merged.merge(builder);
    }
    CoocMatrix combined = merged.finish();
    REQUIRE(combined.entries().size() == whole.entries().size());
    for (const CoocEntry& e : whole.entries()) {
        CHECK(combined.at(e.i, e.j) == doctest::Approx(e.value).epsilon(1e-9));
    }
}

TEST_CASE("total mass is twice the harmonic pair sum") {
    Rng rng(123);
    auto convs = random_corpus(rng, 4);
    Vocabulary vocab = Vocabulary::build(convs, 50, 1);
    const std::size_t window = 7;
    CoocMatrix x = build_cooc(convs, vocab, window);

    double pair_sum = 0.0;  // direct one-pass count over the corpus
    for (const Conversation& conv : convs) {
        for (std::size_t p = 0; p < conv.tokens.size(); ++p) {
            if (!vocab.index_of(conv.tokens[p].text)) continue;
            for (std::size_t q = p + 1; q < std::min(conv.tokens.size(), p + window + 1); ++q) {
                if (!vocab.index_of(conv.tokens[q].text)) continue;
                if (conv.tokens[p].text == conv.tokens[q].text) continue;
                pair_sum += 1.0 / static_cast<double>(q - p);
            }
        }
    }
    double mass = 0.0;
    for (const CoocEntry& e : x.entries()) mass += e.value;
    CHECK(mass == doctest::Approx(2.0 * pair_sum).epsilon(1e-9));
}

TEST_CASE("removing a vocabulary word zeroes exactly its row and column") {
    Rng rng(2024);
    auto convs = random_corpus(rng, 5);
    Vocabulary full = Vocabulary::build(convs, 50, 1);
    const std::string removed = full.entries()[1].first;
    std::vector<Vocabulary::Entry> remaining;
    for (const auto& e : full.entries()) {
        if (e.first != removed) remaining.push_back(e);
    }
    Vocabulary reduced = Vocabulary::from_counts(remaining, 50, 1);
    CoocMatrix x_full = build_cooc(convs, full, 6);
    CoocMatrix x_reduced = build_cooc(convs, reduced, 6);

    // compare entries keyed by token pair
    for (const CoocEntry& e : x_full.entries()) {
        const std::string& ti = full.entries()[e.i].first;
        const std::string& tj = full.entries()[e.j].first;
        if (ti == removed || tj == removed) continue;
        CHECK(x_reduced.at(*reduced.index_of(ti), *reduced.index_of(tj)) ==
              doctest::Approx(e.value).epsilon(1e-9));
    }
    for (const CoocEntry& e : x_reduced.entries()) {
        const std::string& ti = reduced.entries()[e.i].first;
        const std::string& tj = reduced.entries()[e.j].first;
        CHECK(x_full.at(*full.index_of(ti), *full.index_of(tj)) ==
              doctest::Approx(e.value).epsilon(1e-9));
    }
}

TEST_CASE("snapshot file round-trips") {
    Rng rng(9);
    auto convs = random_corpus(rng, 4);
    Vocabulary vocab = Vocabulary::build(convs, 50, 1);
    CoocMatrix x = build_cooc(convs, vocab, 5);
    std::ostringstream out;
    x.save(out);
    std::istringstream in(out.str());
    CoocMatrix back = CoocMatrix::load(in);
    CHECK(back.vocab_size() == x.vocab_size());
    REQUIRE(back.entries().size() == x.entries().size());
    for (std::size_t k = 0; k < x.entries().size(); ++k) {
        CHECK(back.entries()[k].i == x.entries()[k].i);
        CHECK(back.entries()[k].j == x.entries()[k].j);
        CHECK(back.entries()[k].value == x.entries()[k].value);  // full precision
    }
}

TEST_CASE("snapshot loading validates the header") {
    std::istringstream bad_magic("NOPE v1 3 0\n");
    CHECK_THROWS_AS(CoocMatrix::load(bad_magic), ParseError);
    std::istringstream bad_count("COOC v1 3 5\n0\t1\t1.0\n");
    CHECK_THROWS_AS(CoocMatrix::load(bad_count), ParseError);
    std::istringstream bad_index("COOC v1 3 1\n0\t9\t1.0\n");
    CHECK_THROWS_AS(CoocMatrix::load(bad_index), ParseError);
}

}  // TEST_SUITE

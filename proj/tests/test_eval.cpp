#include <doctest.h>

#include <sstream>

#include "punct/error.hpp"
#include "punct/eval.hpp"
#include "punct/rng.hpp"

using namespace punct;

namespace {

constexpr auto B = PunctuationClass::Blank;
constexpr auto P = PunctuationClass::Period;
constexpr auto Q = PunctuationClass::Question;
constexpr auto C = PunctuationClass::Comma;

std::vector<PunctuationClass> random_classes(Rng& rng, std::size_t n) {
    std::vector<PunctuationClass> out(n);
    for (auto& c : out) c = static_cast<PunctuationClass>(rng.below(4));
    return out;
}

// percentages from Table-style rows scaled to integer counts
ConfusionMatrix matrix_from_rows(const std::array<std::array<double, 4>, 4>& rows) {
    ConfusionMatrix m;
    for (int a = 0; a < 4; ++a) {
        for (int p = 0; p < 4; ++p) {
            m.counts[a][p] = static_cast<std::uint64_t>(rows[a][p] * 10.0 + 0.5);
        }
    }
    return m;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("perfect predictions score one everywhere") {
    std::vector<PunctuationClass> seq = {B, P, Q, C, B, B, P};
    auto [metrics, confusion] = score(seq, seq);
    for (int c = 0; c < kNumClasses; ++c) {
        CHECK(metrics.precision[c] == 1.0);
        CHECK(metrics.recall[c] == 1.0);
        CHECK(metrics.f1[c] == 1.0);
    }
    CHECK(metrics.accuracy == 1.0);
    for (int a = 0; a < kNumClasses; ++a) {
        for (int p = 0; p < kNumClasses; ++p) {
            if (a != p) CHECK(confusion.counts[a][p] == 0);
        }
    }
}

TEST_CASE("the four-token worked example") {
    std::vector<PunctuationClass> golds = {P, P, Q, B};
    std::vector<PunctuationClass> preds = {P, B, Q, B};
    auto [metrics, confusion] = score(preds, golds);

    const int period = static_cast<int>(P);
    CHECK(metrics.precision[period] == doctest::Approx(1.0).epsilon(5e-4));
    CHECK(metrics.recall[period] == doctest::Approx(0.5).epsilon(5e-4));
    CHECK(metrics.f1[period] == doctest::Approx(2.0 / 3.0).epsilon(5e-4));

    const int question = static_cast<int>(Q);
    CHECK(metrics.precision[question] == 1.0);
    CHECK(metrics.recall[question] == 1.0);
    CHECK(metrics.f1[question] == 1.0);

    const int blank = static_cast<int>(B);
    CHECK(metrics.precision[blank] == doctest::Approx(0.5).epsilon(5e-4));
    CHECK(metrics.recall[blank] == 1.0);
    CHECK(metrics.f1[blank] == doctest::Approx(2.0 / 3.0).epsilon(5e-4));

    const int comma = static_cast<int>(C);
    CHECK(metrics.precision[comma] == 0.0);
    CHECK(metrics.support[comma] == 0);

    // hand-enumerated confusion counts
    CHECK(confusion.counts[static_cast<int>(P)][static_cast<int>(P)] == 1);
    CHECK(confusion.counts[static_cast<int>(P)][static_cast<int>(B)] == 1);
    CHECK(confusion.counts[static_cast<int>(Q)][static_cast<int>(Q)] == 1);
    CHECK(confusion.counts[static_cast<int>(B)][static_cast<int>(B)] == 1);
    CHECK(confusion.total() == 4);
    CHECK(metrics.accuracy == doctest::Approx(0.75));
}

TEST_CASE("length mismatch is a contract violation") {
    std::vector<PunctuationClass> a = {B, P};
    std::vector<PunctuationClass> b = {B};
    CHECK_THROWS_AS(score(a, b), ContractError);
}

TEST_CASE("micro accuracy equals the confusion diagonal over the total") {
    Rng rng(801);
    auto golds = random_classes(rng, 500);
    auto preds = random_classes(rng, 500);
    auto [metrics, confusion] = score(preds, golds);
    std::uint64_t diag = 0;
    for (int c = 0; c < kNumClasses; ++c) diag += confusion.counts[c][c];
    CHECK(metrics.accuracy ==
          doctest::Approx(static_cast<double>(diag) / static_cast<double>(confusion.total())));
}

TEST_CASE("metrics from the confusion matrix agree with the direct path exactly") {
    Rng rng(802);
    for (int trial = 0; trial < 20; ++trial) {
        auto golds = random_classes(rng, 200);
        auto preds = random_classes(rng, 200);
        auto [direct, confusion] = score(preds, golds);
        ClassMetrics via_matrix = metrics_from_confusion(confusion);
        for (int c = 0; c < kNumClasses; ++c) {
            CHECK(direct.precision[c] == via_matrix.precision[c]);
            CHECK(direct.recall[c] == via_matrix.recall[c]);
            CHECK(direct.f1[c] == via_matrix.f1[c]);
            CHECK(direct.support[c] == via_matrix.support[c]);
        }
        CHECK(direct.accuracy == via_matrix.accuracy);
    }
}

TEST_CASE("permuting the evaluated pairs changes nothing") {
    Rng rng(803);
    auto golds = random_classes(rng, 300);
    auto preds = random_classes(rng, 300);
    auto [before, confusion_before] = score(preds, golds);

    std::vector<std::size_t> order(300);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<PunctuationClass> pg(300), pp(300);
    for (std::size_t i = 0; i < order.size(); ++i) {
        pg[i] = golds[order[i]];
        pp[i] = preds[order[i]];
    }
    auto [after, confusion_after] = score(pp, pg);
    for (int c = 0; c < kNumClasses; ++c) {
        CHECK(before.precision[c] == after.precision[c]);
        CHECK(before.recall[c] == after.recall[c]);
        CHECK(before.f1[c] == after.f1[c]);
    }
    CHECK(confusion_before.counts == confusion_after.counts);
}

TEST_CASE("row percentages of non-empty rows sum to 100") {
    Rng rng(804);
    auto golds = random_classes(rng, 400);
    auto preds = random_classes(rng, 400);
    auto [metrics, confusion] = score(preds, golds);
    auto pct = confusion.row_percentages();
    for (int a = 0; a < kNumClasses; ++a) {
        double row_sum = 0.0;
        std::uint64_t count_sum = 0;
        for (int p = 0; p < kNumClasses; ++p) {
            row_sum += pct[a][p];
            count_sum += confusion.counts[a][p];
        }
        if (count_sum > 0) CHECK(row_sum == doctest::Approx(100.0).epsilon(1e-3));
    }
}

TEST_CASE("identical confusion matrices have zero deltas") {
    ConfusionMatrix m = matrix_from_rows({{{95.8, 1.4, 0.2, 2.6},
                                           {32.2, 58.7, 1.5, 7.6},
                                           {23.7, 21.0, 49.0, 6.3},
                                           {37.8, 6.5, 0.6, 55.0}}});
    for (double d : compare_confusions(m, m)) CHECK(d == 0.0);
}

TEST_CASE("diagonal deltas recover the published improvements") {
    // baseline vs retrofitted confusion rows; the published rows are rounded
    // to one decimal, so deltas are compared at that resolution
    ConfusionMatrix baseline = matrix_from_rows({{{95.8, 1.4, 0.2, 2.6},
                                                  {32.2, 58.7, 1.5, 7.6},
                                                  {23.7, 21.0, 49.0, 6.3},
                                                  {37.8, 6.5, 0.6, 55.0}}});
    ConfusionMatrix retrofitted = matrix_from_rows({{{95.6, 1.1, 0.1, 2.8},
                                                     {21.2, 67.7, 1.5, 9.6},
                                                     {19.9, 18.4, 55.2, 6.4},
                                                     {31.1, 6.6, 0.4, 61.9}}});
    auto deltas = compare_confusions(baseline, retrofitted);
    CHECK(deltas[static_cast<int>(P)] == doctest::Approx(9.0).epsilon(0.02));
    CHECK(deltas[static_cast<int>(Q)] == doctest::Approx(6.2).epsilon(0.02));
    CHECK(deltas[static_cast<int>(C)] == doctest::Approx(6.9).epsilon(0.02));

    auto swapped = compare_confusions(retrofitted, baseline);
    for (int c = 0; c < kNumClasses; ++c) {
        CHECK(swapped[c] == doctest::Approx(-deltas[c]).epsilon(1e-12));
    }
}

TEST_CASE("similarity report rows and increase count") {
    EmbeddingTable original(2), retrofitted(2);
    original.insert("x", {1.0, 0.0});
    original.insert("y", {0.0, 1.0});
    retrofitted.insert("x", {1.0, 0.0});
    retrofitted.insert("y", {1.0, 0.5});
    std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> pairs = {
        {{"x"}, {"x"}}, {{"x"}, {"y"}}};
    SimilarityReport report = similarity_report(pairs, original, retrofitted);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].cosine_original == doctest::Approx(1.0));
    CHECK(report.rows[0].cosine_retrofitted == doctest::Approx(1.0));
    CHECK(report.rows[1].cosine_original == doctest::Approx(0.0));
    CHECK(report.rows[1].cosine_retrofitted > 0.0);
    CHECK(report.increased == 1);

    pairs.push_back({{"x"}, {"missing"}});
    CHECK_THROWS_WITH_AS(similarity_report(pairs, original, retrofitted),
                         doctest::Contains("missing"), Error);
}

TEST_CASE("report writers produce parsable output") {
    std::vector<PunctuationClass> golds = {P, P, Q, B, C, C, B, B};
    std::vector<PunctuationClass> preds = {P, B, Q, B, C, B, B, P};
    auto [metrics, confusion] = score(preds, golds);

    std::ostringstream machine;
    write_metrics(metrics, machine);
    std::istringstream lines(machine.str());
    std::string line;
    int rows = 0;
    bool saw_accuracy = false;
    while (std::getline(lines, line)) {
        if (line.rfind("accuracy\t", 0) == 0) saw_accuracy = true;
        ++rows;
    }
    CHECK(rows == kNumClasses + 1);
    CHECK(saw_accuracy);

    std::ostringstream conf;
    write_confusion(confusion, conf);
    std::istringstream conf_lines(conf.str());
    int conf_rows = 0;
    while (std::getline(conf_lines, line)) {
        ++conf_rows;
        int tabs = 0;
        for (char ch : line) tabs += ch == '\t';
        CHECK(tabs == 3);
    }
    CHECK(conf_rows == kNumClasses);

    std::ostringstream human;
    write_report(metrics, confusion, human);
    CHECK(human.str().find("accuracy") != std::string::npos);
}

}  // TEST_SUITE

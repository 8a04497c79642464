#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sylcap/metrics.hpp"
#include "oracles.hpp"

using Catch::Matchers::WithinAbs;
using sylcap::TokenSequence;
namespace m = sylcap::metrics;

namespace {

std::string join(const TokenSequence& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

} // namespace

TEST_CASE("bleu hand anchors") {
    REQUIRE(m::bleu({"a", "b", "c", "d"}, {"a", "b", "x", "d"}, 1) == 0.75);
    REQUIRE_THAT(m::bleu({"a", "a"}, {"a", "b", "c"}, 1),
                 WithinAbs(0.5 * std::exp(1.0 - 3.0 / 2.0), 1e-12));
    REQUIRE(m::bleu({"x", "y"}, {"x", "y"}, 1) == 1.0);
    REQUIRE(m::bleu({"p", "q"}, {"r", "s"}, 1) == 0.0);
    REQUIRE(m::bleu({}, {"a"}, 4) == 0.0);
    // A three-token hypothesis has no 4-grams, so BLEU-4 collapses to zero.
    REQUIRE(m::bleu({"a", "b", "c"}, {"a", "b", "c"}, 4) == 0.0);
}

TEST_CASE("bleu clipping caps repeated hypothesis tokens") {
    // "the the the" against a reference with two "the": clipped count 2 of 3.
    double got = m::bleu({"the", "the", "the"}, {"the", "cat", "the"}, 1);
    REQUIRE_THAT(got, WithinAbs(2.0 / 3.0, 1e-12));
}

TEST_CASE("bleu rejects bad arguments") {
    REQUIRE_THROWS_AS(m::bleu({"a"}, {}, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(m::bleu({"a"}, {"a"}, 0), std::invalid_argument);
}

TEST_CASE("meteor hand anchors") {
    REQUIRE(m::meteor_exact({"w", "x", "y", "z"}, {"w", "x", "y", "z"}) == 0.9921875);
    REQUIRE(m::meteor_exact({"a", "b"}, {"c", "d"}) == 0.0);
    REQUIRE(m::meteor_exact({}, {"a"}) == 0.0);
    // Unique tokens force the alignment: three chunks, penalty 0.5.
    REQUIRE_THAT(m::meteor_exact({"a", "c", "b"}, {"a", "b", "c"}), WithinAbs(0.5, 1e-12));
    REQUIRE_THROWS_AS(m::meteor_exact({"a"}, {}), std::invalid_argument);
}

TEST_CASE("meteor prefers the alignment with fewer chunks") {
    // hyp "a b a", ref "a b a": the identity alignment gives one chunk even
    // though "a" could cross-match the other occurrence.
    TokenSequence seq{"a", "b", "a"};
    double got = m::meteor_exact(seq, seq);
    double f = 1.0;
    double penalty = 0.5 * std::pow(1.0 / 3.0, 3);
    REQUIRE_THAT(got, WithinAbs(f * (1.0 - penalty), 1e-12));
}

TEST_CASE("chrf hand anchors") {
    REQUIRE(m::chrf("abcd", "abcd") == 100.0);
    REQUIRE(m::chrf("abc", "xyz") == 0.0);
    REQUIRE_THAT(m::chrf("abcd", "abed", {2, 2.0}),
                 WithinAbs(oracle::chrf("abcd", "abed", 2, 2.0), 1e-9));
    REQUIRE_THROWS_AS(m::chrf("abc", "   ", {}), std::invalid_argument);
    REQUIRE_THROWS_AS(m::chrf("abc", "abc", {0, 2.0}), std::invalid_argument);
}

TEST_CASE("chrf ignores whitespace placement") {
    double base = m::chrf("abcd", "abcd");
    REQUIRE(m::chrf("ab cd", "abcd") == base);
    REQUIRE(m::chrf("abcd", "a b\tc\nd") == base);
    REQUIRE(m::chrf(" a bc d ", "ab  cd") == base);
}

TEST_CASE("chrf skips orders longer than the reference") {
    // Two-character reference: only orders 1 and 2 enter the average even
    // though max_n stays 6.
    double got = m::chrf("ab", "ab");
    REQUIRE(got == 100.0);
    double partial = m::chrf("ab", "ax");
    REQUIRE(partial > 0.0);
    REQUIRE(partial < 100.0);
}

TEST_CASE("score_sentence composes the four metrics") {
    auto s = m::score_sentence("তুমি ভাত খাও", "তুমি ভাত খাও");
    REQUIRE(s.bleu1 == 1.0);
    REQUIRE(s.bleu4 == 0.0); // only three tokens, no 4-grams
    REQUIRE_THAT(s.meteor, WithinAbs(1.0 - 0.5 / 27.0, 1e-12));
    REQUIRE(s.chrf == 100.0);

    auto d = m::score_sentence("ক খ", "গ ঘ");
    REQUIRE(d.bleu1 == 0.0);
    REQUIRE(d.bleu4 == 0.0);
    REQUIRE(d.meteor == 0.0);
    REQUIRE(d.chrf == 0.0);

    auto four = m::score_sentence("w x y z", "w x y z");
    REQUIRE(four.bleu1 == 1.0);
    REQUIRE(four.bleu4 == 1.0);
    REQUIRE(four.meteor == 0.9921875);
}

TEST_CASE("score_sentence strips edge punctuation before token metrics") {
    auto s = m::score_sentence("তুমি ভাত খাও।", "তুমি ভাত খাও");
    REQUIRE(s.bleu1 == 1.0);
    // chrf runs on raw characters, so the danda still counts there.
    REQUIRE(s.chrf < 100.0);
}

TEST_CASE("aggregate averages per field") {
    m::MetricScores a{0.2, 0.1, 0.3, 40.0};
    m::MetricScores b{0.4, 0.3, 0.5, 60.0};
    auto mean = m::aggregate({a, b});
    REQUIRE_THAT(mean.bleu1, WithinAbs(0.3, 1e-12));
    REQUIRE_THAT(mean.bleu4, WithinAbs(0.2, 1e-12));
    REQUIRE_THAT(mean.meteor, WithinAbs(0.4, 1e-12));
    REQUIRE_THAT(mean.chrf, WithinAbs(50.0, 1e-12));
    REQUIRE(m::aggregate({a}) == a);
    REQUIRE(m::aggregate({b, a}) == mean);
    REQUIRE_THROWS_AS(m::aggregate({}), std::invalid_argument);
}

TEST_CASE("corpus_bleu pools counts instead of averaging sentences") {
    std::vector<std::pair<TokenSequence, TokenSequence>> pairs{
        {{"a", "b"}, {"a", "b"}},
        {{"c"}, {"c", "d"}},
    };
    // Pooled: 3 of 3 unigrams matched, lengths 3 vs 4, so BP = exp(1 - 4/3).
    REQUIRE_THAT(m::corpus_bleu(pairs, 1), WithinAbs(std::exp(1.0 - 4.0 / 3.0), 1e-12));
    double sentence_mean =
        (m::bleu({"a", "b"}, {"a", "b"}, 1) + m::bleu({"c"}, {"c", "d"}, 1)) / 2.0;
    REQUIRE(m::corpus_bleu(pairs, 1) != sentence_mean);
    REQUIRE_THROWS_AS(m::corpus_bleu({}, 1), std::invalid_argument);
}

TEST_CASE("randomized agreement with brute-force oracles") {
    const std::vector<std::string> vocab{"ka", "kho", "go", "gha", "uma"};
    std::mt19937 rng(20240817);
    std::uniform_int_distribution<std::size_t> hyp_len(0, 8);
    std::uniform_int_distribution<std::size_t> ref_len(1, 8);
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);

    auto draw = [&](std::size_t len) {
        TokenSequence seq;
        for (std::size_t i = 0; i < len; ++i) seq.push_back(vocab[pick(rng)]);
        return seq;
    };

    for (int round = 0; round < 200; ++round) {
        TokenSequence hyp = draw(hyp_len(rng));
        TokenSequence ref = draw(ref_len(rng));
        INFO("hyp: " << join(hyp) << " | ref: " << join(ref));
        REQUIRE_THAT(m::bleu(hyp, ref, 1), WithinAbs(oracle::bleu(hyp, ref, 1), 1e-9));
        REQUIRE_THAT(m::bleu(hyp, ref, 4), WithinAbs(oracle::bleu(hyp, ref, 4), 1e-9));
        REQUIRE_THAT(m::meteor_exact(hyp, ref), WithinAbs(oracle::meteor_exact(hyp, ref), 1e-9));
        REQUIRE_THAT(m::chrf(join(hyp), join(ref)),
                     WithinAbs(oracle::chrf(join(hyp), join(ref), 6, 2.0), 1e-9));
    }
}

TEST_CASE("randomized corpus_bleu agreement") {
    const std::vector<std::string> vocab{"a", "b", "c", "d", "e"};
    std::mt19937 rng(99);
    std::uniform_int_distribution<std::size_t> batch(1, 5);
    std::uniform_int_distribution<std::size_t> hyp_len(1, 8);
    std::uniform_int_distribution<std::size_t> ref_len(1, 8);
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    for (int round = 0; round < 50; ++round) {
        std::vector<std::pair<TokenSequence, TokenSequence>> pairs;
        std::size_t count = batch(rng);
        for (std::size_t i = 0; i < count; ++i) {
            TokenSequence hyp, ref;
            for (std::size_t k = hyp_len(rng); k > 0; --k) hyp.push_back(vocab[pick(rng)]);
            for (std::size_t k = ref_len(rng); k > 0; --k) ref.push_back(vocab[pick(rng)]);
            pairs.emplace_back(std::move(hyp), std::move(ref));
        }
        for (int n : {1, 2, 4})
            REQUIRE_THAT(m::corpus_bleu(pairs, n), WithinAbs(oracle::corpus_bleu(pairs, n), 1e-9));
    }
}

TEST_CASE("bleu1 never drops below bleu4") {
    const std::vector<std::string> vocab{"x", "y", "z"};
    std::mt19937 rng(7);
    std::uniform_int_distribution<std::size_t> len(1, 6);
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    for (int round = 0; round < 50; ++round) {
        TokenSequence hyp, ref;
        for (std::size_t k = len(rng); k > 0; --k) hyp.push_back(vocab[pick(rng)]);
        for (std::size_t k = len(rng); k > 0; --k) ref.push_back(vocab[pick(rng)]);
        REQUIRE(m::bleu(hyp, ref, 1) >= m::bleu(hyp, ref, 4));
    }
}

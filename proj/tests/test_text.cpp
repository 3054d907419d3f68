#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "errors.hpp"
#include "text.hpp"
#include "testutil.hpp"

using namespace lceval;

TEST_CASE("tokenize lowercases, splits and strips edge punctuation") {
    CHECK(tokenize("A man, riding.") == TokenSeq{"a", "man", "riding"});
    CHECK(tokenize("") == TokenSeq{});
    CHECK(tokenize("don't stop") == TokenSeq{"don't", "stop"});
    CHECK(tokenize("  \t \n ") == TokenSeq{});
    CHECK(tokenize("\"hello\" -- world!!") == TokenSeq{"hello", "world"});
    CHECK(tokenize("...") == TokenSeq{});
}

TEST_CASE("tokenize is idempotent on its own joined output") {
    std::mt19937_64 rng(7);
    const std::string alphabet = "aB c,.'!-dE f\tg";
    for (int trial = 0; trial < 200; ++trial) {
        std::string s;
        size_t len = rng() % 40;
        for (size_t i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
        TokenSeq once = tokenize(s);
        TokenSeq twice = tokenize(join_tokens(once));
        CHECK(once == twice);
    }
}

TEST_CASE("ngrams builds sliding-window multisets") {
    NGramBag bag = ngrams({"a", "b", "c"}, 2);
    CHECK(bag.counts.size() == 2);
    CHECK(bag.counts.at("a b") == 1);
    CHECK(bag.counts.at("b c") == 1);

    NGramBag unigrams = ngrams({"a", "a", "a"}, 1);
    CHECK(unigrams.counts.size() == 1);
    CHECK(unigrams.counts.at("a") == 3);

    CHECK(ngrams({"a", "b"}, 3).counts.empty());
    CHECK_THROWS_AS(ngrams({"a"}, 0), input_error);
    CHECK_THROWS_AS(ngrams({"a"}, 5), input_error);
}

TEST_CASE("ngram count totals match the window count") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        TokenSeq seq;
        size_t len = rng() % 12;
        for (size_t i = 0; i < len; ++i) seq.push_back(std::string(1, 'a' + rng() % 3));
        for (int n = 1; n <= 4; ++n) {
            NGramBag bag = ngrams(seq, n);
            long long total = 0;
            for (const auto& [gram, count] : bag.counts) total += count;
            long long expect = std::max<long long>(0, static_cast<long long>(seq.size()) - n + 1);
            CHECK(total == expect);
        }
    }
}

TEST_CASE("lcs_length matches the worked example and basics") {
    CHECK(lcs_length({"a", "b", "c", "d"}, {"a", "c", "b", "d"}) == 3);
    TokenSeq x{"w", "x", "y"};
    CHECK(lcs_length(x, x) == 3);
    CHECK(lcs_length({"a", "b"}, {"c", "d"}) == 0);
    CHECK(lcs_length({}, {"a"}) == 0);
}

TEST_CASE("lcs_length agrees with the exhaustive oracle and is symmetric") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        auto make = [&] {
            TokenSeq seq;
            size_t len = rng() % 9;
            for (size_t i = 0; i < len; ++i) seq.push_back(std::string(1, 'a' + rng() % 4));
            return seq;
        };
        TokenSeq a = make(), b = make();
        int got = lcs_length(a, b);
        CHECK(got == testutil::lcs_oracle(a, b));
        CHECK(got == lcs_length(b, a));
        CHECK(got <= static_cast<int>(std::min(a.size(), b.size())));
    }
}

TEST_CASE("porter stemmer matches the published algorithm") {
    // Hand-traced through the published rule set, plus the worked
    // multi-step examples (oscillators, the connect family).
    const std::pair<const char*, const char*> vectors[] = {
        {"riding", "ride"},        {"horses", "hors"},        {"a", "a"},
        {"caresses", "caress"},    {"ponies", "poni"},        {"ties", "ti"},
        {"caress", "caress"},      {"cats", "cat"},           {"feed", "feed"},
        {"agreed", "agre"},        {"plastered", "plaster"},  {"bled", "bled"},
        {"motoring", "motor"},     {"sing", "sing"},          {"hopping", "hop"},
        {"tanned", "tan"},         {"falling", "fall"},       {"hissing", "hiss"},
        {"fizzed", "fizz"},        {"failing", "fail"},       {"filing", "file"},
        {"happy", "happi"},        {"sky", "sky"},            {"relational", "relat"},
        {"conditional", "condit"}, {"rational", "ration"},    {"valenci", "valenc"},
        {"hesitanci", "hesit"},    {"digitizer", "digit"},    {"radicalli", "radic"},
        {"oscillators", "oscil"},  {"connected", "connect"},  {"connecting", "connect"},
        {"connection", "connect"}, {"connections", "connect"},{"generalizations", "gener"},
        {"relativity", "rel"},
        {"adoption", "adopt"},     {"adjustment", "adjust"},  {"replacement", "replac"},
        {"dependent", "depend"},   {"controll", "control"},   {"roll", "roll"},
        {"probate", "probat"},     {"rate", "rate"},          {"cease", "ceas"},
        {"goodness", "good"},      {"hopeful", "hope"},       {"formalize", "formal"},
    };
    for (const auto& [word, expect] : vectors) {
        CAPTURE(word);
        CHECK(porter_stem(word) == expect);
    }
}

TEST_CASE("porter stemmer is deterministic and total") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        std::string w;
        size_t len = rng() % 12;
        for (size_t i = 0; i < len; ++i) w += static_cast<char>('a' + rng() % 26);
        CHECK(porter_stem(w) == porter_stem(w));
    }
    CHECK(porter_stem("don't") == porter_stem("don't"));
}

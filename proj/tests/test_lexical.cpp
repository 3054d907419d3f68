#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "errors.hpp"
#include "lexical.hpp"
#include "testutil.hpp"

using namespace lceval;

namespace {

TokenSeq random_seq(std::mt19937_64& rng, size_t max_len, int vocab = 4) {
    TokenSeq seq;
    size_t len = rng() % (max_len + 1);
    for (size_t i = 0; i < len; ++i) seq.push_back(std::string(1, 'a' + rng() % vocab));
    return seq;
}

}  // namespace

TEST_CASE("ngram_precision worked examples") {
    TokenSeq cand{"a", "b", "c"};
    std::vector<TokenSeq> refs{{"a", "b", "d"}};
    CHECK(ngram_precision(cand, refs, 1) == 2.0 / 3.0);
    CHECK(ngram_precision(cand, refs, 2) == 1.0 / 2.0);
    CHECK(ngram_precision(cand, {cand}, 1) == 1.0);
    CHECK(ngram_precision(cand, {cand}, 3) == 1.0);
    CHECK(ngram_precision({}, refs, 1) == 0.0);
    CHECK(ngram_precision({"x"}, refs, 2) == 0.0);  // no bigrams in candidate
}

TEST_CASE("ngram_precision clips repeated candidate grams") {
    TokenSeq cand{"the", "the", "the"};
    std::vector<TokenSeq> refs{{"the", "cat"}};
    CHECK(ngram_precision(cand, refs, 1) == 1.0 / 3.0);
}

TEST_CASE("unigram_recall worked examples") {
    TokenSeq cand{"a", "b", "c"};
    CHECK(unigram_recall(cand, {{"a", "b", "d"}}) == 2.0 / 3.0);
    CHECK(unigram_recall({"a", "b", "c", "d"}, {{"a", "b"}}) == 1.0);
    CHECK(unigram_recall(cand, {{"a", "b", "d"}, {"a", "b", "c"}}) == 1.0);  // max over refs
    CHECK(unigram_recall({}, {{"a"}}) == 0.0);
    CHECK(unigram_recall(cand, {{}}) == 0.0);
    CHECK_THROWS_AS(unigram_recall(cand, {}), input_error);
}

TEST_CASE("rouge_l worked examples") {
    TokenSeq cand{"a", "b", "c", "d"};
    CHECK(rouge_l(cand, {{"a", "c", "b", "d"}}) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(rouge_l(cand, {cand}) == 1.0);
    CHECK(rouge_l(cand, {{"x", "y"}}) == 0.0);
    CHECK(rouge_l({}, {{"a"}}) == 0.0);
    CHECK_THROWS_AS(rouge_l(cand, {cand}, 0.0), input_error);
}

TEST_CASE("rouge_l equals the brute-force oracle F on short pairs") {
    std::mt19937_64 rng(5);
    const double beta = 1.2;
    for (int trial = 0; trial < 200; ++trial) {
        TokenSeq cand = random_seq(rng, 8);
        TokenSeq ref = random_seq(rng, 8);
        if (cand.empty()) continue;
        double got = rouge_l(cand, {ref});
        double expect = 0.0;
        if (!ref.empty()) {
            int lcs = testutil::lcs_oracle(cand, ref);
            double p = static_cast<double>(lcs) / cand.size();
            double r = static_cast<double>(lcs) / ref.size();
            if (p > 0 || r > 0) expect = (1 + beta * beta) * p * r / (r + beta * beta * p);
        }
        CHECK(got == expect);
    }
}

TEST_CASE("meteor_lite worked examples") {
    TokenSeq four{"a", "b", "c", "d"};
    CHECK(meteor_lite(four, {four}) == 0.9921875);  // F=1, penalty 0.5*(1/4)^3
    CHECK(meteor_lite({"x", "y"}, {{"p", "q"}}) == 0.0);
    CHECK(meteor_lite({"a", "b"}, {{"b", "a"}}) == 0.5);  // two chunks, penalty 0.5
    CHECK(meteor_lite({}, {{"a"}}) == 0.0);
}

TEST_CASE("meteor_lite matches stemmed forms in the second stage") {
    // "riding" and "rides" share the stem "ride".
    double s = meteor_lite({"a", "man", "riding"}, {{"a", "man", "rides"}});
    CHECK(s > 0.9);  // all three tokens align, one chunk
    double exact_only = meteor_lite({"a", "man", "riding"}, {{"a", "man", "walks"}});
    CHECK(s > exact_only);
}

TEST_CASE("idf follows the document-frequency definition") {
    std::vector<std::vector<TokenSeq>> one_image{{{"a", "cat"}, {"a", "dog"}}};
    IdfTable t1 = build_idf(one_image, 1);
    CHECK(t1.doc_count == 1);
    CHECK(t1.idf("a") == 0.0);
    CHECK(t1.idf("cat") == 0.0);

    std::vector<std::vector<TokenSeq>> two_images{{{"a", "cat"}}, {{"a", "dog"}}};
    IdfTable t2 = build_idf(two_images, 1);
    CHECK(t2.idf("cat") == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(t2.idf("a") == 0.0);
    CHECK(t2.idf("zebra") == doctest::Approx(std::log(2.0)).epsilon(1e-15));  // unseen
    CHECK_THROWS_AS(build_idf({}, 1), input_error);
}

namespace {

// Brute-force tf-idf cosine oracle for one n-gram order, straight from
// the definitions.
double cider_oracle_order(const TokenSeq& cand, const std::vector<TokenSeq>& refs,
                          const IdfTable& table, int n, double sigma) {
    auto vec = [&](const TokenSeq& s) {
        std::map<std::string, double> v;
        NGramBag bag = ngrams(s, n);
        for (const auto& [g, c] : bag.counts) v[g] = c * table.idf(g);
        return v;
    };
    auto norm = [](const std::map<std::string, double>& v) {
        double sq = 0;
        for (const auto& [g, w] : v) sq += w * w;
        return std::sqrt(sq);
    };
    auto vc = vec(cand);
    double total = 0.0;
    for (const auto& ref : refs) {
        auto vr = vec(ref);
        double dot = 0.0;
        for (const auto& [g, w] : vc) {
            auto it = vr.find(g);
            if (it != vr.end()) dot += std::min(w, it->second) * it->second;
        }
        double sim = 0.0;
        double nc = norm(vc), nr = norm(vr);
        if (nc > 0 && nr > 0) sim = dot / (nc * nr);
        double delta = static_cast<double>(cand.size()) - static_cast<double>(ref.size());
        total += sim * std::exp(-delta * delta / (2 * sigma * sigma));
    }
    return total / refs.size();
}

}  // namespace

TEST_CASE("cider_d edge cases and toy-corpus oracle") {
    std::vector<std::vector<TokenSeq>> single{{{"a", "cat", "sat"}}};
    IdfSet idf_single = build_idf_set(single);
    CHECK(cider_d({"a", "cat", "sat"}, {{"a", "cat", "sat"}}, idf_single) == 0.0);

    std::vector<std::vector<TokenSeq>> corpus{
        {{"a", "red", "bird", "flies"}, {"the", "red", "bird", "flies", "away"}},
        {{"a", "dog", "runs", "fast"}, {"the", "dog", "sprints"}},
    };
    IdfSet idf = build_idf_set(corpus);
    TokenSeq cand{"a", "red", "bird", "flies"};
    std::vector<TokenSeq> refs = corpus[0];

    double got = cider_d(cand, refs, idf);
    CHECK(got > 0.0);
    double expect = 0.0;
    for (int n = 1; n <= 4; ++n) expect += cider_oracle_order(cand, refs, idf[n - 1], n, 6.0);
    expect /= 4.0;
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));

    CHECK(cider_d({"zebra", "stripes"}, refs, idf) == 0.0);  // disjoint vocabulary
}

TEST_CASE("p1 is 1 when every candidate token fits the clipped reference pool") {
    // Each candidate unigram count is covered by the per-gram max over
    // references, so the clipped precision must be exactly 1.
    TokenSeq cand{"a", "a", "b", "c"};
    std::vector<TokenSeq> refs{{"a", "a", "x"}, {"b", "y"}, {"c", "c"}};
    CHECK(ngram_precision(cand, refs, 1) == 1.0);
}

TEST_CASE("cider_d demands idf tables for every order") {
    IdfSet missing{};  // default-constructed, orders unset
    CHECK_THROWS_AS(cider_d({"a"}, {{"a"}}, missing), input_error);
}

TEST_CASE("lexical features stay in range and ignore reference order") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        TokenSeq cand = random_seq(rng, 6);
        std::vector<TokenSeq> refs;
        size_t nrefs = 1 + rng() % 3;
        for (size_t i = 0; i < nrefs; ++i) {
            TokenSeq r = random_seq(rng, 6);
            if (r.empty()) r.push_back("pad");
            refs.push_back(r);
        }
        std::vector<TokenSeq> reversed(refs.rbegin(), refs.rend());
        for (int n = 1; n <= 4; ++n) {
            double v = ngram_precision(cand, refs, n);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            CHECK(v == ngram_precision(cand, reversed, n));
        }
        double recall = unigram_recall(cand, refs);
        CHECK(recall >= 0.0);
        CHECK(recall <= 1.0);
        CHECK(recall == unigram_recall(cand, reversed));
        double rouge = rouge_l(cand, refs);
        CHECK(rouge >= 0.0);
        CHECK(rouge <= 1.0);
        CHECK(rouge == rouge_l(cand, reversed));
        double meteor = meteor_lite(cand, refs);
        CHECK(meteor >= 0.0);
        CHECK(meteor <= 1.0);
        CHECK(meteor == meteor_lite(cand, reversed));

        // Duplicating a reference never moves a max-aggregated score.
        std::vector<TokenSeq> dup = refs;
        dup.push_back(refs[0]);
        CHECK(ngram_precision(cand, dup, 1) == ngram_precision(cand, refs, 1));
        CHECK(unigram_recall(cand, dup) == recall);
        CHECK(rouge_l(cand, dup) == rouge);
        CHECK(meteor_lite(cand, dup) == meteor);
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "errors.hpp"
#include "semantic.hpp"
#include "testutil.hpp"

using namespace lceval;

namespace {

EmbeddingTable toy_table() {
    EmbeddingTable t;
    t.dimension = 2;
    t.vectors["a"] = {1.0, 0.0};
    t.vectors["b"] = {0.0, 1.0};
    t.vectors["c"] = {1.0, 1.0};
    return t;
}

EmbeddingTable random_table(std::mt19937_64& rng, int words, int dim) {
    EmbeddingTable t;
    t.dimension = dim;
    for (int w = 0; w < words; ++w) {
        std::vector<double> v(dim);
        for (double& x : v) x = (static_cast<double>(rng() >> 11) * 0x1.0p-53) * 2.0 - 1.0;
        t.vectors[std::string(1, 'a' + w)] = v;
    }
    return t;
}

TokenSeq random_sentence(std::mt19937_64& rng, int words, size_t min_len, size_t max_len) {
    TokenSeq s;
    size_t len = min_len + rng() % (max_len - min_len + 1);
    for (size_t i = 0; i < len; ++i) s.push_back(std::string(1, 'a' + rng() % words));
    return s;
}

}  // namespace

TEST_CASE("load_embeddings ingests lines, skips headers, keeps first duplicates") {
    testutil::TempDir dir;
    const std::string path = dir.file("emb.txt");
    testutil::write_file(path, "cat 1.0 0.0 0.5\ndog 0.0 1.0 -0.25\n");
    EmbeddingTable t = load_embeddings(path);
    CHECK(t.dimension == 3);
    CHECK(t.vectors.size() == 2);
    CHECK((*t.find("dog"))[2] == -0.25);

    const std::string with_header = dir.file("emb2.txt");
    testutil::write_file(with_header, "2 3\ncat 1 0 0\ndog 0 1 0\n");
    EmbeddingTable t2 = load_embeddings(with_header);
    CHECK(t2.dimension == 3);
    CHECK(t2.vectors.size() == 2);

    const std::string dup = dir.file("emb3.txt");
    testutil::write_file(dup, "cat 1 0\ncat 0 1\n");
    EmbeddingTable t3 = load_embeddings(dup);
    CHECK((*t3.find("cat"))[0] == 1.0);
}

TEST_CASE("load_embeddings rejects inconsistent dimensions naming the line") {
    testutil::TempDir dir;
    const std::string path = dir.file("bad.txt");
    testutil::write_file(path, "cat 1 0 0\ndog 0 1\n");
    try {
        load_embeddings(path);
        FAIL("expected input_error");
    } catch (const input_error& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("mowe_similarity worked examples") {
    EmbeddingTable t = toy_table();
    CHECK(mowe_similarity({"a", "b"}, {"a", "b"}, t) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mowe_similarity({"a"}, {"b"}, t) == 0.0);
    CHECK(mowe_similarity({"a", "b"}, {"a"}, t) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(mowe_similarity({"zzz"}, {"a"}, t) == 0.0);  // fully OOV side
    // Bag-of-words: token order never matters.
    CHECK(mowe_similarity({"a", "b", "c"}, {"c"}, t) ==
          mowe_similarity({"c", "b", "a"}, {"c"}, t));
}

TEST_CASE("mowe skips OOV tokens rather than zeroing them") {
    EmbeddingTable t = toy_table();
    CHECK(mowe_similarity({"a", "zzz"}, {"a"}, t) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("the similarity clamps at zero while the raw cosine stays signed") {
    EmbeddingTable t;
    t.dimension = 2;
    t.vectors["x"] = {1.0, 0.0};
    t.vectors["y"] = {-1.0, 0.0};
    CHECK(mowe_similarity({"x"}, {"y"}, t) == 0.0);
    CHECK(mowe_cosine({"x"}, {"y"}, t) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("wmd worked examples") {
    EmbeddingTable t = toy_table();
    CHECK(wmd_similarity({"a", "b"}, {"a", "b"}, t) == 1.0);
    CHECK(wmd_similarity({"a"}, {"b"}, t) ==
          doctest::Approx(std::exp(-std::sqrt(2.0))).epsilon(1e-12));
    // Optimal plan moves half the mass from b to c at cost 0.5 * 1.
    double d = *wmd_distance({"a", "b"}, {"a", "c"}, t);
    CHECK(d == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(wmd_similarity({"zzz"}, {"a"}, t) == 0.0);  // fully OOV
    CHECK(!wmd_distance({"zzz"}, {"a"}, t).has_value());
}

TEST_CASE("wmd distance is symmetric and respects the triangle inequality") {
    std::mt19937_64 rng(31);
    EmbeddingTable t = random_table(rng, 10, 8);
    for (int trial = 0; trial < 200; ++trial) {
        TokenSeq x = random_sentence(rng, 10, 2, 6);
        TokenSeq y = random_sentence(rng, 10, 2, 6);
        TokenSeq z = random_sentence(rng, 10, 2, 6);
        double dxy = *wmd_distance(x, y, t);
        double dyx = *wmd_distance(y, x, t);
        CHECK(std::abs(dxy - dyx) <= 1e-6);
        double dxz = *wmd_distance(x, z, t);
        double dyz = *wmd_distance(y, z, t);
        CHECK(dxz <= dxy + dyz + 1e-6);
    }
}

TEST_CASE("wmd_similarity of a sentence with itself is exactly 1") {
    std::mt19937_64 rng(37);
    EmbeddingTable t = random_table(rng, 6, 4);
    for (int trial = 0; trial < 50; ++trial) {
        TokenSeq x = random_sentence(rng, 6, 1, 6);
        CHECK(wmd_similarity(x, x, t) == 1.0);
    }
}

TEST_CASE("2x2 transport equals exhaustive vertex enumeration") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        EmbeddingTable t = random_table(rng, 4, 3);
        // Two two-word sentences with random multiplicities.
        TokenSeq x, y;
        int ca1 = 1 + static_cast<int>(rng() % 3), ca2 = 1 + static_cast<int>(rng() % 3);
        int cb1 = 1 + static_cast<int>(rng() % 3), cb2 = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < ca1; ++i) x.push_back("a");
        for (int i = 0; i < ca2; ++i) x.push_back("b");
        for (int i = 0; i < cb1; ++i) y.push_back("c");
        for (int i = 0; i < cb2; ++i) y.push_back("d");

        double got = *wmd_distance(x, y, t);

        // Feasible plans form a segment in T11; the optimum sits at an end.
        double a1 = static_cast<double>(ca1) / (ca1 + ca2);
        double b1 = static_cast<double>(cb1) / (cb1 + cb2);
        auto dist = [&](const char* u, const char* v) {
            const auto& eu = *t.find(u);
            const auto& ev = *t.find(v);
            double sq = 0;
            for (size_t i = 0; i < eu.size(); ++i) sq += (eu[i] - ev[i]) * (eu[i] - ev[i]);
            return std::sqrt(sq);
        };
        double c11 = dist("a", "c"), c12 = dist("a", "d"), c21 = dist("b", "c"),
               c22 = dist("b", "d");
        double lo = std::max(0.0, a1 - (1.0 - b1));
        double hi = std::min(a1, b1);
        double best = 1e300;
        for (double t11 : {lo, hi}) {
            double cost = t11 * c11 + (a1 - t11) * c12 + (b1 - t11) * c21 +
                          (1.0 - a1 - b1 + t11) * c22;
            best = std::min(best, cost);
        }
        CHECK(got == doctest::Approx(best).epsilon(1e-9));
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "errors.hpp"
#include "features.hpp"
#include "testutil.hpp"

using namespace lceval;

namespace {

EmbeddingTable toy_embeddings() {
    EmbeddingTable t;
    t.dimension = 3;
    int i = 0;
    for (const char* w : {"a", "man", "rides", "riding", "horse", "dog", "the", "walks",
                          "on", "beach", "person"}) {
        std::vector<double> v(3, 0.0);
        v[i % 3] = 1.0;
        v[(i + 1) % 3] = 0.25 * (i % 4);
        t.vectors[w] = v;
        ++i;
    }
    return t;
}

Caption with_parse(const std::string& text) {
    // Chain parse: every token's head is the next one, last is the root.
    Caption c;
    c.text = text;
    c.tokens = tokenize(text);
    std::vector<int> heads;
    for (size_t i = 0; i < c.tokens->size(); ++i)
        heads.push_back(i + 1 == c.tokens->size() ? 0 : static_cast<int>(i) + 2);
    c.heads = heads;
    return c;
}

CandidateRecord toy_record() {
    CandidateRecord rec;
    rec.image_id = "img0";
    rec.candidate = with_parse("a man riding a horse");
    rec.references.push_back(with_parse("a man rides a horse"));
    rec.references.push_back(with_parse("the man walks a dog"));
    rec.label = Label::machine;
    rec.human_score = 3.0;
    rec.system_id = "sys";
    return rec;
}

IdfSet toy_idf(const std::vector<CandidateRecord>& extra = {}) {
    std::vector<CandidateRecord> records{toy_record()};
    CandidateRecord other;
    other.image_id = "img1";
    other.candidate = with_parse("a dog on the beach");
    other.references.push_back(with_parse("a dog walks on a beach"));
    records.push_back(other);
    records.insert(records.end(), extra.begin(), extra.end());
    return build_corpus_idf(records);
}

}  // namespace

TEST_CASE("aggregate implements max, min and mean") {
    std::vector<double> scores{0.2, 0.5, 0.3};
    CHECK(aggregate(scores, Aggregation::max) == 0.5);
    CHECK(aggregate(scores, Aggregation::min) == 0.2);
    CHECK(aggregate(scores, Aggregation::mean) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(aggregate({0.7}, Aggregation::max) == 0.7);
    CHECK(aggregate({0.7}, Aggregation::min) == 0.7);
    CHECK(aggregate({0.7}, Aggregation::mean) == 0.7);
    CHECK_THROWS_AS(aggregate({}, Aggregation::max), input_error);
}

TEST_CASE("default manifest has the twelve contracted features in order") {
    FeatureManifest m = FeatureManifest::default_manifest();
    CHECK(m.names == std::vector<std::string>{"p1", "p2", "p3", "p4", "recall1", "rougeL",
                                              "meteorLite", "ciderD", "mowe", "wmd", "hwcm2",
                                              "hwcm3"});
    CHECK(m.aggregation == Aggregation::max);
    CHECK(m.rouge_beta == 1.2);
    CHECK(m.cider_sigma == 6.0);
    m.validate();
}

TEST_CASE("manifest validation rejects duplicates and unknown names") {
    FeatureManifest m = FeatureManifest::default_manifest();
    m.names.push_back("p1");
    CHECK_THROWS_AS(m.validate(), input_error);

    FeatureManifest m2;
    m2.names = {"p1", "nonsense"};
    CHECK_THROWS_AS(m2.validate(), input_error);
    m2.external = {"nonsense"};
    CHECK_NOTHROW(m2.validate());
}

TEST_CASE("extract_features fills the default manifest in order") {
    EmbeddingTable emb = toy_embeddings();
    IdfSet idf = toy_idf();
    FeatureResources res{&emb, &idf};
    FeatureManifest manifest = FeatureManifest::default_manifest();

    CandidateRecord rec = toy_record();
    FeatureVector fv = extract_features(rec, res, manifest, 7);
    CHECK(fv.values.size() == 12);
    CHECK(fv.image_id == "img0");
    CHECK(fv.index == 7);
    CHECK(fv.label == Label::machine);
    CHECK(*fv.human_score == 3.0);
    CHECK(*fv.system_id == "sys");
    for (double v : fv.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("a candidate identical to every reference scores 1 on per-pair features") {
    EmbeddingTable emb = toy_embeddings();
    CandidateRecord rec;
    rec.image_id = "img0";
    rec.candidate = with_parse("a man rides a horse");
    rec.references = {rec.candidate, rec.candidate};
    IdfSet idf = toy_idf();
    FeatureResources res{&emb, &idf};
    FeatureManifest manifest = FeatureManifest::default_manifest();

    FeatureVector fv = extract_features(rec, res, manifest);
    for (size_t i = 0; i < manifest.names.size(); ++i) {
        if (manifest.names[i] == "ciderD") continue;  // corpus-dependent
        if (manifest.names[i] == "meteorLite") {
            CHECK(fv.values[i] > 0.99);  // fragmentation penalty on a perfect match
            continue;
        }
        CAPTURE(manifest.names[i]);
        CHECK(fv.values[i] == 1.0);
    }
}

TEST_CASE("extraction errors name the feature and the record") {
    EmbeddingTable emb = toy_embeddings();
    IdfSet idf = toy_idf();
    FeatureResources res{&emb, &idf};
    FeatureManifest manifest = FeatureManifest::default_manifest();

    CandidateRecord no_parse = toy_record();
    no_parse.candidate.heads.reset();
    try {
        extract_features(no_parse, res, manifest, 3);
        FAIL("expected input_error");
    } catch (const input_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("hwcm2") != std::string::npos);
        CHECK(msg.find("record 3") != std::string::npos);
    }

    FeatureResources no_emb{nullptr, &idf};
    CHECK_THROWS_AS(extract_features(toy_record(), no_emb, manifest), input_error);
    FeatureResources no_idf{&emb, nullptr};
    CHECK_THROWS_AS(extract_features(toy_record(), no_idf, manifest), input_error);
}

TEST_CASE("external features read external_scores and fail when missing") {
    FeatureManifest manifest;
    manifest.names = {"p1", "spice"};
    manifest.external = {"spice"};

    CandidateRecord rec = toy_record();
    rec.external_scores["spice"] = 0.31;
    FeatureVector fv = extract_features(rec, {}, manifest);
    CHECK(fv.values[1] == 0.31);

    rec.external_scores.clear();
    try {
        extract_features(rec, {}, manifest, 5);
        FAIL("expected input_error");
    } catch (const input_error& e) {
        CHECK(std::string(e.what()).find("spice") != std::string::npos);
    }
}

TEST_CASE("a fully out-of-vocabulary side zeroes wmd with a warning") {
    EmbeddingTable emb = toy_embeddings();
    IdfSet idf = toy_idf();
    FeatureResources res{&emb, &idf};
    FeatureManifest manifest;
    manifest.names = {"wmd", "mowe"};

    CandidateRecord rec;
    rec.image_id = "oov";
    rec.candidate.text = "zzz qqq";
    rec.references.push_back(Caption{"a man rides", {}, {}});
    std::vector<std::string> warnings;
    FeatureVector fv = extract_features(rec, res, manifest, 0,
                                        [&](const std::string& w) { warnings.push_back(w); });
    CHECK(fv.values[0] == 0.0);
    CHECK(fv.values[1] == 0.0);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("wmd") != std::string::npos);
}

TEST_CASE("non-finite feature values are an internal invariant breach") {
    FeatureManifest manifest;
    manifest.names = {"broken"};
    manifest.external = {"broken"};
    CandidateRecord rec;
    rec.image_id = "i";
    rec.candidate.text = "c";
    rec.references.push_back(Caption{"r", {}, {}});
    rec.external_scores["broken"] = std::nan("");
    CHECK_THROWS_AS(extract_features(rec, {}, manifest), internal_error);
}

TEST_CASE("extraction is deterministic and reference-permutation invariant") {
    EmbeddingTable emb = toy_embeddings();
    IdfSet idf = toy_idf();
    FeatureResources res{&emb, &idf};
    FeatureManifest manifest = FeatureManifest::default_manifest();

    CandidateRecord rec = toy_record();
    FeatureVector a = extract_features(rec, res, manifest);
    FeatureVector b = extract_features(rec, res, manifest);
    CHECK(a.values == b.values);  // bitwise determinism

    CandidateRecord permuted = rec;
    std::reverse(permuted.references.begin(), permuted.references.end());
    FeatureVector c = extract_features(permuted, res, manifest);
    CHECK(a.values == c.values);

    for (Aggregation mode : {Aggregation::min, Aggregation::mean}) {
        FeatureManifest mm = manifest;
        mm.aggregation = mode;
        CHECK(extract_features(rec, res, mm).values ==
              extract_features(permuted, res, mm).values);
    }
}

TEST_CASE("duplicate references: invariant under max, mean may move") {
    EmbeddingTable emb = toy_embeddings();
    IdfSet idf = toy_idf();
    FeatureResources res{&emb, &idf};
    FeatureManifest manifest = FeatureManifest::default_manifest();

    CandidateRecord rec = toy_record();
    CandidateRecord dup = rec;
    dup.references.push_back(rec.references.front());

    FeatureVector base = extract_features(rec, res, manifest);
    FeatureVector with_dup = extract_features(dup, res, manifest);
    for (size_t i = 0; i < manifest.names.size(); ++i) {
        if (manifest.names[i] == "ciderD") continue;  // averages over references by definition
        CAPTURE(manifest.names[i]);
        CHECK(base.values[i] == with_dup.values[i]);
    }

    FeatureManifest mean_manifest = manifest;
    mean_manifest.aggregation = Aggregation::mean;
    FeatureVector mean_base = extract_features(rec, res, mean_manifest);
    FeatureVector mean_dup = extract_features(dup, res, mean_manifest);
    CHECK(mean_base.values != mean_dup.values);
}

TEST_CASE("min and mean aggregation apply to the per-reference features") {
    EmbeddingTable emb = toy_embeddings();
    IdfSet idf = toy_idf();
    FeatureResources res{&emb, &idf};

    CandidateRecord rec = toy_record();
    FeatureManifest manifest = FeatureManifest::default_manifest();

    FeatureManifest min_manifest = manifest;
    min_manifest.aggregation = Aggregation::min;
    FeatureVector maxed = extract_features(rec, res, manifest);
    FeatureVector mined = extract_features(rec, res, min_manifest);

    auto at = [&](const FeatureVector& fv, const std::string& name) {
        auto it = std::find(manifest.names.begin(), manifest.names.end(), name);
        return fv.values[it - manifest.names.begin()];
    };
    // The two references differ, so min must not exceed max on the
    // aggregated features, with strict inequality somewhere.
    bool strict = false;
    for (const char* name : {"p1", "p2", "recall1", "mowe", "wmd", "hwcm2"}) {
        CHECK(at(mined, name) <= at(maxed, name));
        if (at(mined, name) < at(maxed, name)) strict = true;
    }
    CHECK(strict);
    // Features with their own multi-reference convention stay put.
    CHECK(at(mined, "rougeL") == at(maxed, "rougeL"));
    CHECK(at(mined, "meteorLite") == at(maxed, "meteorLite"));
    CHECK(at(mined, "ciderD") == at(maxed, "ciderD"));
}

TEST_CASE("feature files round trip and reject mismatched manifests") {
    testutil::TempDir dir;
    EmbeddingTable emb = toy_embeddings();
    IdfSet idf = toy_idf();
    FeatureResources res{&emb, &idf};
    FeatureManifest manifest = FeatureManifest::default_manifest();

    std::vector<FeatureVector> vectors;
    vectors.push_back(extract_features(toy_record(), res, manifest, 0));
    CandidateRecord rec2 = toy_record();
    rec2.image_id = "img9";
    rec2.human_score.reset();
    rec2.system_id.reset();
    vectors.push_back(extract_features(rec2, res, manifest, 1));

    const std::string p1 = dir.file("f1.jsonl");
    write_features(vectors, manifest, p1);
    FeatureFile file = read_features(p1);
    CHECK(file.manifest == manifest);
    REQUIRE(file.vectors.size() == 2);
    CHECK(file.vectors[0].values == vectors[0].values);
    CHECK(file.vectors[1].values == vectors[1].values);
    CHECK(file.vectors[0].image_id == "img0");
    CHECK(!file.vectors[1].human_score.has_value());

    const std::string p2 = dir.file("f2.jsonl");
    write_features(file.vectors, file.manifest, p2);
    CHECK(testutil::read_file(p1) == testutil::read_file(p2));

    // Wrong value count against the manifest.
    const std::string bad = dir.file("bad.jsonl");
    testutil::write_file(bad, manifest.to_json() + "\n" +
                                  R"({"values":[0.1,0.2],"image_id":"x","label":"human"})" + "\n");
    CHECK_THROWS_AS(read_features(bad), input_error);

    // A reordered manifest is a different contract.
    FeatureManifest reordered = manifest;
    std::swap(reordered.names[0], reordered.names[1]);
    CHECK(!(reordered == manifest));
}

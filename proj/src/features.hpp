#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "lexical.hpp"
#include "semantic.hpp"
#include "syntactic.hpp"

namespace lceval {

enum class Aggregation { max, min, mean };

std::string aggregation_name(Aggregation mode);
Aggregation aggregation_from_name(const std::string& name);

// The ordered feature contract between extraction and the classifier.
// Name order is the serialization order of every vector.
struct FeatureManifest {
    std::vector<std::string> names;
    Aggregation aggregation = Aggregation::max;
    double rouge_beta = 1.2;
    double cider_sigma = 6.0;
    std::vector<std::string> external;  // names routed through external_scores

    static FeatureManifest default_manifest();
    void validate() const;
    bool operator==(const FeatureManifest& other) const = default;

    bool wants(const std::string& name) const;
    bool needs_embeddings() const;
    bool needs_idf() const;
    bool needs_parses() const;

    std::string to_json() const;
    static FeatureManifest from_json(const std::string& text);
};

struct FeatureVector {
    std::vector<double> values;
    std::string image_id;
    size_t index = 0;  // position in the source records file
    Label label = Label::unknown;
    std::optional<double> human_score;
    std::optional<std::string> system_id;
};

double aggregate(const std::vector<double>& per_reference_scores, Aggregation mode);

struct FeatureResources {
    const EmbeddingTable* embeddings = nullptr;
    const IdfSet* idf = nullptr;
};

// Computes every manifest feature for one record. Per-reference features
// go through `aggregate`; missing resources or parses raise input_error
// naming the feature and record.
FeatureVector extract_features(const CandidateRecord& record, const FeatureResources& resources,
                               const FeatureManifest& manifest, size_t index = 0,
                               std::function<void(const std::string&)> warn = nullptr);

// Builds the per-order idf tables from the reference sets of a record
// list, pooling references per image id.
IdfSet build_corpus_idf(const std::vector<CandidateRecord>& records);

// Feature file: line 1 is the manifest, every following line one vector.
void write_features(const std::vector<FeatureVector>& vectors, const FeatureManifest& manifest,
                    const std::string& path);
struct FeatureFile {
    FeatureManifest manifest;
    std::vector<FeatureVector> vectors;
};
FeatureFile read_features(const std::string& path);

}  // namespace lceval

#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "text.hpp"

namespace lceval {

struct EmbeddingTable {
    int dimension = 0;
    std::unordered_map<std::string, std::vector<double>> vectors;

    const std::vector<double>* find(const std::string& word) const {
        auto it = vectors.find(word);
        return it == vectors.end() ? nullptr : &it->second;
    }
};

// Plain text, one `word v1 .. vD` entry per line; an optional leading
// `count dim` header line is detected and skipped. Duplicate words keep
// the first occurrence.
EmbeddingTable load_embeddings(const std::string& path);

// Normalized bag of words over the in-vocabulary tokens of a sentence.
// counts holds the raw occurrence counts behind the weights when the
// distribution came from a sentence; the solver uses them to work in
// exact integer mass units.
struct WordDistribution {
    std::vector<std::string> support;
    std::vector<double> weights;
    std::vector<long long> counts;
};

std::optional<WordDistribution> word_distribution(const TokenSeq& tokens,
                                                  const EmbeddingTable& table);

// Cosine of the element-wise mean embeddings, clamped at 0. Out-of-
// vocabulary tokens are skipped; a fully OOV side scores 0.
double mowe_similarity(const TokenSeq& candidate, const TokenSeq& reference,
                       const EmbeddingTable& table);

// Raw (unclamped) cosine, for diagnostics.
double mowe_cosine(const TokenSeq& candidate, const TokenSeq& reference,
                   const EmbeddingTable& table);

// Exact minimum-cost transport between two word distributions with
// Euclidean ground costs.
double transport_distance(const WordDistribution& a, const WordDistribution& b,
                          const EmbeddingTable& table);

// exp(-WMD). Returns 0 when either sentence is fully out of vocabulary.
double wmd_similarity(const TokenSeq& candidate, const TokenSeq& reference,
                      const EmbeddingTable& table);

std::optional<double> wmd_distance(const TokenSeq& candidate, const TokenSeq& reference,
                                   const EmbeddingTable& table);

}  // namespace lceval

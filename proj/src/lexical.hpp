#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "text.hpp"

namespace lceval {

// Document frequencies of n-grams over a corpus of reference sets; one
// "document" is the pooled reference set of one image.
struct IdfTable {
    int order = 0;
    int doc_count = 0;
    std::unordered_map<std::string, int> doc_frequency;

    // ln(doc_count / df); n-grams never seen count as maximally rare.
    double idf(const std::string& gram) const;
};

// Orders 1..4, as consumed by cider_d.
using IdfSet = std::array<IdfTable, 4>;

// Clipped n-gram precision: candidate counts clipped by the per-gram
// maximum over references.
double ngram_precision(const TokenSeq& candidate, const std::vector<TokenSeq>& references, int n);

// Per-reference clipped unigram overlap over reference length, max over
// references.
double unigram_recall(const TokenSeq& candidate, const std::vector<TokenSeq>& references);

// LCS-based F-measure, max over references.
double rouge_l(const TokenSeq& candidate, const std::vector<TokenSeq>& references,
               double beta = 1.2);

// Unigram alignment in two greedy stages (exact forms, then stems) with a
// fragmentation penalty; no synonym lookup. Max over references.
double meteor_lite(const TokenSeq& candidate, const std::vector<TokenSeq>& references);

IdfTable build_idf(const std::vector<std::vector<TokenSeq>>& reference_sets, int n);
IdfSet build_idf_set(const std::vector<std::vector<TokenSeq>>& reference_sets);

// Consensus tf-idf cosine over n = 1..4 with a Gaussian length penalty,
// averaged over references, normalized into [0,1].
double cider_d(const TokenSeq& candidate, const std::vector<TokenSeq>& references,
               const IdfSet& idf, double sigma = 6.0);

}  // namespace lceval

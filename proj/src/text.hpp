#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace lceval {

// Lowercase word tokens; the shared substrate for every similarity feature.
using TokenSeq = std::vector<std::string>;

// Multiset of n-grams. Keys are the n tokens joined by a single space,
// which is unambiguous because tokens never contain whitespace.
struct NGramBag {
    int order = 0;
    std::unordered_map<std::string, int> counts;
};

// Lowercases, splits on whitespace, strips leading/trailing ASCII
// punctuation from each token, drops tokens that become empty.
TokenSeq tokenize(const std::string& text);

std::string ascii_lower(const std::string& s);

std::string join_tokens(const TokenSeq& tokens);

// Sliding-window n-gram multiset; empty bag when the sequence is shorter
// than n. Throws input_error unless 1 <= n <= 4.
NGramBag ngrams(const TokenSeq& seq, int n);

// Classic dynamic-programming longest-common-subsequence length.
int lcs_length(const TokenSeq& a, const TokenSeq& b);

// Porter's stemming algorithm (1980), original published rule set.
// Expects a lowercase word; non-letters are treated as consonants.
std::string porter_stem(const std::string& word);

}  // namespace lceval

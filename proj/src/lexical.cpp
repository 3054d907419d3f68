#include "lexical.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace lceval {

double IdfTable::idf(const std::string& gram) const {
    if (doc_count <= 0) return 0.0;
    auto it = doc_frequency.find(gram);
    if (it == doc_frequency.end()) return std::log(static_cast<double>(doc_count));
    return std::log(static_cast<double>(doc_count) / static_cast<double>(it->second));
}

double ngram_precision(const TokenSeq& candidate, const std::vector<TokenSeq>& references, int n) {
    NGramBag cand = ngrams(candidate, n);
    if (cand.counts.empty()) return 0.0;
    std::unordered_map<std::string, int> clip;
    for (const auto& ref : references) {
        NGramBag bag = ngrams(ref, n);
        for (const auto& [gram, count] : bag.counts) {
            int& c = clip[gram];
            c = std::max(c, count);
        }
    }
    long long total = 0, matched = 0;
    for (const auto& [gram, count] : cand.counts) {
        total += count;
        auto it = clip.find(gram);
        if (it != clip.end()) matched += std::min(count, it->second);
    }
    return static_cast<double>(matched) / static_cast<double>(total);
}

double unigram_recall(const TokenSeq& candidate, const std::vector<TokenSeq>& references) {
    if (references.empty()) throw input_error("unigram_recall needs at least one reference");
    NGramBag cand = ngrams(candidate, 1);
    double best = 0.0;
    for (const auto& ref : references) {
        if (ref.empty()) continue;
        NGramBag bag = ngrams(ref, 1);
        long long matched = 0;
        for (const auto& [gram, count] : bag.counts) {
            auto it = cand.counts.find(gram);
            if (it != cand.counts.end()) matched += std::min(count, it->second);
        }
        best = std::max(best, static_cast<double>(matched) / static_cast<double>(ref.size()));
    }
    return best;
}

double rouge_l(const TokenSeq& candidate, const std::vector<TokenSeq>& references, double beta) {
    if (beta <= 0.0) throw input_error("rouge_l beta must be positive");
    if (candidate.empty()) return 0.0;
    double best = 0.0;
    for (const auto& ref : references) {
        if (ref.empty()) continue;
        int lcs = lcs_length(candidate, ref);
        double p = static_cast<double>(lcs) / static_cast<double>(candidate.size());
        double r = static_cast<double>(lcs) / static_cast<double>(ref.size());
        double f = 0.0;
        if (p > 0.0 || r > 0.0) f = (1.0 + beta * beta) * p * r / (r + beta * beta * p);
        best = std::max(best, f);
    }
    return best;
}

namespace {

struct Alignment {
    int matches = 0;
    int chunks = 0;
};

// Greedy two-stage unigram alignment: exact surface forms first, then
// stems over whatever is left. Chunks count maximal runs that are
// contiguous and in order on both sides.
Alignment align_unigrams(const TokenSeq& cand, const TokenSeq& ref) {
    const int nc = static_cast<int>(cand.size());
    const int nr = static_cast<int>(ref.size());
    std::vector<int> match_of(nc, -1);
    std::vector<bool> ref_used(nr, false);

    for (int i = 0; i < nc; ++i) {
        for (int j = 0; j < nr; ++j) {
            if (!ref_used[j] && cand[i] == ref[j]) {
                match_of[i] = j;
                ref_used[j] = true;
                break;
            }
        }
    }
    std::vector<std::string> cand_stem(nc), ref_stem(nr);
    for (int i = 0; i < nc; ++i) cand_stem[i] = porter_stem(cand[i]);
    for (int j = 0; j < nr; ++j) ref_stem[j] = porter_stem(ref[j]);
    for (int i = 0; i < nc; ++i) {
        if (match_of[i] >= 0) continue;
        for (int j = 0; j < nr; ++j) {
            if (!ref_used[j] && cand_stem[i] == ref_stem[j]) {
                match_of[i] = j;
                ref_used[j] = true;
                break;
            }
        }
    }

    Alignment a;
    int prev_i = -2, prev_j = -2;
    for (int i = 0; i < nc; ++i) {
        if (match_of[i] < 0) continue;
        ++a.matches;
        if (i != prev_i + 1 || match_of[i] != prev_j + 1) ++a.chunks;
        prev_i = i;
        prev_j = match_of[i];
    }
    return a;
}

}  // namespace

double meteor_lite(const TokenSeq& candidate, const std::vector<TokenSeq>& references) {
    if (references.empty()) throw input_error("meteor_lite needs at least one reference");
    if (candidate.empty()) return 0.0;
    double best = 0.0;
    for (const auto& ref : references) {
        if (ref.empty()) continue;
        Alignment a = align_unigrams(candidate, ref);
        if (a.matches == 0) continue;
        double m = a.matches;
        double p = m / static_cast<double>(candidate.size());
        double r = m / static_cast<double>(ref.size());
        double f = 10.0 * p * r / (r + 9.0 * p);
        double frag = static_cast<double>(a.chunks) / m;
        double score = f * (1.0 - 0.5 * frag * frag * frag);
        best = std::max(best, score);
    }
    return best;
}

IdfTable build_idf(const std::vector<std::vector<TokenSeq>>& reference_sets, int n) {
    if (reference_sets.empty()) throw input_error("build_idf needs at least one reference set");
    IdfTable table;
    table.order = n;
    table.doc_count = static_cast<int>(reference_sets.size());
    for (const auto& refs : reference_sets) {
        std::unordered_map<std::string, bool> seen;
        for (const auto& ref : refs) {
            NGramBag bag = ngrams(ref, n);
            for (const auto& [gram, count] : bag.counts) seen[gram] = true;
        }
        for (const auto& [gram, flag] : seen) ++table.doc_frequency[gram];
    }
    return table;
}

IdfSet build_idf_set(const std::vector<std::vector<TokenSeq>>& reference_sets) {
    IdfSet set;
    for (int n = 1; n <= 4; ++n) set[n - 1] = build_idf(reference_sets, n);
    return set;
}

namespace {

struct TfIdfVec {
    std::unordered_map<std::string, double> weights;
    double norm = 0.0;
};

TfIdfVec tfidf(const TokenSeq& seq, const IdfTable& table, int n) {
    TfIdfVec v;
    NGramBag bag = ngrams(seq, n);
    double sq = 0.0;
    for (const auto& [gram, count] : bag.counts) {
        double w = static_cast<double>(count) * table.idf(gram);
        v.weights[gram] = w;
        sq += w * w;
    }
    v.norm = std::sqrt(sq);
    return v;
}

}  // namespace

double cider_d(const TokenSeq& candidate, const std::vector<TokenSeq>& references,
               const IdfSet& idf, double sigma) {
    for (int n = 1; n <= 4; ++n)
        if (idf[n - 1].order != n)
            throw input_error("cider_d requires idf tables for orders 1..4");
    if (references.empty()) throw input_error("cider_d needs at least one reference");

    double total = 0.0;
    for (int n = 1; n <= 4; ++n) {
        const IdfTable& table = idf[n - 1];
        TfIdfVec cand = tfidf(candidate, table, n);
        std::vector<double> per_ref;
        per_ref.reserve(references.size());
        for (const auto& ref : references) {
            TfIdfVec rv = tfidf(ref, table, n);
            double sim = 0.0;
            if (cand.norm > 0.0 && rv.norm > 0.0) {
                double dot = 0.0;
                for (const auto& [gram, w] : cand.weights) {
                    auto it = rv.weights.find(gram);
                    if (it != rv.weights.end()) dot += std::min(w, it->second) * it->second;
                }
                sim = dot / (cand.norm * rv.norm);
            }
            double delta = static_cast<double>(candidate.size()) - static_cast<double>(ref.size());
            sim *= std::exp(-delta * delta / (2.0 * sigma * sigma));
            per_ref.push_back(sim);
        }
        // Summed in sorted order so reference permutations stay bit-exact.
        std::sort(per_ref.begin(), per_ref.end());
        double sum = 0.0;
        for (double s : per_ref) sum += s;
        total += sum / static_cast<double>(per_ref.size());
    }
    return total / 4.0;
}

}  // namespace lceval

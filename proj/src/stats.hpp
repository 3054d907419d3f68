#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corpus.hpp"

namespace lceval {

// Product-moment correlation. Throws input_error on fewer than two
// points or a zero-variance side.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Pearson over average ranks (ties share the mean rank).
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

// Tie-corrected tau-b by O(n^2) pair counting.
double kendall_tau_b(const std::vector<double>& xs, const std::vector<double>& ys);

// Average ranks, 1-based, ties averaged.
std::vector<double> average_ranks(const std::vector<double>& xs);

struct PearsonTest {
    double r = 0.0;
    double p_value = 1.0;
    size_t n = 0;
};

// Two-sided p-value via the t approximation.
PearsonTest pearson_with_p(const std::vector<double>& xs, const std::vector<double>& ys);

struct ScoredItem {
    double metric_score = 0.0;
    double human_score = 0.0;
    std::optional<std::string> system_id;
};

struct ForcedChoiceCase {
    std::vector<Caption> references;
    Caption option_a;
    Caption option_b;
    char human_preference = 'A';  // 'A' or 'B'
    std::optional<std::string> category;  // e.g. HHC/HHI/HM/MM
    std::optional<std::string> task;      // robustness task tag
};

// Scores one caption against a reference list.
using CaptionScorer = std::function<double(const Caption&, const std::vector<Caption>&)>;

struct AccuracyBucket {
    size_t total = 0;
    size_t correct = 0;
    size_t ties = 0;
    double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

struct PairwiseResult {
    AccuracyBucket overall;
    std::map<std::string, AccuracyBucket> by_category;
};

// A case counts as correct only when the scorer strictly prefers the
// human-preferred option; exact ties are incorrect.
PairwiseResult pairwise_accuracy(const std::vector<ForcedChoiceCase>& cases,
                                 const CaptionScorer& scorer);

// Same decision rule over precomputed (option A, option B) score pairs.
PairwiseResult pairwise_accuracy(const std::vector<ForcedChoiceCase>& cases,
                                 const std::vector<std::pair<double, double>>& scores);

struct RobustnessResult {
    std::map<std::string, AccuracyBucket> by_task;
    double average = 0.0;  // macro average over non-empty tasks
    std::vector<std::string> warnings;
};

// Option A is the correct caption by convention; accuracy per task tag.
RobustnessResult robustness_accuracy(const std::vector<ForcedChoiceCase>& cases,
                                     const CaptionScorer& scorer);
RobustnessResult robustness_accuracy(const std::vector<ForcedChoiceCase>& cases,
                                     const std::vector<std::pair<double, double>>& scores);

struct SweepPoint {
    int k = 0;
    PairwiseResult result;
};

// Pairwise accuracy with reference lists truncated to k = 1, 2, 4, ...
// up to max_refs.
std::vector<SweepPoint> refcount_sweep(const std::vector<ForcedChoiceCase>& cases,
                                       const CaptionScorer& scorer, int max_refs, int step = 2);

struct SystemLevelResult {
    PearsonTest pearson;
    bool degenerate = false;  // exactly two systems
    std::map<std::string, double> system_means;
    std::map<std::string, size_t> system_counts;
};

// Mean metric score per system against per-system human scores.
SystemLevelResult system_level(const std::vector<ScoredItem>& items,
                               const std::map<std::string, double>& human_system_scores);

struct PerturbLexicons {
    std::vector<std::string> person_words;
    std::vector<std::string> scene_words;
};

enum class PerturbTask { replace_person, replace_scene, just_person, just_scene };

std::string perturb_task_name(PerturbTask task);
PerturbTask perturb_task_from_name(const std::string& name);

// Synthetic distractor: replace-* swaps the first lexicon hit for a
// seeded different lexicon word; just-* keeps only that token. Returns
// nothing when the caption has no lexicon hit.
std::optional<Caption> perturb_generate(const Caption& correct, const PerturbLexicons& lexicons,
                                        PerturbTask task, uint64_t seed);

}  // namespace lceval

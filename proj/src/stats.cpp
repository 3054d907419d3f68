#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "errors.hpp"
#include "rng.hpp"

namespace lceval {

namespace {

void check_lengths(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size())
        throw input_error("correlation inputs differ in length: " + std::to_string(xs.size()) +
                          " vs " + std::to_string(ys.size()));
    if (xs.size() < 2) throw input_error("correlation needs at least two points");
    for (double v : xs)
        if (!std::isfinite(v)) throw input_error("non-finite value on the x side");
    for (double v : ys)
        if (!std::isfinite(v)) throw input_error("non-finite value on the y side");
}

}  // namespace

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    check_lengths(xs, ys);
    const size_t n = xs.size();
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0) throw input_error("zero variance on the x side");
    if (syy == 0.0) throw input_error("zero variance on the y side");
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(const std::vector<double>& xs) {
    const size_t n = xs.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    check_lengths(xs, ys);
    return pearson(average_ranks(xs), average_ranks(ys));
}

double kendall_tau_b(const std::vector<double>& xs, const std::vector<double>& ys) {
    check_lengths(xs, ys);
    const size_t n = xs.size();
    long long concordant = 0, discordant = 0, ties_x_only = 0, ties_y_only = 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            bool tx = xs[i] == xs[j];
            bool ty = ys[i] == ys[j];
            if (tx && ty) continue;
            if (tx) {
                ++ties_x_only;
            } else if (ty) {
                ++ties_y_only;
            } else if ((xs[i] < xs[j]) == (ys[i] < ys[j])) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    }
    double left = static_cast<double>(concordant + discordant + ties_x_only);
    double right = static_cast<double>(concordant + discordant + ties_y_only);
    if (left == 0.0) throw input_error("all values tied on the y side");
    if (right == 0.0) throw input_error("all values tied on the x side");
    return static_cast<double>(concordant - discordant) / std::sqrt(left * right);
}

PearsonTest pearson_with_p(const std::vector<double>& xs, const std::vector<double>& ys) {
    PearsonTest out;
    out.r = pearson(xs, ys);
    out.n = xs.size();
    if (out.n < 3 || std::abs(out.r) >= 1.0) {
        out.p_value = out.n < 3 ? 1.0 : 0.0;
        return out;
    }
    double df = static_cast<double>(out.n - 2);
    double t = out.r * std::sqrt(df / (1.0 - out.r * out.r));
    boost::math::students_t dist(df);
    out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return out;
}

namespace {

void tally(char preference, double sa, double sb, AccuracyBucket& bucket) {
    double preferred = preference == 'A' ? sa : sb;
    double other = preference == 'A' ? sb : sa;
    ++bucket.total;
    if (preferred > other)
        ++bucket.correct;
    else if (preferred == other)
        ++bucket.ties;
}

std::vector<std::pair<double, double>> score_cases(const std::vector<ForcedChoiceCase>& cases,
                                                   const CaptionScorer& scorer) {
    std::vector<std::pair<double, double>> out;
    out.reserve(cases.size());
    for (const auto& fc : cases)
        out.emplace_back(scorer(fc.option_a, fc.references), scorer(fc.option_b, fc.references));
    return out;
}

}  // namespace

PairwiseResult pairwise_accuracy(const std::vector<ForcedChoiceCase>& cases,
                                 const std::vector<std::pair<double, double>>& scores) {
    if (cases.empty()) throw input_error("pairwise accuracy over an empty case list");
    if (scores.size() != cases.size())
        throw input_error("score pair count does not match case count");
    PairwiseResult res;
    for (size_t i = 0; i < cases.size(); ++i) {
        const ForcedChoiceCase& fc = cases[i];
        if (fc.option_a.text == fc.option_b.text)
            throw input_error("forced-choice options must differ textually");
        if (fc.human_preference != 'A' && fc.human_preference != 'B')
            throw input_error("human preference must be A or B");
        tally(fc.human_preference, scores[i].first, scores[i].second, res.overall);
        if (fc.category)
            tally(fc.human_preference, scores[i].first, scores[i].second,
                  res.by_category[*fc.category]);
    }
    return res;
}

PairwiseResult pairwise_accuracy(const std::vector<ForcedChoiceCase>& cases,
                                 const CaptionScorer& scorer) {
    return pairwise_accuracy(cases, score_cases(cases, scorer));
}

RobustnessResult robustness_accuracy(const std::vector<ForcedChoiceCase>& cases,
                                     const std::vector<std::pair<double, double>>& scores) {
    if (scores.size() != cases.size())
        throw input_error("score pair count does not match case count");
    RobustnessResult res;
    for (size_t i = 0; i < cases.size(); ++i) {
        const ForcedChoiceCase& fc = cases[i];
        if (!fc.task) throw input_error("robustness case without a task tag");
        // Option A is the correct caption by convention.
        tally('A', scores[i].first, scores[i].second, res.by_task[*fc.task]);
    }
    double sum = 0.0;
    size_t tasks = 0;
    for (auto it = res.by_task.begin(); it != res.by_task.end();) {
        if (it->second.total == 0) {
            res.warnings.push_back("task \"" + it->first + "\" has no cases, omitted");
            it = res.by_task.erase(it);
        } else {
            sum += it->second.accuracy();
            ++tasks;
            ++it;
        }
    }
    res.average = tasks ? sum / tasks : 0.0;
    return res;
}

RobustnessResult robustness_accuracy(const std::vector<ForcedChoiceCase>& cases,
                                     const CaptionScorer& scorer) {
    return robustness_accuracy(cases, score_cases(cases, scorer));
}

std::vector<SweepPoint> refcount_sweep(const std::vector<ForcedChoiceCase>& cases,
                                       const CaptionScorer& scorer, int max_refs, int step) {
    if (max_refs < 1) throw input_error("refcount sweep needs max_refs >= 1");
    if (step < 1) throw input_error("refcount sweep needs step >= 1");
    for (size_t i = 0; i < cases.size(); ++i)
        if (static_cast<int>(cases[i].references.size()) < max_refs)
            throw input_error("case " + std::to_string(i) + " has only " +
                              std::to_string(cases[i].references.size()) + " references, need " +
                              std::to_string(max_refs));
    std::vector<int> ks{1};
    for (int k = step; k <= max_refs; k += step) ks.push_back(k);
    if (ks.back() != max_refs) ks.push_back(max_refs);

    std::vector<SweepPoint> out;
    for (int k : ks) {
        std::vector<ForcedChoiceCase> truncated = cases;
        for (auto& fc : truncated)
            fc.references.resize(static_cast<size_t>(k));
        out.push_back({k, pairwise_accuracy(truncated, scorer)});
    }
    return out;
}

SystemLevelResult system_level(const std::vector<ScoredItem>& items,
                               const std::map<std::string, double>& human_system_scores) {
    std::map<std::string, std::vector<double>> grouped;
    for (const auto& item : items) {
        if (!item.system_id) continue;
        grouped[*item.system_id].push_back(item.metric_score);
    }
    if (grouped.size() < 2) throw input_error("system-level correlation needs at least 2 systems");

    SystemLevelResult res;
    std::vector<double> metric_means, human_scores;
    for (const auto& [system, scores] : grouped) {
        auto it = human_system_scores.find(system);
        if (it == human_system_scores.end())
            throw input_error("no human score for system \"" + system + "\"");
        std::vector<double> sorted = scores;
        std::sort(sorted.begin(), sorted.end());
        double sum = 0.0;
        for (double s : sorted) sum += s;
        double mean = sum / sorted.size();
        res.system_means[system] = mean;
        res.system_counts[system] = scores.size();
        metric_means.push_back(mean);
        human_scores.push_back(it->second);
    }
    res.degenerate = grouped.size() == 2;
    res.pearson = pearson_with_p(metric_means, human_scores);
    return res;
}

std::string perturb_task_name(PerturbTask task) {
    switch (task) {
        case PerturbTask::replace_person: return "replace-person";
        case PerturbTask::replace_scene: return "replace-scene";
        case PerturbTask::just_person: return "just-person";
        default: return "just-scene";
    }
}

PerturbTask perturb_task_from_name(const std::string& name) {
    if (name == "replace-person") return PerturbTask::replace_person;
    if (name == "replace-scene") return PerturbTask::replace_scene;
    if (name == "just-person") return PerturbTask::just_person;
    if (name == "just-scene") return PerturbTask::just_scene;
    throw input_error("unknown perturbation task \"" + name + "\"");
}

std::optional<Caption> perturb_generate(const Caption& correct, const PerturbLexicons& lexicons,
                                        PerturbTask task, uint64_t seed) {
    const bool person =
        task == PerturbTask::replace_person || task == PerturbTask::just_person;
    const std::vector<std::string>& lexicon =
        person ? lexicons.person_words : lexicons.scene_words;
    if (lexicon.empty()) throw input_error("empty perturbation lexicon");

    TokenSeq tokens = correct.token_seq();
    size_t hit = tokens.size();
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (std::find(lexicon.begin(), lexicon.end(), tokens[i]) != lexicon.end()) {
            hit = i;
            break;
        }
    }
    if (hit == tokens.size()) return std::nullopt;

    Caption out;
    if (task == PerturbTask::just_person || task == PerturbTask::just_scene) {
        out.text = tokens[hit];
        return out;
    }
    std::vector<std::string> alternatives;
    for (const auto& w : lexicon)
        if (w != tokens[hit]) alternatives.push_back(w);
    if (alternatives.empty()) return std::nullopt;
    Rng rng(mix_seed(seed, correct.text));
    tokens[hit] = alternatives[uniform_below(rng, alternatives.size())];
    out.text = join_tokens(tokens);
    return out;
}

}  // namespace lceval

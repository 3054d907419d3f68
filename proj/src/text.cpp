#include "text.hpp"

#include <algorithm>
#include <cctype>

#include "errors.hpp"

namespace lceval {

std::string ascii_lower(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

namespace {

bool is_ascii_punct(char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

TokenSeq tokenize(const std::string& text) {
    TokenSeq out;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        while (i < n && is_space(text[i])) ++i;
        size_t start = i;
        while (i < n && !is_space(text[i])) ++i;
        if (i == start) break;
        size_t lo = start, hi = i;
        while (lo < hi && is_ascii_punct(text[lo])) ++lo;
        while (hi > lo && is_ascii_punct(text[hi - 1])) --hi;
        if (hi > lo) out.push_back(ascii_lower(text.substr(lo, hi - lo)));
    }
    return out;
}

std::string join_tokens(const TokenSeq& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

NGramBag ngrams(const TokenSeq& seq, int n) {
    if (n < 1 || n > 4) throw input_error("ngram order must be in [1,4], got " + std::to_string(n));
    NGramBag bag;
    bag.order = n;
    if (seq.size() < static_cast<size_t>(n)) return bag;
    for (size_t i = 0; i + n <= seq.size(); ++i) {
        std::string key = seq[i];
        for (size_t j = 1; j < static_cast<size_t>(n); ++j) {
            key += ' ';
            key += seq[i + j];
        }
        ++bag.counts[key];
    }
    return bag;
}

int lcs_length(const TokenSeq& a, const TokenSeq& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<int> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// ---------------------------------------------------------------------------
// Porter stemmer. A direct transcription of the published algorithm: the
// word is [C](VC)^m[V], rules within a step are matched longest-suffix-first
// and at most one rule per step fires.

namespace {

class PorterWord {
 public:
    explicit PorterWord(std::string w) : w_(std::move(w)) {}

    const std::string& str() const { return w_; }

    bool is_consonant(size_t i) const {
        char c = w_[i];
        switch (c) {
            case 'a': case 'e': case 'i': case 'o': case 'u':
                return false;
            case 'y':
                return i == 0 ? true : !is_consonant(i - 1);
            default:
                return true;
        }
    }

    // Number of VC sequences in w[0..end).
    int measure(size_t end) const {
        int m = 0;
        size_t i = 0;
        while (i < end && is_consonant(i)) ++i;
        while (i < end) {
            while (i < end && !is_consonant(i)) ++i;
            if (i == end) break;
            ++m;
            while (i < end && is_consonant(i)) ++i;
        }
        return m;
    }

    bool has_vowel(size_t end) const {
        for (size_t i = 0; i < end; ++i)
            if (!is_consonant(i)) return true;
        return false;
    }

    bool double_consonant() const {
        size_t n = w_.size();
        return n >= 2 && w_[n - 1] == w_[n - 2] && is_consonant(n - 1);
    }

    // *o: stem ends consonant-vowel-consonant and the final consonant is
    // not w, x or y.
    bool ends_cvc(size_t end) const {
        if (end < 3) return false;
        if (!is_consonant(end - 3) || is_consonant(end - 2) || !is_consonant(end - 1)) return false;
        char c = w_[end - 1];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool ends(const std::string& suffix) const {
        return w_.size() >= suffix.size() &&
               w_.compare(w_.size() - suffix.size(), suffix.size(), suffix) == 0;
    }

    size_t stem_len(const std::string& suffix) const { return w_.size() - suffix.size(); }

    void replace_suffix(const std::string& suffix, const std::string& with) {
        w_.replace(w_.size() - suffix.size(), suffix.size(), with);
    }

    void drop_last() { w_.pop_back(); }

 private:
    std::string w_;
};

struct Rule {
    const char* suffix;
    const char* replacement;
};

// Longest matching suffix wins the step; its m-condition then decides
// whether anything is rewritten.
void apply_rules(PorterWord& w, const Rule* rules, size_t count, int min_measure) {
    const Rule* best = nullptr;
    size_t best_len = 0;
    for (size_t i = 0; i < count; ++i) {
        size_t len = std::char_traits<char>::length(rules[i].suffix);
        if (len > best_len && w.ends(rules[i].suffix)) {
            best = &rules[i];
            best_len = len;
        }
    }
    if (!best) return;
    if (w.measure(w.stem_len(best->suffix)) > min_measure)
        w.replace_suffix(best->suffix, best->replacement);
}

void step1a(PorterWord& w) {
    if (w.ends("sses"))
        w.replace_suffix("sses", "ss");
    else if (w.ends("ies"))
        w.replace_suffix("ies", "i");
    else if (w.ends("ss")) {
        // unchanged
    } else if (w.ends("s"))
        w.replace_suffix("s", "");
}

void step1b(PorterWord& w) {
    if (w.ends("eed")) {
        if (w.measure(w.stem_len("eed")) > 0) w.replace_suffix("eed", "ee");
        return;
    }
    bool stripped = false;
    if (w.ends("ed") && w.has_vowel(w.stem_len("ed"))) {
        w.replace_suffix("ed", "");
        stripped = true;
    } else if (w.ends("ing") && w.has_vowel(w.stem_len("ing"))) {
        w.replace_suffix("ing", "");
        stripped = true;
    }
    if (!stripped) return;
    if (w.ends("at") || w.ends("bl") || w.ends("iz")) {
        w.replace_suffix("", "e");
    } else if (w.double_consonant()) {
        char last = w.str().back();
        if (last != 'l' && last != 's' && last != 'z') w.drop_last();
    } else if (w.measure(w.str().size()) == 1 && w.ends_cvc(w.str().size())) {
        w.replace_suffix("", "e");
    }
}

void step1c(PorterWord& w) {
    if (w.ends("y") && w.has_vowel(w.stem_len("y"))) w.replace_suffix("y", "i");
}

void step2(PorterWord& w) {
    static const Rule rules[] = {
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},   {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
    };
    apply_rules(w, rules, std::size(rules), 0);
}

void step3(PorterWord& w) {
    static const Rule rules[] = {
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    };
    apply_rules(w, rules, std::size(rules), 0);
}

void step4(PorterWord& w) {
    static const Rule rules[] = {
        {"al", ""},  {"ance", ""}, {"ence", ""}, {"er", ""},    {"ic", ""},
        {"able", ""}, {"ible", ""}, {"ant", ""},  {"ement", ""}, {"ment", ""},
        {"ent", ""},  {"ou", ""},   {"ism", ""},  {"ate", ""},   {"iti", ""},
        {"ous", ""},  {"ive", ""},  {"ize", ""},
    };
    const Rule* best = nullptr;
    size_t best_len = 0;
    for (const Rule& r : rules) {
        size_t len = std::char_traits<char>::length(r.suffix);
        if (len > best_len && w.ends(r.suffix)) {
            best = &r;
            best_len = len;
        }
    }
    // "ion" only counts with a stem ending in s or t, and competes at
    // length 3 with the plain suffixes above.
    bool ion = false;
    if (best_len < 3 && w.ends("ion")) {
        size_t sl = w.stem_len("ion");
        if (sl > 0 && (w.str()[sl - 1] == 's' || w.str()[sl - 1] == 't')) {
            ion = true;
            best_len = 3;
        }
    }
    if (ion) {
        if (w.measure(w.stem_len("ion")) > 1) w.replace_suffix("ion", "");
    } else if (best) {
        if (w.measure(w.stem_len(best->suffix)) > 1) w.replace_suffix(best->suffix, "");
    }
}

void step5a(PorterWord& w) {
    if (!w.ends("e")) return;
    size_t stem = w.stem_len("e");
    int m = w.measure(stem);
    if (m > 1 || (m == 1 && !w.ends_cvc(stem))) w.drop_last();
}

void step5b(PorterWord& w) {
    if (w.double_consonant() && w.str().back() == 'l' && w.measure(w.str().size()) > 1)
        w.drop_last();
}

}  // namespace

std::string porter_stem(const std::string& word) {
    if (word.size() <= 2) return word;
    PorterWord w(word);
    step1a(w);
    step1b(w);
    step1c(w);
    step2(w);
    step3(w);
    step4(w);
    step5a(w);
    step5b(w);
    return w.str();
}

}  // namespace lceval

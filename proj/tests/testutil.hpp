#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

namespace testutil {

// Scratch directory removed on destruction.
class TempDir {
 public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        auto base = std::filesystem::temp_directory_path();
        path_ = base / ("lceval-test-" + std::to_string(::getpid()) + "-" +
                        std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

 private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// A small self-contained corpus: records JSONL with inline parses plus a
// matching embeddings file, enough to run the full default manifest.
struct DemoCorpus {
    std::string records_path;
    std::string embeddings_path;
    int n_records = 0;
};

inline DemoCorpus make_demo_corpus(const TempDir& dir, int images = 6,
                                   const std::string& prefix = "") {
    using nlohmann::json;
    static const std::vector<std::string> subjects{"man", "woman", "boy", "girl"};
    static const std::vector<std::string> verbs{"rides", "walks", "holds", "watches"};
    static const std::vector<std::string> objects{"horse", "dog", "kite", "bike"};
    static const std::vector<std::string> places{"beach", "park", "street", "field"};

    auto sentence = [&](int img, int variant) {
        std::vector<std::string> toks{"a", subjects[(img + variant) % 4],
                                      verbs[(img + 2 * variant) % 4], "a",
                                      objects[(img + variant) % 4], "on", "the",
                                      places[(img + 3 * variant) % 4]};
        return toks;
    };
    auto join = [](const std::vector<std::string>& toks) {
        std::string s;
        for (size_t i = 0; i < toks.size(); ++i) {
            if (i) s += ' ';
            s += toks[i];
        }
        return s;
    };
    auto chain_heads = [](size_t n) {
        std::vector<int> heads;
        for (size_t i = 0; i < n; ++i)
            heads.push_back(i + 1 == n ? 0 : static_cast<int>(i) + 2);
        return heads;
    };

    DemoCorpus corpus;
    corpus.records_path = dir.file(prefix + "records.jsonl");
    std::ofstream rec_out(corpus.records_path);
    for (int img = 0; img < images; ++img) {
        for (int cand = 0; cand < 2; ++cand) {
            bool human = cand == 0;
            std::vector<std::string> cand_toks = sentence(img, human ? 0 : 5);
            if (!human) {
                // machine captions read clumsier: repeat the article
                cand_toks[3] = "a";
                cand_toks[5] = "a";
            }
            json j;
            j["image_id"] = "img" + std::to_string(img);
            j["candidate"] = join(cand_toks);
            j["candidate_tokens"] = cand_toks;
            j["candidate_heads"] = chain_heads(cand_toks.size());
            json refs = json::array(), ref_toks = json::array(), ref_heads = json::array();
            for (int r = 1; r <= 3; ++r) {
                std::vector<std::string> toks = sentence(img, r);
                refs.push_back(join(toks));
                ref_toks.push_back(toks);
                ref_heads.push_back(chain_heads(toks.size()));
            }
            j["references"] = refs;
            j["reference_tokens"] = ref_toks;
            j["reference_heads"] = ref_heads;
            j["label"] = human ? "human" : "machine";
            j["human_score"] = human ? 3.0 + (img % 2) : 1.0 + 0.5 * (img % 3);
            if (!human) j["system_id"] = img % 2 ? "sysA" : "sysB";
            rec_out << j.dump() << '\n';
            ++corpus.n_records;
        }
    }
    rec_out.close();

    corpus.embeddings_path = dir.file(prefix + "embeddings.txt");
    std::ofstream emb(corpus.embeddings_path);
    std::vector<std::string> vocab{"a", "on", "the"};
    for (const auto& pool : {subjects, verbs, objects, places})
        vocab.insert(vocab.end(), pool.begin(), pool.end());
    for (const auto& word : vocab) {
        std::mt19937_64 h(std::hash<std::string>{}(word) ^ 0x9e3779b97f4a7c15ull);
        emb << word;
        for (int d = 0; d < 5; ++d)
            emb << ' ' << (static_cast<double>(h() >> 11) * 0x1.0p-53 * 2.0 - 1.0);
        emb << '\n';
    }
    return corpus;
}

// Exhaustive longest-common-subsequence oracle: enumerate all
// subsequences of the shorter side and test containment in the other.
inline int lcs_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::vector<std::string>& small = a.size() <= b.size() ? a : b;
    const std::vector<std::string>& large = a.size() <= b.size() ? b : a;
    int best = 0;
    const size_t n = small.size();
    for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
        std::vector<std::string> sub;
        for (size_t i = 0; i < n; ++i)
            if (mask & (size_t{1} << i)) sub.push_back(small[i]);
        size_t at = 0;
        for (const auto& tok : large) {
            if (at < sub.size() && tok == sub[at]) ++at;
        }
        if (at == sub.size()) best = std::max(best, static_cast<int>(sub.size()));
    }
    return best;
}

}  // namespace testutil

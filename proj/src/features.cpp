#include "features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "errors.hpp"

namespace lceval {

using nlohmann::json;

std::string aggregation_name(Aggregation mode) {
    switch (mode) {
        case Aggregation::max: return "max";
        case Aggregation::min: return "min";
        default: return "mean";
    }
}

Aggregation aggregation_from_name(const std::string& name) {
    if (name == "max") return Aggregation::max;
    if (name == "min") return Aggregation::min;
    if (name == "mean") return Aggregation::mean;
    throw input_error("unknown aggregation \"" + name + "\"");
}

namespace {

bool is_builtin(const std::string& name, int* hwcm_depth = nullptr) {
    if (name == "p1" || name == "p2" || name == "p3" || name == "p4" || name == "recall1" ||
        name == "rougeL" || name == "meteorLite" || name == "ciderD" || name == "mowe" ||
        name == "wmd")
        return true;
    if (name.size() == 5 && name.rfind("hwcm", 0) == 0 && name[4] >= '1' && name[4] <= '4') {
        if (hwcm_depth) *hwcm_depth = name[4] - '0';
        return true;
    }
    return false;
}

}  // namespace

FeatureManifest FeatureManifest::default_manifest() {
    FeatureManifest m;
    m.names = {"p1", "p2", "p3", "p4", "recall1", "rougeL", "meteorLite", "ciderD",
               "mowe", "wmd", "hwcm2", "hwcm3"};
    return m;
}

void FeatureManifest::validate() const {
    if (names.empty()) throw input_error("feature manifest has no features");
    for (size_t i = 0; i < names.size(); ++i)
        for (size_t j = i + 1; j < names.size(); ++j)
            if (names[i] == names[j])
                throw input_error("duplicate feature name \"" + names[i] + "\" in manifest");
    for (const auto& name : names) {
        if (is_builtin(name)) continue;
        if (std::find(external.begin(), external.end(), name) == external.end())
            throw input_error("feature \"" + name +
                              "\" is neither built in nor declared external");
    }
    if (rouge_beta <= 0.0) throw input_error("rouge beta must be positive");
    if (cider_sigma <= 0.0) throw input_error("cider sigma must be positive");
}

bool FeatureManifest::wants(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

bool FeatureManifest::needs_embeddings() const { return wants("mowe") || wants("wmd"); }
bool FeatureManifest::needs_idf() const { return wants("ciderD"); }

bool FeatureManifest::needs_parses() const {
    for (const auto& n : names) {
        int depth = 0;
        if (is_builtin(n, &depth) && depth > 0) return true;
    }
    return false;
}

std::string FeatureManifest::to_json() const {
    json j;
    j["names"] = names;
    j["aggregation"] = aggregation_name(aggregation);
    j["options"] = {{"rouge_beta", rouge_beta},
                    {"cider_sigma", cider_sigma},
                    {"external", external}};
    return j.dump();
}

FeatureManifest FeatureManifest::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw input_error(std::string("malformed manifest JSON: ") + e.what());
    }
    FeatureManifest m;
    if (!j.contains("names") || !j["names"].is_array())
        throw input_error("manifest needs a \"names\" array");
    m.names = j["names"].get<std::vector<std::string>>();
    if (j.contains("aggregation"))
        m.aggregation = aggregation_from_name(j["aggregation"].get<std::string>());
    if (j.contains("options")) {
        const json& o = j["options"];
        if (o.contains("rouge_beta")) m.rouge_beta = o["rouge_beta"].get<double>();
        if (o.contains("cider_sigma")) m.cider_sigma = o["cider_sigma"].get<double>();
        if (o.contains("external")) m.external = o["external"].get<std::vector<std::string>>();
    }
    m.validate();
    return m;
}

double aggregate(const std::vector<double>& per_reference_scores, Aggregation mode) {
    if (per_reference_scores.empty()) throw input_error("aggregate over empty score list");
    switch (mode) {
        case Aggregation::max:
            return *std::max_element(per_reference_scores.begin(), per_reference_scores.end());
        case Aggregation::min:
            return *std::min_element(per_reference_scores.begin(), per_reference_scores.end());
        default: {
            // Sorted before summing so the mean is permutation-exact.
            std::vector<double> sorted = per_reference_scores;
            std::sort(sorted.begin(), sorted.end());
            double sum = 0.0;
            for (double v : sorted) sum += v;
            return sum / static_cast<double>(sorted.size());
        }
    }
}

IdfSet build_corpus_idf(const std::vector<CandidateRecord>& records) {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<TokenSeq>> by_image;
    for (const auto& rec : records) {
        auto [it, inserted] = by_image.try_emplace(rec.image_id);
        if (inserted) order.push_back(rec.image_id);
        for (const auto& ref : rec.references) it->second.push_back(ref.token_seq());
    }
    std::vector<std::vector<TokenSeq>> sets;
    sets.reserve(order.size());
    for (const auto& id : order) sets.push_back(std::move(by_image[id]));
    return build_idf_set(sets);
}

namespace {

DepParse parse_of(const Caption& caption, const std::string& what, const std::string& where) {
    if (!caption.has_parse())
        throw input_error(where + ": missing " + what + " parse");
    return DepParse{*caption.tokens, *caption.heads};
}

}  // namespace

FeatureVector extract_features(const CandidateRecord& record, const FeatureResources& resources,
                               const FeatureManifest& manifest, size_t index,
                               std::function<void(const std::string&)> warn) {
    manifest.validate();
    const std::string where = "record " + std::to_string(index) + " (" + record.image_id + ")";
    if (record.references.empty()) throw input_error(where + ": no references");

    const TokenSeq cand = record.candidate.token_seq();
    std::vector<TokenSeq> refs;
    refs.reserve(record.references.size());
    for (const auto& r : record.references) refs.push_back(r.token_seq());

    const Aggregation mode = manifest.aggregation;
    auto per_ref = [&](auto&& score_one) {
        std::vector<double> scores;
        scores.reserve(refs.size());
        for (size_t i = 0; i < refs.size(); ++i) scores.push_back(score_one(i));
        return aggregate(scores, mode);
    };

    std::optional<std::vector<DepParse>> ref_parses;
    std::optional<DepParse> cand_parse;
    auto ensure_parses = [&](const std::string& feature) {
        if (cand_parse) return;
        if (!record.candidate.has_parse())
            throw input_error(where + ": feature " + feature + " needs a candidate parse");
        cand_parse = parse_of(record.candidate, "candidate", where);
        ref_parses.emplace();
        for (size_t i = 0; i < record.references.size(); ++i) {
            if (!record.references[i].has_parse())
                throw input_error(where + ": feature " + feature + " needs a parse for reference " +
                                  std::to_string(i));
            ref_parses->push_back(parse_of(record.references[i], "reference", where));
        }
    };

    auto warn_once = [&, warned = false](const std::string& msg) mutable {
        if (warned) return;
        warned = true;
        if (warn) warn(where + ": " + msg);
    };

    FeatureVector fv;
    fv.image_id = record.image_id;
    fv.index = index;
    fv.label = record.label;
    fv.human_score = record.human_score;
    fv.system_id = record.system_id;
    fv.values.reserve(manifest.names.size());

    for (const auto& name : manifest.names) {
        double value = 0.0;
        int depth = 0;
        if (name == "p1" || name == "p2" || name == "p3" || name == "p4") {
            int n = name[1] - '0';
            if (mode == Aggregation::max) {
                value = ngram_precision(cand, refs, n);
            } else {
                value = per_ref([&](size_t i) {
                    return ngram_precision(cand, {refs[i]}, n);
                });
            }
        } else if (name == "recall1") {
            value = per_ref([&](size_t i) {
                return refs[i].empty() ? 0.0 : unigram_recall(cand, {refs[i]});
            });
        } else if (name == "rougeL") {
            value = rouge_l(cand, refs, manifest.rouge_beta);
        } else if (name == "meteorLite") {
            value = meteor_lite(cand, refs);
        } else if (name == "ciderD") {
            if (!resources.idf)
                throw input_error(where + ": feature ciderD needs idf tables");
            value = cider_d(cand, refs, *resources.idf, manifest.cider_sigma);
        } else if (name == "mowe") {
            if (!resources.embeddings)
                throw input_error(where + ": feature mowe needs an embedding table");
            value = per_ref([&](size_t i) {
                return mowe_similarity(cand, refs[i], *resources.embeddings);
            });
        } else if (name == "wmd") {
            if (!resources.embeddings)
                throw input_error(where + ": feature wmd needs an embedding table");
            value = per_ref([&](size_t i) {
                auto d = wmd_distance(cand, refs[i], *resources.embeddings);
                if (!d) {
                    warn_once("wmd: a sentence is fully out of vocabulary, feature set to 0");
                    return 0.0;
                }
                return std::exp(-*d);
            });
        } else if (is_builtin(name, &depth) && depth > 0) {
            ensure_parses(name);
            value = per_ref([&](size_t i) {
                return hwcm_single(*cand_parse, (*ref_parses)[i], depth);
            });
        } else {
            auto it = record.external_scores.find(name);
            if (it == record.external_scores.end())
                throw input_error(where + ": required external score \"" + name + "\" missing");
            value = it->second;
        }
        if (!std::isfinite(value) || value < 0.0 || value > 1.0)
            throw internal_error(where + ": feature " + name + " produced out-of-range value " +
                                 std::to_string(value));
        fv.values.push_back(value);
    }
    return fv;
}

void write_features(const std::vector<FeatureVector>& vectors, const FeatureManifest& manifest,
                    const std::string& path) {
    manifest.validate();
    std::ofstream out(path);
    if (!out) throw input_error("cannot write feature file " + path);
    out << manifest.to_json() << '\n';
    for (const auto& fv : vectors) {
        if (fv.values.size() != manifest.names.size())
            throw internal_error("feature vector length " + std::to_string(fv.values.size()) +
                                 " does not match manifest length " +
                                 std::to_string(manifest.names.size()));
        json j;
        j["values"] = fv.values;
        j["image_id"] = fv.image_id;
        j["label"] = label_name(fv.label);
        if (fv.human_score) j["human_score"] = *fv.human_score;
        if (fv.system_id) j["system_id"] = *fv.system_id;
        out << j.dump() << '\n';
    }
}

FeatureFile read_features(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open feature file " + path);
    std::string line;
    if (!std::getline(in, line)) throw input_error(path + ": empty feature file");
    FeatureFile file;
    file.manifest = FeatureManifest::from_json(line);
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw input_error(where + ": malformed JSON: " + e.what());
        }
        FeatureVector fv;
        if (!j.contains("values") || !j["values"].is_array())
            throw input_error(where + ": missing \"values\" array");
        fv.values = j["values"].get<std::vector<double>>();
        if (fv.values.size() != file.manifest.names.size())
            throw input_error(where + ": " + std::to_string(fv.values.size()) +
                              " values against a " + std::to_string(file.manifest.names.size()) +
                              "-name manifest");
        for (double v : fv.values)
            if (!std::isfinite(v) || v < 0.0 || v > 1.0)
                throw input_error(where + ": feature value outside [0,1]");
        if (j.contains("image_id")) fv.image_id = j["image_id"].get<std::string>();
        if (j.contains("label")) fv.label = label_from_name(j["label"].get<std::string>());
        if (j.contains("human_score") && !j["human_score"].is_null())
            fv.human_score = j["human_score"].get<double>();
        if (j.contains("system_id") && !j["system_id"].is_null())
            fv.system_id = j["system_id"].get<std::string>();
        fv.index = file.vectors.size();
        file.vectors.push_back(std::move(fv));
    }
    return file;
}

}  // namespace lceval

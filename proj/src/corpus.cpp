#include "corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "errors.hpp"
#include "rng.hpp"

namespace lceval {

using nlohmann::json;

std::string label_name(Label label) {
    switch (label) {
        case Label::human: return "human";
        case Label::machine: return "machine";
        default: return "unknown";
    }
}

Label label_from_name(const std::string& name) {
    if (name == "human") return Label::human;
    if (name == "machine") return Label::machine;
    if (name == "unknown") return Label::unknown;
    throw input_error("unknown label \"" + name + "\"");
}

TokenSeq Caption::token_seq() const {
    if (tokens) return *tokens;
    return tokenize(text);
}

namespace {

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

// Most frequent judgment; a full tie falls back to the median.
double reduce_judgments(const std::vector<double>& vals) {
    std::map<double, int> freq;
    for (double v : vals) ++freq[v];
    int best = 0;
    bool tie = false;
    double mode = vals.front();
    for (const auto& [v, c] : freq) {
        if (c > best) {
            best = c;
            mode = v;
            tie = false;
        } else if (c == best) {
            tie = true;
        }
    }
    if (!tie) return mode;
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    size_t n = sorted.size();
    return n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

void check_parse(const TokenSeq& tokens, const std::vector<int>& heads, const std::string& where) {
    if (heads.size() != tokens.size())
        throw input_error(where + ": parse has " + std::to_string(heads.size()) +
                          " heads for " + std::to_string(tokens.size()) + " tokens");
    int roots = 0;
    for (int h : heads) {
        if (h < 0 || h > static_cast<int>(tokens.size()))
            throw input_error(where + ": head index " + std::to_string(h) +
                              " outside [0," + std::to_string(tokens.size()) + "]");
        if (h == 0) ++roots;
    }
    if (roots != 1)
        throw input_error(where + ": parse must have exactly one root, found " +
                          std::to_string(roots));
}

TokenSeq lowered_tokens(const json& arr, const std::string& where) {
    TokenSeq out;
    for (const auto& t : arr) {
        if (!t.is_string()) throw input_error(where + ": token list must hold strings");
        std::string tok = ascii_lower(t.get<std::string>());
        if (tok.empty()) throw input_error(where + ": empty token");
        out.push_back(std::move(tok));
    }
    return out;
}

CandidateRecord parse_record(const json& j, const std::string& where) {
    if (!j.is_object()) throw input_error(where + ": record must be a JSON object");
    CandidateRecord rec;

    if (!j.contains("image_id") || !j["image_id"].is_string())
        throw input_error(where + ": missing or non-string field \"image_id\"");
    rec.image_id = j["image_id"].get<std::string>();

    if (!j.contains("candidate") || !j["candidate"].is_string())
        throw input_error(where + ": missing or non-string field \"candidate\"");
    rec.candidate.text = j["candidate"].get<std::string>();
    if (blank(rec.candidate.text))
        throw input_error(where + ": field \"candidate\" is empty");

    if (j.contains("candidate_tokens"))
        rec.candidate.tokens = lowered_tokens(j["candidate_tokens"], where + ", candidate_tokens");
    if (j.contains("candidate_heads")) {
        if (!rec.candidate.tokens)
            throw input_error(where + ": \"candidate_heads\" requires \"candidate_tokens\"");
        rec.candidate.heads = j["candidate_heads"].get<std::vector<int>>();
        check_parse(*rec.candidate.tokens, *rec.candidate.heads, where + ", candidate");
    }

    if (!j.contains("references") || !j["references"].is_array() || j["references"].empty())
        throw input_error(where + ": field \"references\" must be a non-empty array");
    for (const auto& r : j["references"]) {
        if (!r.is_string()) throw input_error(where + ": references must be strings");
        Caption ref;
        ref.text = r.get<std::string>();
        if (blank(ref.text)) throw input_error(where + ": empty reference");
        rec.references.push_back(std::move(ref));
    }

    auto parallel = [&](const char* field) {
        if (!j.contains(field)) return;
        const json& arr = j[field];
        if (!arr.is_array() || arr.size() != rec.references.size())
            throw input_error(where + ": \"" + field + "\" must parallel \"references\"");
    };
    parallel("reference_tokens");
    parallel("reference_heads");
    if (j.contains("reference_tokens")) {
        for (size_t i = 0; i < rec.references.size(); ++i) {
            const json& t = j["reference_tokens"][i];
            if (t.is_null()) continue;
            rec.references[i].tokens =
                lowered_tokens(t, where + ", reference_tokens[" + std::to_string(i) + "]");
        }
    }
    if (j.contains("reference_heads")) {
        for (size_t i = 0; i < rec.references.size(); ++i) {
            const json& h = j["reference_heads"][i];
            if (h.is_null()) continue;
            if (!rec.references[i].tokens)
                throw input_error(where + ": reference_heads[" + std::to_string(i) +
                                  "] requires matching reference_tokens");
            rec.references[i].heads = h.get<std::vector<int>>();
            check_parse(*rec.references[i].tokens, *rec.references[i].heads,
                        where + ", reference " + std::to_string(i));
        }
    }

    if (j.contains("label")) {
        if (!j["label"].is_string()) throw input_error(where + ": field \"label\" must be a string");
        rec.label = label_from_name(j["label"].get<std::string>());
    }

    if (j.contains("human_score") && !j["human_score"].is_null()) {
        const json& hs = j["human_score"];
        if (hs.is_number()) {
            rec.human_score = hs.get<double>();
        } else if (hs.is_array() && !hs.empty()) {
            std::vector<double> vals;
            for (const auto& v : hs) {
                if (!v.is_number())
                    throw input_error(where + ": field \"human_score\" array must hold numbers");
                vals.push_back(v.get<double>());
            }
            rec.human_score = reduce_judgments(vals);
        } else {
            throw input_error(where + ": field \"human_score\" must be a number or array");
        }
        if (!std::isfinite(*rec.human_score))
            throw input_error(where + ": field \"human_score\" is not finite");
    }

    if (j.contains("system_id") && !j["system_id"].is_null()) {
        if (!j["system_id"].is_string())
            throw input_error(where + ": field \"system_id\" must be a string");
        rec.system_id = j["system_id"].get<std::string>();
    }

    if (j.contains("external_scores") && !j["external_scores"].is_null()) {
        if (!j["external_scores"].is_object())
            throw input_error(where + ": field \"external_scores\" must be an object");
        for (const auto& [k, v] : j["external_scores"].items()) {
            if (!v.is_number())
                throw input_error(where + ": external score \"" + k + "\" must be a number");
            double d = v.get<double>();
            if (!(d >= 0.0 && d <= 1.0))
                throw input_error(where + ": external score \"" + k + "\" outside [0,1]");
            rec.external_scores[k] = d;
        }
    }
    return rec;
}

}  // namespace

std::vector<CandidateRecord> parse_record_lines(const std::vector<std::string>& lines,
                                                const std::string& source_name) {
    std::vector<CandidateRecord> out;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const std::string where = source_name + ":" + std::to_string(i + 1);
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::exception& e) {
            throw input_error(where + ": malformed JSON: " + e.what());
        }
        out.push_back(parse_record(j, where));
    }
    return out;
}

std::vector<CandidateRecord> load_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open records file " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return parse_record_lines(lines, path);
}

std::string record_to_json_line(const CandidateRecord& rec) {
    json j;
    j["image_id"] = rec.image_id;
    j["candidate"] = rec.candidate.text;
    if (rec.candidate.tokens) j["candidate_tokens"] = *rec.candidate.tokens;
    if (rec.candidate.heads) j["candidate_heads"] = *rec.candidate.heads;
    json refs = json::array();
    for (const auto& r : rec.references) refs.push_back(r.text);
    j["references"] = refs;
    bool any_tokens = std::any_of(rec.references.begin(), rec.references.end(),
                                  [](const Caption& c) { return c.tokens.has_value(); });
    bool any_heads = std::any_of(rec.references.begin(), rec.references.end(),
                                 [](const Caption& c) { return c.heads.has_value(); });
    if (any_tokens) {
        json arr = json::array();
        for (const auto& r : rec.references)
            arr.push_back(r.tokens ? json(*r.tokens) : json(nullptr));
        j["reference_tokens"] = arr;
    }
    if (any_heads) {
        json arr = json::array();
        for (const auto& r : rec.references)
            arr.push_back(r.heads ? json(*r.heads) : json(nullptr));
        j["reference_heads"] = arr;
    }
    j["label"] = label_name(rec.label);
    if (rec.human_score) j["human_score"] = *rec.human_score;
    if (rec.system_id) j["system_id"] = *rec.system_id;
    if (!rec.external_scores.empty()) j["external_scores"] = rec.external_scores;
    return j.dump();
}

void save_records(const std::vector<CandidateRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write records file " + path);
    for (const auto& rec : records) out << record_to_json_line(rec) << '\n';
}

std::vector<CandidateRecord> pair_leave_out(const std::string& image_id,
                                            const std::vector<Caption>& human_captions,
                                            const std::vector<MachineCaption>& machine_captions,
                                            const PairingPolicy& policy) {
    if (policy.refs_per_candidate < 1)
        throw input_error("refs_per_candidate must be at least 1");
    if (human_captions.size() != 5)
        throw input_error("leave-out pairing for image \"" + image_id + "\" needs exactly 5 human captions, got " +
                          std::to_string(human_captions.size()));
    const size_t refs_h = static_cast<size_t>(policy.refs_per_candidate);
    if (refs_h > human_captions.size() - 1)
        throw input_error("refs_per_candidate " + std::to_string(policy.refs_per_candidate) +
                          " exceeds the remaining human captions");

    Rng rng(mix_seed(policy.rng_seed, image_id));
    std::vector<CandidateRecord> out;

    // As many human candidates as machine ones, so both classes appear
    // in equal number per image.
    size_t n_human = std::min(machine_captions.size(), human_captions.size());
    std::vector<size_t> chosen = sample_indices(rng, human_captions.size(), n_human);
    std::sort(chosen.begin(), chosen.end());
    for (size_t idx : chosen) {
        CandidateRecord rec;
        rec.image_id = image_id;
        rec.candidate = human_captions[idx];
        rec.label = Label::human;
        std::vector<size_t> remaining;
        for (size_t i = 0; i < human_captions.size(); ++i)
            if (i != idx) remaining.push_back(i);
        if (refs_h < remaining.size()) {
            std::vector<size_t> pick = sample_indices(rng, remaining.size(), refs_h);
            std::sort(pick.begin(), pick.end());
            for (size_t p : pick) rec.references.push_back(human_captions[remaining[p]]);
        } else {
            for (size_t i : remaining) rec.references.push_back(human_captions[i]);
        }
        out.push_back(std::move(rec));
    }

    size_t refs_m = std::min(refs_h, human_captions.size());
    for (const auto& mc : machine_captions) {
        CandidateRecord rec;
        rec.image_id = image_id;
        rec.candidate = mc.caption;
        rec.label = Label::machine;
        rec.system_id = mc.system_id;
        std::vector<size_t> pick = sample_indices(rng, human_captions.size(), refs_m);
        std::sort(pick.begin(), pick.end());
        for (size_t p : pick) rec.references.push_back(human_captions[p]);
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<CandidateRecord> filter_by_system(const std::vector<CandidateRecord>& records,
                                              const std::vector<std::string>& system_ids) {
    std::vector<CandidateRecord> out;
    for (const auto& rec : records) {
        if (rec.label == Label::human) {
            out.push_back(rec);
        } else if (rec.label == Label::machine && rec.system_id &&
                   std::find(system_ids.begin(), system_ids.end(), *rec.system_id) !=
                       system_ids.end()) {
            out.push_back(rec);
        }
    }
    return out;
}

}  // namespace lceval

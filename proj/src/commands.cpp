#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "corpus.hpp"
#include "errors.hpp"
#include "features.hpp"
#include "model.hpp"
#include "semantic.hpp"
#include "stats.hpp"
#include "syntactic.hpp"

namespace lceval {

using nlohmann::json;

namespace {

std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Every run leaves its fully resolved configuration next to the primary
// output; the data files themselves stay timestamp-free so reruns are
// byte-identical.
void write_run_sidecar(const std::string& command, const json& config,
                       const std::string& primary_out) {
    json j;
    j["command"] = command;
    j["config"] = config;
    j["timestamp"] = iso_timestamp();
    j["version"] = kVersion;
    std::ofstream out(primary_out + ".run.json");
    if (!out) throw input_error("cannot write run sidecar for " + primary_out);
    out << j.dump(2) << '\n';
}

std::string require_string(const json& config, const std::string& key) {
    if (!config.contains(key) || !config[key].is_string())
        throw input_error("run config needs string field \"" + key + "\"");
    return config[key].get<std::string>();
}

uint64_t seed_of(const json& config, const char* key = "seed") {
    return config.value(key, uint64_t{0});
}

FeatureManifest manifest_from_config(const json& config) {
    FeatureManifest m = FeatureManifest::default_manifest();
    if (config.contains("features")) m.names = config["features"].get<std::vector<std::string>>();
    if (config.contains("aggregation"))
        m.aggregation = aggregation_from_name(config["aggregation"].get<std::string>());
    if (config.contains("rouge_beta")) m.rouge_beta = config["rouge_beta"].get<double>();
    if (config.contains("cider_sigma")) m.cider_sigma = config["cider_sigma"].get<double>();
    if (config.contains("external")) m.external = config["external"].get<std::vector<std::string>>();
    m.validate();
    return m;
}

// Sidecar parses: candidate first, then one parse per reference, for each
// record in file order.
void attach_sidecar_parses(std::vector<CandidateRecord>& records,
                           const std::vector<DepParse>& parses) {
    size_t needed = 0;
    for (const auto& rec : records) needed += 1 + rec.references.size();
    if (parses.size() != needed)
        throw input_error("parse sidecar holds " + std::to_string(parses.size()) +
                          " sentences, records need " + std::to_string(needed));
    size_t at = 0;
    for (auto& rec : records) {
        rec.candidate.tokens = parses[at].tokens;
        rec.candidate.heads = parses[at].heads;
        ++at;
        for (auto& ref : rec.references) {
            ref.tokens = parses[at].tokens;
            ref.heads = parses[at].heads;
            ++at;
        }
    }
}

}  // namespace

void cmd_extract(const json& config) {
    const std::string records_path = require_string(config, "records");
    const std::string out_path = require_string(config, "out");
    FeatureManifest manifest = manifest_from_config(config);

    std::vector<CandidateRecord> records = load_records(records_path);
    if (config.contains("systems"))
        records = filter_by_system(records, config["systems"].get<std::vector<std::string>>());

    if (config.contains("parses"))
        attach_sidecar_parses(records, load_parse_sidecar(config["parses"].get<std::string>()));

    std::optional<EmbeddingTable> embeddings;
    if (config.contains("embeddings"))
        embeddings = load_embeddings(config["embeddings"].get<std::string>());
    if (manifest.needs_embeddings() && !embeddings)
        throw input_error("manifest needs semantic features; pass an embeddings file");

    std::optional<IdfSet> idf;
    if (manifest.needs_idf()) idf = build_corpus_idf(records);

    FeatureResources resources;
    if (embeddings) resources.embeddings = &*embeddings;
    if (idf) resources.idf = &*idf;

    const int workers = std::max(1, config.value("workers", 1));
    std::vector<std::optional<FeatureVector>> results(records.size());
    std::vector<std::pair<size_t, std::string>> errors;
    std::mutex err_mutex;
    auto warn = [&](const std::string& msg) {
        std::lock_guard lock(err_mutex);
        std::cerr << "warning: " << msg << '\n';
    };
    auto work = [&](size_t begin, size_t step) {
        for (size_t i = begin; i < records.size(); i += step) {
            try {
                results[i] = extract_features(records[i], resources, manifest, i, warn);
            } catch (const std::exception& e) {
                std::lock_guard lock(err_mutex);
                errors.emplace_back(i, e.what());
            }
        }
    };
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
        for (auto& t : pool) t.join();
    }

    std::vector<FeatureVector> vectors;
    for (auto& r : results)
        if (r) vectors.push_back(std::move(*r));
    write_features(vectors, manifest, out_path);
    write_run_sidecar("extract", config, out_path);
    std::cout << "wrote " << vectors.size() << " feature vectors to " << out_path << '\n';

    if (!errors.empty()) {
        std::sort(errors.begin(), errors.end());
        for (const auto& [idx, msg] : errors) std::cerr << "error: " << msg << '\n';
        throw input_error(std::to_string(errors.size()) + " of " + std::to_string(records.size()) +
                          " records failed feature extraction");
    }
}

void cmd_train(const json& config) {
    FeatureFile train_file = read_features(require_string(config, "train"));
    FeatureFile val_file = read_features(require_string(config, "val"));
    if (!(train_file.manifest == val_file.manifest))
        throw input_error("train and validation feature files carry different manifests");
    const std::string model_out = require_string(config, "model_out");

    NetworkConfig net;
    net.input_dim = static_cast<int>(train_file.manifest.names.size());
    if (config.contains("hidden")) net.hidden_sizes = config["hidden"].get<std::vector<int>>();
    net.l2_coefficient = config.value("l2", 1e-4);
    net.seed = seed_of(config);

    TrainConfig tc;
    tc.learning_rate = config.value("learning_rate", 0.0005);
    tc.batch_size = config.value("batch_size", 75);
    tc.max_epochs = config.value("max_epochs", 800);
    tc.adam_beta1 = config.value("adam_beta1", 0.9);
    tc.adam_beta2 = config.value("adam_beta2", 0.999);
    tc.adam_epsilon = config.value("adam_epsilon", 1e-8);
    tc.shuffle_seed = config.contains("shuffle_seed") ? seed_of(config, "shuffle_seed")
                                                      : net.seed;

    const int log_every = config.value("log_every", 0);
    auto on_epoch = [&](const EpochStats& e) {
        if (log_every > 0 && e.epoch % log_every == 0)
            std::cout << "epoch " << e.epoch << " loss " << e.train_loss << " val_tau "
                      << (e.val_tau ? std::to_string(*e.val_tau) : "n/a") << '\n';
    };

    TrainResult result =
        train(train_file.vectors, val_file.vectors, train_file.manifest, net, tc, on_epoch);
    save_model(result.best_model, model_out);
    if (config.contains("history_out"))
        save_history(result.history, config["history_out"].get<std::string>());
    write_run_sidecar("train", config, model_out);

    const EpochStats& best = result.history.epochs[result.history.best_epoch - 1];
    std::cout << "best epoch " << result.history.best_epoch << " val_tau " << *best.val_tau
              << " val_accuracy "
              << (best.val_accuracy ? std::to_string(*best.val_accuracy) : "n/a") << '\n';
    std::cout << "wrote model to " << model_out << '\n';
}

void cmd_score(const json& config) {
    Model model = load_model(require_string(config, "model"));
    FeatureFile file = read_features(require_string(config, "features"));
    if (!(model.manifest == file.manifest))
        throw input_error("model manifest does not match the feature file manifest");
    const std::string out_path = require_string(config, "out");
    std::ofstream out(out_path);
    if (!out) throw input_error("cannot write scores file " + out_path);
    for (const auto& fv : file.vectors) {
        json j;
        j["image_id"] = fv.image_id;
        j["index"] = fv.index;
        j["score"] = score(model, fv.values);
        if (fv.human_score) j["human_score"] = *fv.human_score;
        if (fv.system_id) j["system_id"] = *fv.system_id;
        out << j.dump() << '\n';
    }
    write_run_sidecar("score", config, out_path);
    std::cout << "wrote " << file.vectors.size() << " scores to " << out_path << '\n';
}

namespace {

struct ScoreLine {
    std::string image_id;
    size_t index = 0;
    double score = 0.0;
    std::optional<double> human_score;
    std::optional<std::string> system_id;
};

std::vector<ScoreLine> load_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open scores file " + path);
    std::vector<ScoreLine> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw input_error(path + ":" + std::to_string(lineno) + ": malformed JSON: " +
                              e.what());
        }
        ScoreLine s;
        if (!j.contains("score") || !j["score"].is_number())
            throw input_error(path + ":" + std::to_string(lineno) + ": missing \"score\"");
        s.score = j["score"].get<double>();
        s.image_id = j.value("image_id", std::string{});
        s.index = j.value("index", out.size());
        if (j.contains("human_score") && !j["human_score"].is_null())
            s.human_score = j["human_score"].get<double>();
        if (j.contains("system_id") && !j["system_id"].is_null())
            s.system_id = j["system_id"].get<std::string>();
        out.push_back(std::move(s));
    }
    return out;
}

Caption caption_from_case(const json& j, const char* text_key, const char* tokens_key,
                          const char* heads_key, const std::string& where) {
    Caption c;
    if (!j.contains(text_key) || !j[text_key].is_string())
        throw input_error(where + ": missing \"" + text_key + "\"");
    c.text = j[text_key].get<std::string>();
    if (j.contains(tokens_key)) {
        TokenSeq toks;
        for (const auto& t : j[tokens_key]) toks.push_back(ascii_lower(t.get<std::string>()));
        c.tokens = std::move(toks);
    }
    if (j.contains(heads_key)) {
        if (!c.tokens) throw input_error(where + ": heads without tokens");
        c.heads = j[heads_key].get<std::vector<int>>();
    }
    return c;
}

struct CaseFile {
    std::vector<ForcedChoiceCase> cases;
    std::vector<std::optional<std::pair<double, double>>> precomputed;
    bool all_precomputed = true;
};

CaseFile load_cases(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open case file " + path);
    CaseFile file;
    std::string line;
    size_t lineno = 0;
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
        ForcedChoiceCase fc;
        if (!j.contains("references") || !j["references"].is_array() || j["references"].empty())
            throw input_error(where + ": needs a non-empty \"references\" array");
        for (size_t i = 0; i < j["references"].size(); ++i) {
            Caption ref;
            ref.text = j["references"][i].get<std::string>();
            fc.references.push_back(std::move(ref));
        }
        if (j.contains("reference_tokens")) {
            const json& arr = j["reference_tokens"];
            if (!arr.is_array() || arr.size() != fc.references.size())
                throw input_error(where + ": \"reference_tokens\" must parallel references");
            for (size_t i = 0; i < arr.size(); ++i) {
                if (arr[i].is_null()) continue;
                TokenSeq toks;
                for (const auto& t : arr[i]) toks.push_back(ascii_lower(t.get<std::string>()));
                fc.references[i].tokens = std::move(toks);
            }
        }
        if (j.contains("reference_heads")) {
            const json& arr = j["reference_heads"];
            if (!arr.is_array() || arr.size() != fc.references.size())
                throw input_error(where + ": \"reference_heads\" must parallel references");
            for (size_t i = 0; i < arr.size(); ++i) {
                if (arr[i].is_null()) continue;
                if (!fc.references[i].tokens)
                    throw input_error(where + ": reference heads without tokens");
                fc.references[i].heads = arr[i].get<std::vector<int>>();
            }
        }
        fc.option_a = caption_from_case(j, "option_a", "option_a_tokens", "option_a_heads", where);
        fc.option_b = caption_from_case(j, "option_b", "option_b_tokens", "option_b_heads", where);
        std::string pref = j.value("human_preference", "A");
        if (pref != "A" && pref != "B")
            throw input_error(where + ": human_preference must be \"A\" or \"B\"");
        fc.human_preference = pref[0];
        if (j.contains("category")) fc.category = j["category"].get<std::string>();
        if (j.contains("task")) fc.task = j["task"].get<std::string>();

        std::optional<std::pair<double, double>> pre;
        if (j.contains("score_a") && j.contains("score_b"))
            pre = std::make_pair(j["score_a"].get<double>(), j["score_b"].get<double>());
        else
            file.all_precomputed = false;
        file.precomputed.push_back(pre);
        file.cases.push_back(std::move(fc));
    }
    if (file.cases.empty()) throw input_error(path + ": no cases");
    return file;
}

// Model-backed caption scorer over a case file: the idf corpus is the
// case file's own reference sets, one document per case.
struct CaseScorer {
    Model model;
    std::optional<EmbeddingTable> embeddings;
    std::optional<IdfSet> idf;

    CaptionScorer scorer() const {
        FeatureResources res;
        if (embeddings) res.embeddings = &*embeddings;
        if (idf) res.idf = &*idf;
        return [this, res](const Caption& caption, const std::vector<Caption>& refs) {
            CandidateRecord rec;
            rec.image_id = "case";
            rec.candidate = caption;
            rec.references = refs;
            return score(model, extract_features(rec, res, model.manifest).values);
        };
    }
};

CaseScorer make_case_scorer(const json& config, const std::vector<ForcedChoiceCase>& cases) {
    CaseScorer cs;
    cs.model = load_model(require_string(config, "model"));
    if (config.contains("embeddings"))
        cs.embeddings = load_embeddings(config["embeddings"].get<std::string>());
    if (cs.model.manifest.needs_embeddings() && !cs.embeddings)
        throw input_error("model manifest needs semantic features; pass an embeddings file");
    if (cs.model.manifest.needs_idf()) {
        std::vector<std::vector<TokenSeq>> sets;
        sets.reserve(cases.size());
        for (const auto& fc : cases) {
            std::vector<TokenSeq> refs;
            for (const auto& r : fc.references) refs.push_back(r.token_seq());
            sets.push_back(std::move(refs));
        }
        cs.idf = build_idf_set(sets);
    }
    return cs;
}

json bucket_json(const AccuracyBucket& b) {
    return json{{"n", b.total}, {"correct", b.correct}, {"ties", b.ties},
                {"accuracy", b.accuracy()}};
}

void emit_report(const json& report, const json& config, const std::string& mode) {
    if (config.contains("out")) {
        const std::string out_path = config["out"].get<std::string>();
        std::ofstream out(out_path);
        if (!out) throw input_error("cannot write report " + out_path);
        out << report.dump(2) << '\n';
        write_run_sidecar("eval " + mode, config, out_path);
    }
}

void eval_corr(const json& config) {
    std::vector<ScoreLine> scores = load_scores(require_string(config, "scores"));
    std::optional<FeatureFile> features;
    if (config.contains("features")) features = read_features(config["features"].get<std::string>());

    std::vector<double> xs, ys;
    for (const auto& s : scores) {
        std::optional<double> human = s.human_score;
        if (!human && features) {
            if (s.index >= features->vectors.size())
                throw input_error("score index " + std::to_string(s.index) +
                                  " outside the feature file");
            human = features->vectors[s.index].human_score;
        }
        if (!human)
            throw input_error("no human score for item " + std::to_string(s.index) +
                              "; provide one inline or via --features");
        xs.push_back(s.score);
        ys.push_back(*human);
    }
    PearsonTest pt = pearson_with_p(xs, ys);
    double sp = spearman(xs, ys);
    double kt = kendall_tau_b(xs, ys);

    json report;
    report["n"] = xs.size();
    report["pearson"] = {{"r", pt.r}, {"p_value", pt.p_value}};
    report["spearman"] = sp;
    report["kendall_tau_b"] = kt;
    std::cout << "caption-level correlation over " << xs.size() << " items\n"
              << "  pearson   " << pt.r << " (p=" << pt.p_value << ")\n"
              << "  spearman  " << sp << '\n'
              << "  kendall-b " << kt << '\n';
    emit_report(report, config, "corr");
}

std::vector<std::pair<double, double>> case_scores(const json& config, const CaseFile& file) {
    if (config.contains("model")) {
        CaseScorer cs = make_case_scorer(config, file.cases);
        CaptionScorer scorer = cs.scorer();
        std::vector<std::pair<double, double>> out;
        out.reserve(file.cases.size());
        for (const auto& fc : file.cases)
            out.emplace_back(scorer(fc.option_a, fc.references),
                             scorer(fc.option_b, fc.references));
        return out;
    }
    if (!file.all_precomputed)
        throw input_error("cases lack precomputed score_a/score_b; pass --model to score them");
    std::vector<std::pair<double, double>> out;
    out.reserve(file.cases.size());
    for (const auto& pre : file.precomputed) out.push_back(*pre);
    return out;
}

void eval_pairwise(const json& config) {
    CaseFile file = load_cases(require_string(config, "cases"));
    PairwiseResult res = pairwise_accuracy(file.cases, case_scores(config, file));
    json report;
    report["overall"] = bucket_json(res.overall);
    json cats = json::object();
    for (const auto& [name, bucket] : res.by_category) cats[name] = bucket_json(bucket);
    report["by_category"] = cats;
    std::cout << "pairwise accuracy " << res.overall.accuracy() << " over " << res.overall.total
              << " cases (" << res.overall.ties << " ties)\n";
    for (const auto& [name, bucket] : res.by_category)
        std::cout << "  " << name << "  " << bucket.accuracy() << " (n=" << bucket.total << ")\n";
    emit_report(report, config, "pairwise");
}

void eval_robust(const json& config) {
    CaseFile file = load_cases(require_string(config, "cases"));
    RobustnessResult res = robustness_accuracy(file.cases, case_scores(config, file));
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    json report;
    json tasks = json::object();
    for (const auto& [name, bucket] : res.by_task) tasks[name] = bucket_json(bucket);
    report["tasks"] = tasks;
    report["average"] = res.average;
    std::cout << "robustness accuracy by task\n";
    for (const auto& [name, bucket] : res.by_task)
        std::cout << "  " << name << "  " << bucket.accuracy() << " (n=" << bucket.total << ")\n";
    std::cout << "  average  " << res.average << '\n';
    emit_report(report, config, "robust");
}

void eval_sweep(const json& config) {
    CaseFile file = load_cases(require_string(config, "cases"));
    if (!config.contains("model"))
        throw input_error("reference-count sweep rescores truncated cases; pass --model");
    CaseScorer cs = make_case_scorer(config, file.cases);
    int max_refs = config.value("max_refs", 0);
    if (max_refs == 0) {
        // Default to the shallowest case, so truncation is always valid.
        max_refs = static_cast<int>(file.cases.front().references.size());
        for (const auto& fc : file.cases)
            max_refs = std::min(max_refs, static_cast<int>(fc.references.size()));
    }
    int step = config.value("step", 2);
    std::vector<SweepPoint> points = refcount_sweep(file.cases, cs.scorer(), max_refs, step);
    json report = json::array();
    std::cout << "pairwise accuracy by reference count\n";
    for (const auto& p : points) {
        report.push_back({{"k", p.k}, {"overall", bucket_json(p.result.overall)}});
        std::cout << "  k=" << p.k << "  " << p.result.overall.accuracy() << '\n';
    }
    emit_report(json{{"points", report}}, config, "sweep");
}

void eval_system(const json& config) {
    std::vector<ScoreLine> scores = load_scores(require_string(config, "scores"));
    std::optional<FeatureFile> features;
    if (config.contains("features")) features = read_features(config["features"].get<std::string>());

    std::vector<ScoredItem> items;
    for (const auto& s : scores) {
        ScoredItem item;
        item.metric_score = s.score;
        item.human_score = s.human_score.value_or(0.0);
        item.system_id = s.system_id;
        if (!item.system_id && features && s.index < features->vectors.size())
            item.system_id = features->vectors[s.index].system_id;
        items.push_back(std::move(item));
    }

    const std::string map_path = require_string(config, "system_scores");
    std::ifstream in(map_path);
    if (!in) throw input_error("cannot open system scores file " + map_path);
    json m;
    try {
        in >> m;
    } catch (const json::exception& e) {
        throw input_error(map_path + ": malformed JSON: " + e.what());
    }
    std::map<std::string, double> human_scores;
    for (const auto& [k, v] : m.items()) human_scores[k] = v.get<double>();

    SystemLevelResult res = system_level(items, human_scores);
    json report;
    report["n_systems"] = res.system_means.size();
    report["pearson"] = {{"r", res.pearson.r}, {"p_value", res.pearson.p_value}};
    report["degenerate"] = res.degenerate;
    json systems = json::object();
    for (const auto& [name, mean] : res.system_means)
        systems[name] = {{"mean_score", mean},
                         {"n_items", res.system_counts.at(name)},
                         {"human_score", human_scores.at(name)}};
    report["systems"] = systems;
    std::cout << "system-level pearson " << res.pearson.r << " (p=" << res.pearson.p_value
              << ") over " << res.system_means.size() << " systems"
              << (res.degenerate ? " [degenerate: only 2 systems]" : "") << '\n';
    for (const auto& [name, mean] : res.system_means)
        std::cout << "  " << name << "  metric " << mean << "  human " << human_scores.at(name)
                  << '\n';
    emit_report(report, config, "system");
}

}  // namespace

void cmd_eval(const json& config) {
    const std::string mode = require_string(config, "mode");
    if (mode == "corr")
        eval_corr(config);
    else if (mode == "pairwise")
        eval_pairwise(config);
    else if (mode == "robust")
        eval_robust(config);
    else if (mode == "sweep")
        eval_sweep(config);
    else if (mode == "system")
        eval_system(config);
    else
        throw input_error("unknown eval mode \"" + mode + "\"");
}

void cmd_pair(const json& config) {
    const std::string images_path = require_string(config, "images");
    const std::string out_path = require_string(config, "out");
    PairingPolicy policy;
    policy.refs_per_candidate = config.value("refs_per_candidate", 4);
    policy.rng_seed = seed_of(config);

    std::ifstream in(images_path);
    if (!in) throw input_error("cannot open images file " + images_path);
    std::vector<CandidateRecord> records;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = images_path + ":" + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw input_error(where + ": malformed JSON: " + e.what());
        }
        if (!j.contains("image_id") || !j.contains("human"))
            throw input_error(where + ": needs \"image_id\" and \"human\" fields");
        std::vector<Caption> humans;
        for (const auto& h : j["human"]) {
            Caption c;
            c.text = h.get<std::string>();
            humans.push_back(std::move(c));
        }
        std::vector<MachineCaption> machines;
        if (j.contains("machine")) {
            for (const auto& m : j["machine"]) {
                MachineCaption mc;
                if (m.is_string()) {
                    mc.caption.text = m.get<std::string>();
                } else {
                    mc.caption.text = m.at("text").get<std::string>();
                    if (m.contains("system_id"))
                        mc.system_id = m["system_id"].get<std::string>();
                }
                machines.push_back(std::move(mc));
            }
        }
        try {
            auto paired = pair_leave_out(j["image_id"].get<std::string>(), humans, machines, policy);
            records.insert(records.end(), paired.begin(), paired.end());
        } catch (const input_error& e) {
            throw input_error(where + ": " + e.what());
        }
    }
    save_records(records, out_path);
    write_run_sidecar("pair", config, out_path);
    std::cout << "wrote " << records.size() << " paired records to " << out_path << '\n';
}

void cmd_perturb(const json& config) {
    const std::string records_path = require_string(config, "records");
    const std::string out_path = require_string(config, "out");
    PerturbTask task = perturb_task_from_name(require_string(config, "task"));
    const uint64_t seed = seed_of(config);

    auto load_lexicon = [&](const char* key) {
        std::vector<std::string> words;
        if (!config.contains(key)) return words;
        std::ifstream in(config[key].get<std::string>());
        if (!in) throw input_error(std::string("cannot open lexicon ") +
                                   config[key].get<std::string>());
        std::string w;
        while (in >> w) words.push_back(ascii_lower(w));
        return words;
    };
    PerturbLexicons lex;
    lex.person_words = load_lexicon("person_lexicon");
    lex.scene_words = load_lexicon("scene_lexicon");

    std::vector<CandidateRecord> records = load_records(records_path);
    std::ofstream out(out_path);
    if (!out) throw input_error("cannot write case file " + out_path);
    size_t written = 0, skipped = 0;
    for (size_t i = 0; i < records.size(); ++i) {
        std::optional<Caption> distractor = perturb_generate(records[i].candidate, lex, task, seed);
        if (!distractor) {
            std::cerr << "warning: record " << i << " has no lexicon hit for task "
                      << perturb_task_name(task) << ", skipped\n";
            ++skipped;
            continue;
        }
        json j;
        json refs = json::array();
        for (const auto& r : records[i].references) refs.push_back(r.text);
        j["references"] = refs;
        j["option_a"] = records[i].candidate.text;
        j["option_b"] = distractor->text;
        j["human_preference"] = "A";
        j["task"] = perturb_task_name(task);
        out << j.dump() << '\n';
        ++written;
    }
    write_run_sidecar("perturb", config, out_path);
    std::cout << "wrote " << written << " cases to " << out_path << " (" << skipped
              << " skipped)\n";
}

int run_command(const std::string& name, const std::string& config_json, std::string* error_out) {
    json config;
    try {
        config = config_json.empty() ? json::object() : json::parse(config_json);
    } catch (const json::exception& e) {
        if (error_out) *error_out = std::string("malformed run config: ") + e.what();
        return 2;
    }
    try {
        if (name == "extract")
            cmd_extract(config);
        else if (name == "train")
            cmd_train(config);
        else if (name == "score")
            cmd_score(config);
        else if (name == "eval")
            cmd_eval(config);
        else if (name == "pair")
            cmd_pair(config);
        else if (name == "perturb")
            cmd_perturb(config);
        else
            throw input_error("unknown command \"" + name + "\"");
        return 0;
    } catch (const input_error& e) {
        if (error_out) *error_out = e.what();
        return 2;
    } catch (const internal_error& e) {
        if (error_out) *error_out = e.what();
        return 1;
    } catch (const json::exception& e) {
        // wrong types inside a user-supplied run config
        if (error_out) *error_out = std::string("run config: ") + e.what();
        return 2;
    } catch (const std::exception& e) {
        if (error_out) *error_out = e.what();
        return 1;
    }
}

}  // namespace lceval

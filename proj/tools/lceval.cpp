// Command-line front end. All work happens behind the shared library's C
// API; this binary only resolves flags (plus an optional --config file
// and the LCEVAL_SEED environment variable) into run configurations.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lceval/lceval.h"

namespace {

using nlohmann::json;

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<int> parse_hidden(const std::string& s) {
    std::vector<int> out;
    for (const auto& part : split_csv(s)) out.push_back(std::stoi(part));
    return out;
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw CLI::ValidationError("--config", std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ValidationError("--config", "must hold a JSON object");
    return j;
}

// Tracks which flags the user actually passed so library defaults stay
// in charge of everything else.
struct ConfigBuilder {
    json config = json::object();

    void base(const std::string& config_path) {
        if (!config_path.empty()) config = load_config_file(config_path);
    }
    template <typename T>
    void set(const CLI::Option* opt, const std::string& key, const T& value) {
        if (opt && opt->count() > 0) config[key] = value;
    }
    void require(const std::string& key, const std::string& value) {
        if (!value.empty()) config[key] = value;
    }
    void default_seed() {
        if (config.contains("seed")) return;
        if (const char* env = std::getenv("LCEVAL_SEED"))
            config["seed"] = static_cast<uint64_t>(std::strtoull(env, nullptr, 10));
    }
};

int finish(lceval_status rc) {
    if (rc != LCEVAL_OK) std::cerr << "lceval: error: " << lceval_last_error() << '\n';
    return static_cast<int>(rc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lceval — learned composite caption-evaluation metric"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(lceval_version()));

    int exit_code = 0;

    // ---- extract ----------------------------------------------------
    auto* extract = app.add_subcommand("extract", "Extract feature vectors from a records file");
    std::string x_records, x_out, x_embeddings, x_parses, x_features, x_aggregation, x_external,
        x_systems, x_config;
    double x_rouge_beta = 1.2, x_cider_sigma = 6.0;
    int x_workers = 1;
    uint64_t x_seed = 0;
    extract->add_option("--records", x_records, "Input records JSONL");
    extract->add_option("--out", x_out, "Output feature file");
    extract->add_option("--embeddings", x_embeddings, "Word embedding table (text format)");
    extract->add_option("--parses", x_parses, "Sidecar dependency parse file");
    auto* xo_features = extract->add_option("--features", x_features,
                                            "Comma-separated feature names (default manifest otherwise)");
    auto* xo_agg = extract->add_option("--aggregation", x_aggregation,
                                       "Per-reference aggregation: max, min or mean");
    auto* xo_beta = extract->add_option("--rouge-beta", x_rouge_beta, "ROUGE-L beta");
    auto* xo_sigma = extract->add_option("--cider-sigma", x_cider_sigma, "CIDEr-D length sigma");
    auto* xo_ext = extract->add_option("--external", x_external,
                                       "Comma-separated external feature names");
    auto* xo_sys = extract->add_option("--systems", x_systems,
                                       "Keep only these machine systems (comma-separated)");
    auto* xo_workers = extract->add_option("--workers", x_workers, "Parallel extraction workers");
    auto* xo_seed = extract->add_option("--seed", x_seed, "Run seed");
    extract->add_option("--config", x_config, "JSON run config; flags override its fields");
    extract->callback([&] {
        ConfigBuilder b;
        b.base(x_config);
        b.require("records", x_records);
        b.require("out", x_out);
        b.require("embeddings", x_embeddings);
        b.require("parses", x_parses);
        b.set(xo_features, "features", split_csv(x_features));
        b.set(xo_agg, "aggregation", x_aggregation);
        b.set(xo_beta, "rouge_beta", x_rouge_beta);
        b.set(xo_sigma, "cider_sigma", x_cider_sigma);
        b.set(xo_ext, "external", split_csv(x_external));
        b.set(xo_sys, "systems", split_csv(x_systems));
        b.set(xo_workers, "workers", x_workers);
        b.set(xo_seed, "seed", x_seed);
        b.default_seed();
        exit_code = finish(lceval_cmd_extract(b.config.dump().c_str()));
    });

    // ---- train ------------------------------------------------------
    auto* train = app.add_subcommand("train", "Train the classifier on feature files");
    std::string t_train, t_val, t_model_out, t_history_out, t_hidden, t_config;
    double t_l2 = 1e-4, t_lr = 0.0005;
    int t_batch = 75, t_epochs = 800, t_log_every = 0;
    uint64_t t_seed = 0, t_shuffle_seed = 0;
    train->add_option("--train", t_train, "Training feature file");
    train->add_option("--val", t_val, "Validation feature file (needs human scores)");
    train->add_option("--model-out", t_model_out, "Output model file");
    train->add_option("--history-out", t_history_out, "Output training history JSON");
    auto* to_hidden = train->add_option("--hidden", t_hidden,
                                        "Hidden layer sizes, e.g. \"12\" or \"12,12\"; \"\" trains the linear model");
    auto* to_l2 = train->add_option("--l2", t_l2, "L2 regularization coefficient");
    auto* to_lr = train->add_option("--lr", t_lr, "Adam learning rate");
    auto* to_batch = train->add_option("--batch", t_batch, "Mini-batch size");
    auto* to_epochs = train->add_option("--epochs", t_epochs, "Maximum training epochs");
    auto* to_seed = train->add_option("--seed", t_seed, "Weight initialization seed");
    auto* to_shuffle = train->add_option("--shuffle-seed", t_shuffle_seed,
                                         "Epoch shuffle seed (defaults to --seed)");
    auto* to_log = train->add_option("--log-every", t_log_every, "Print stats every N epochs");
    train->add_option("--config", t_config, "JSON run config; flags override its fields");
    train->callback([&] {
        ConfigBuilder b;
        b.base(t_config);
        b.require("train", t_train);
        b.require("val", t_val);
        b.require("model_out", t_model_out);
        b.require("history_out", t_history_out);
        b.set(to_hidden, "hidden", parse_hidden(t_hidden));
        b.set(to_l2, "l2", t_l2);
        b.set(to_lr, "learning_rate", t_lr);
        b.set(to_batch, "batch_size", t_batch);
        b.set(to_epochs, "max_epochs", t_epochs);
        b.set(to_seed, "seed", t_seed);
        b.set(to_shuffle, "shuffle_seed", t_shuffle_seed);
        b.set(to_log, "log_every", t_log_every);
        b.default_seed();
        exit_code = finish(lceval_cmd_train(b.config.dump().c_str()));
    });

    // ---- score ------------------------------------------------------
    auto* score = app.add_subcommand("score", "Score feature vectors with a trained model");
    std::string s_model, s_features, s_out, s_config;
    score->add_option("--model", s_model, "Model file");
    score->add_option("--features", s_features, "Feature file (manifest must match the model)");
    score->add_option("--out", s_out, "Output scores JSONL");
    score->add_option("--config", s_config, "JSON run config; flags override its fields");
    score->callback([&] {
        ConfigBuilder b;
        b.base(s_config);
        b.require("model", s_model);
        b.require("features", s_features);
        b.require("out", s_out);
        exit_code = finish(lceval_cmd_score(b.config.dump().c_str()));
    });

    // ---- eval -------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "Run an evaluation harness");
    eval->require_subcommand(1);
    struct EvalFlags {
        std::string scores, features, cases, model, embeddings, system_scores, out, config;
        int max_refs = 0, step = 2;
    } e;
    auto add_eval_mode = [&](const char* mode, const char* help) {
        auto* sub = eval->add_subcommand(mode, help);
        sub->add_option("--scores", e.scores, "Scores JSONL");
        sub->add_option("--features", e.features, "Feature file for joined fields");
        sub->add_option("--cases", e.cases, "Forced-choice case file");
        sub->add_option("--model", e.model, "Model file for scoring cases");
        sub->add_option("--embeddings", e.embeddings, "Embeddings for semantic features");
        sub->add_option("--system-scores", e.system_scores, "JSON map system -> human score");
        sub->add_option("--out", e.out, "Machine-readable report path");
        sub->add_option("--max-refs", e.max_refs, "Sweep upper reference count");
        sub->add_option("--step", e.step, "Sweep step size");
        sub->add_option("--config", e.config, "JSON run config; flags override its fields");
        sub->callback([&, mode] {
            ConfigBuilder b;
            b.base(e.config);
            b.config["mode"] = mode;
            b.require("scores", e.scores);
            b.require("features", e.features);
            b.require("cases", e.cases);
            b.require("model", e.model);
            b.require("embeddings", e.embeddings);
            b.require("system_scores", e.system_scores);
            b.require("out", e.out);
            if (e.max_refs > 0) b.config["max_refs"] = e.max_refs;
            if (e.step != 2) b.config["step"] = e.step;
            exit_code = finish(lceval_cmd_eval(b.config.dump().c_str()));
        });
        return sub;
    };
    add_eval_mode("corr", "Caption-level correlation against human judgments");
    add_eval_mode("pairwise", "Forced-choice pairwise accuracy");
    add_eval_mode("robust", "Robustness accuracy per perturbation task");
    add_eval_mode("sweep", "Pairwise accuracy across reference counts");
    add_eval_mode("system", "System-level correlation of mean scores");

    // ---- pair -------------------------------------------------------
    auto* pair = app.add_subcommand("pair", "Build candidate/reference records from image captions");
    std::string p_images, p_out, p_config;
    int p_refs = 4;
    uint64_t p_seed = 0;
    pair->add_option("--images", p_images, "Images JSONL: image_id, human[5], machine[]");
    pair->add_option("--out", p_out, "Output records JSONL");
    auto* po_refs = pair->add_option("--refs-per-candidate", p_refs, "References per candidate");
    auto* po_seed = pair->add_option("--seed", p_seed, "Pairing seed");
    pair->add_option("--config", p_config, "JSON run config; flags override its fields");
    pair->callback([&] {
        ConfigBuilder b;
        b.base(p_config);
        b.require("images", p_images);
        b.require("out", p_out);
        b.set(po_refs, "refs_per_candidate", p_refs);
        b.set(po_seed, "seed", p_seed);
        b.default_seed();
        exit_code = finish(lceval_cmd_pair(b.config.dump().c_str()));
    });

    // ---- perturb ------------------------------------------------------
    auto* perturb = app.add_subcommand("perturb", "Generate forced-choice distractor cases");
    std::string q_records, q_out, q_task, q_person, q_scene, q_config;
    uint64_t q_seed = 0;
    perturb->add_option("--records", q_records, "Records with correct candidate captions");
    perturb->add_option("--out", q_out, "Output case file");
    perturb->add_option("--task", q_task,
                        "replace-person, replace-scene, just-person or just-scene");
    perturb->add_option("--person-lexicon", q_person, "Person word list, one per line");
    perturb->add_option("--scene-lexicon", q_scene, "Scene word list, one per line");
    auto* qo_seed = perturb->add_option("--seed", q_seed, "Replacement seed");
    perturb->add_option("--config", q_config, "JSON run config; flags override its fields");
    perturb->callback([&] {
        ConfigBuilder b;
        b.base(q_config);
        b.require("records", q_records);
        b.require("out", q_out);
        b.require("task", q_task);
        b.require("person_lexicon", q_person);
        b.require("scene_lexicon", q_scene);
        b.set(qo_seed, "seed", q_seed);
        b.default_seed();
        exit_code = finish(lceval_cmd_perturb(b.config.dump().c_str()));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // flag mistakes are user errors
    }
    return exit_code;
}

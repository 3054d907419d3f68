#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace lceval {

using nlohmann::json;

void NetworkConfig::validate() const {
    if (input_dim < 1) throw input_error("network input_dim must be >= 1");
    if (hidden_sizes.size() > 2) throw input_error("at most 2 hidden layers are supported");
    for (int h : hidden_sizes)
        if (h < 1) throw input_error("hidden layer sizes must be >= 1");
    if (l2_coefficient < 0.0) throw input_error("l2 coefficient must be non-negative");
}

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw input_error("learning rate must be positive");
    if (batch_size < 1) throw input_error("batch size must be >= 1");
    if (max_epochs < 1) throw input_error("max epochs must be >= 1");
    if (adam_beta1 <= 0.0 || adam_beta1 >= 1.0 || adam_beta2 <= 0.0 || adam_beta2 >= 1.0)
        throw input_error("adam betas must lie in (0,1)");
    if (adam_epsilon <= 0.0) throw input_error("adam epsilon must be positive");
}

size_t Model::parameter_count() const {
    size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.biases.size();
    return n;
}

Model init_model(const NetworkConfig& config, const FeatureManifest& manifest) {
    config.validate();
    manifest.validate();
    if (static_cast<size_t>(config.input_dim) != manifest.names.size())
        throw input_error("network input_dim " + std::to_string(config.input_dim) +
                          " does not match manifest size " + std::to_string(manifest.names.size()));
    Model model;
    model.config = config;
    model.manifest = manifest;
    Rng rng(config.seed);
    std::vector<int> dims{config.input_dim};
    for (int h : config.hidden_sizes) dims.push_back(h);
    dims.push_back(2);
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer;
        layer.in_dim = dims[l];
        layer.out_dim = dims[l + 1];
        double limit = std::sqrt(6.0 / (layer.in_dim + layer.out_dim));
        layer.weights.resize(static_cast<size_t>(layer.in_dim) * layer.out_dim);
        for (double& w : layer.weights) w = uniform_real(rng, -limit, limit);
        layer.biases.assign(layer.out_dim, 0.0);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

namespace {

void affine(const Layer& layer, const std::vector<double>& in, std::vector<double>& out) {
    out.assign(layer.out_dim, 0.0);
    for (int r = 0; r < layer.out_dim; ++r) {
        double acc = layer.biases[r];
        const double* wrow = layer.weights.data() + static_cast<size_t>(r) * layer.in_dim;
        for (int c = 0; c < layer.in_dim; ++c) acc += wrow[c] * in[c];
        out[r] = acc;
    }
}

}  // namespace

Forward forward(const Model& model, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != model.config.input_dim)
        throw input_error("input has " + std::to_string(x.size()) + " values, model expects " +
                          std::to_string(model.config.input_dim));
    Forward f;
    f.activations.push_back(x);
    std::vector<double> cur = x, next;
    for (size_t l = 0; l + 1 < model.layers.size(); ++l) {
        affine(model.layers[l], cur, next);
        for (double& v : next) v = std::max(v, 0.0);
        f.activations.push_back(next);
        cur = next;
    }
    affine(model.layers.back(), cur, f.logits);
    double zmax = std::max(f.logits[0], f.logits[1]);
    double e0 = std::exp(f.logits[0] - zmax);
    double e1 = std::exp(f.logits[1] - zmax);
    f.prob_machine = e0 / (e0 + e1);
    f.prob_human = e1 / (e0 + e1);
    return f;
}

double score(const Model& model, const std::vector<double>& x) {
    return forward(model, x).prob_human;
}

namespace {

double batch_nll(const Model& model, const std::vector<Example>& batch) {
    double sum = 0.0;
    for (const auto& ex : batch) {
        if (ex.label != 0 && ex.label != 1)
            throw input_error("unknown class label " + std::to_string(ex.label));
        Forward f = forward(model, ex.x);
        double zmax = std::max(f.logits[0], f.logits[1]);
        double lse = zmax + std::log(std::exp(f.logits[0] - zmax) + std::exp(f.logits[1] - zmax));
        sum += lse - f.logits[ex.label];
    }
    return sum / batch.size();
}

double l2_term(const Model& model) {
    double sq = 0.0;
    for (const auto& layer : model.layers)
        for (double w : layer.weights) sq += w * w;
    return sq;
}

}  // namespace

double loss(const Model& model, const std::vector<Example>& batch) {
    if (batch.empty()) throw input_error("loss over an empty batch");
    return batch_nll(model, batch) + model.config.l2_coefficient * l2_term(model);
}

Gradients gradients(const Model& model, const std::vector<Example>& batch) {
    if (batch.empty()) throw input_error("gradients over an empty batch");
    Gradients g;
    for (const auto& layer : model.layers) {
        Layer zero;
        zero.in_dim = layer.in_dim;
        zero.out_dim = layer.out_dim;
        zero.weights.assign(layer.weights.size(), 0.0);
        zero.biases.assign(layer.biases.size(), 0.0);
        g.layers.push_back(std::move(zero));
    }
    const size_t L = model.layers.size();
    for (const auto& ex : batch) {
        if (ex.label != 0 && ex.label != 1)
            throw input_error("unknown class label " + std::to_string(ex.label));
        Forward f = forward(model, ex.x);
        std::vector<double> delta{f.prob_machine, f.prob_human};
        delta[ex.label] -= 1.0;
        for (size_t l = L; l-- > 0;) {
            const Layer& layer = model.layers[l];
            Layer& grad = g.layers[l];
            const std::vector<double>& input = f.activations[l];
            for (int r = 0; r < layer.out_dim; ++r) {
                grad.biases[r] += delta[r];
                double* grow = grad.weights.data() + static_cast<size_t>(r) * layer.in_dim;
                for (int c = 0; c < layer.in_dim; ++c) grow[c] += delta[r] * input[c];
            }
            if (l == 0) break;
            std::vector<double> next(layer.in_dim, 0.0);
            for (int c = 0; c < layer.in_dim; ++c) {
                if (input[c] <= 0.0) continue;  // ReLU gate
                double acc = 0.0;
                for (int r = 0; r < layer.out_dim; ++r)
                    acc += layer.weights[static_cast<size_t>(r) * layer.in_dim + c] * delta[r];
                next[c] = acc;
            }
            delta = std::move(next);
        }
    }
    const double inv = 1.0 / batch.size();
    for (size_t l = 0; l < L; ++l) {
        for (size_t i = 0; i < g.layers[l].weights.size(); ++i) {
            g.layers[l].weights[i] *= inv;
            g.layers[l].weights[i] += 2.0 * model.config.l2_coefficient * model.layers[l].weights[i];
        }
        for (double& b : g.layers[l].biases) b *= inv;
    }
    return g;
}

AdamState make_adam_state(const Model& model) {
    AdamState state;
    for (const auto& layer : model.layers) {
        Layer zero;
        zero.in_dim = layer.in_dim;
        zero.out_dim = layer.out_dim;
        zero.weights.assign(layer.weights.size(), 0.0);
        zero.biases.assign(layer.biases.size(), 0.0);
        state.m.push_back(zero);
        state.v.push_back(zero);
    }
    return state;
}

void adam_step(Model& model, const Gradients& grads, AdamState& state, const TrainConfig& config) {
    config.validate();
    ++state.step;
    const double b1 = config.adam_beta1, b2 = config.adam_beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    auto update = [&](double& param, double grad, double& m, double& v) {
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad * grad;
        double mhat = m / bc1;
        double vhat = v / bc2;
        param -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_epsilon);
    };
    for (size_t l = 0; l < model.layers.size(); ++l) {
        Layer& layer = model.layers[l];
        const Layer& grad = grads.layers[l];
        for (size_t i = 0; i < layer.weights.size(); ++i)
            update(layer.weights[i], grad.weights[i], state.m[l].weights[i], state.v[l].weights[i]);
        for (size_t i = 0; i < layer.biases.size(); ++i)
            update(layer.biases[i], grad.biases[i], state.m[l].biases[i], state.v[l].biases[i]);
    }
}

std::vector<Example> to_examples(const std::vector<FeatureVector>& vectors,
                                 const FeatureManifest& manifest) {
    std::vector<Example> out;
    out.reserve(vectors.size());
    for (const auto& fv : vectors) {
        if (fv.label == Label::unknown)
            throw input_error("record " + std::to_string(fv.index) +
                              " has label \"unknown\"; training needs human/machine labels");
        if (fv.values.size() != manifest.names.size())
            throw input_error("feature vector length mismatch against manifest");
        out.push_back({fv.values, fv.label == Label::human ? 1 : 0});
    }
    return out;
}

TrainResult train(const std::vector<FeatureVector>& train_vectors,
                  const std::vector<FeatureVector>& val_vectors, const FeatureManifest& manifest,
                  const NetworkConfig& net_config, const TrainConfig& train_config,
                  std::function<void(const EpochStats&)> on_epoch) {
    train_config.validate();
    if (train_vectors.empty()) throw input_error("empty training set");
    if (val_vectors.empty()) throw input_error("empty validation set");
    for (const auto& fv : val_vectors)
        if (!fv.human_score)
            throw input_error("validation record " + std::to_string(fv.index) +
                              " has no human score; tau early stopping needs one");

    std::vector<Example> train_set = to_examples(train_vectors, manifest);
    Model model = init_model(net_config, manifest);
    AdamState state = make_adam_state(model);
    Rng shuffle_rng(train_config.shuffle_seed);

    TrainResult result;
    result.history.best_epoch = -1;
    double best_tau = -std::numeric_limits<double>::infinity();

    std::vector<size_t> order(train_set.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= train_config.max_epochs; ++epoch) {
        shuffle(shuffle_rng, order);
        double loss_sum = 0.0;
        size_t seen = 0;
        for (size_t start = 0; start < order.size(); start += train_config.batch_size) {
            size_t end = std::min(order.size(), start + train_config.batch_size);
            std::vector<Example> batch;
            batch.reserve(end - start);
            for (size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
            loss_sum += loss(model, batch) * batch.size();
            seen += batch.size();
            Gradients g = gradients(model, batch);
            adam_step(model, g, state, train_config);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / seen;

        size_t labeled = 0, correct = 0;
        std::vector<double> metric_scores, human_scores;
        metric_scores.reserve(val_vectors.size());
        for (const auto& fv : val_vectors) {
            double s = score(model, fv.values);
            metric_scores.push_back(s);
            human_scores.push_back(*fv.human_score);
            if (fv.label == Label::unknown) continue;
            ++labeled;
            int predicted = s > 0.5 ? 1 : 0;
            if (predicted == (fv.label == Label::human ? 1 : 0)) ++correct;
        }
        if (labeled > 0) stats.val_accuracy = static_cast<double>(correct) / labeled;
        try {
            stats.val_tau = kendall_tau_b(metric_scores, human_scores);
        } catch (const input_error&) {
            stats.val_tau = std::nullopt;  // degenerate epoch, never selected
        }
        if (stats.val_tau && *stats.val_tau > best_tau) {
            best_tau = *stats.val_tau;
            result.best_model = model;
            result.history.best_epoch = epoch;
        }
        result.history.epochs.push_back(stats);
        if (on_epoch) on_epoch(stats);
    }
    if (result.history.best_epoch < 0)
        throw input_error("validation Kendall tau was undefined in every epoch");

    const EpochStats& best = result.history.epochs[result.history.best_epoch - 1];
    json meta;
    meta["best_epoch"] = result.history.best_epoch;
    meta["val_tau"] = *best.val_tau;
    meta["val_accuracy"] = best.val_accuracy ? json(*best.val_accuracy) : json(nullptr);
    meta["learning_rate"] = train_config.learning_rate;
    meta["batch_size"] = train_config.batch_size;
    meta["max_epochs"] = train_config.max_epochs;
    meta["shuffle_seed"] = train_config.shuffle_seed;
    meta["train_examples"] = train_vectors.size();
    result.best_model.training_meta = meta.dump();
    return result;
}

namespace {

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write model file " + path);
    out << "lceval-model 1\n";
    out << "manifest " << model.manifest.to_json() << '\n';
    json cfg;
    cfg["input_dim"] = model.config.input_dim;
    cfg["hidden_sizes"] = model.config.hidden_sizes;
    cfg["l2_coefficient"] = model.config.l2_coefficient;
    cfg["seed"] = model.config.seed;
    out << "config " << cfg.dump() << '\n';
    if (!model.training_meta.empty()) out << "trained " << model.training_meta << '\n';
    out << "layers " << model.layers.size() << '\n';
    for (const auto& layer : model.layers) {
        out << "layer " << layer.out_dim << ' ' << layer.in_dim << '\n';
        for (int r = 0; r < layer.out_dim; ++r) {
            for (int c = 0; c < layer.in_dim; ++c) {
                if (c) out << ' ';
                out << g17(layer.weights[static_cast<size_t>(r) * layer.in_dim + c]);
            }
            out << '\n';
        }
        out << "bias";
        for (double b : layer.biases) out << ' ' << g17(b);
        out << '\n';
    }
    out << "end\n";
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open model file " + path);
    auto fail = [&](const std::string& why) { return input_error(path + ": " + why); };
    std::string line;
    if (!std::getline(in, line) || line != "lceval-model 1") throw fail("not a model file");
    if (!std::getline(in, line) || line.rfind("manifest ", 0) != 0)
        throw fail("missing manifest line");
    Model model;
    model.manifest = FeatureManifest::from_json(line.substr(9));
    if (!std::getline(in, line) || line.rfind("config ", 0) != 0) throw fail("missing config line");
    json cfg;
    try {
        cfg = json::parse(line.substr(7));
    } catch (const json::exception& e) {
        throw fail(std::string("malformed config: ") + e.what());
    }
    model.config.input_dim = cfg.at("input_dim").get<int>();
    model.config.hidden_sizes = cfg.at("hidden_sizes").get<std::vector<int>>();
    model.config.l2_coefficient = cfg.at("l2_coefficient").get<double>();
    model.config.seed = cfg.at("seed").get<uint64_t>();
    if (!std::getline(in, line)) throw fail("truncated model file");
    if (line.rfind("trained ", 0) == 0) {
        model.training_meta = line.substr(8);
        if (!json::accept(model.training_meta)) throw fail("malformed training metadata");
        if (!std::getline(in, line)) throw fail("truncated model file");
    }
    if (line.rfind("layers ", 0) != 0) throw fail("missing layer count");
    size_t n_layers = std::stoul(line.substr(7));
    for (size_t l = 0; l < n_layers; ++l) {
        if (!std::getline(in, line) || line.rfind("layer ", 0) != 0)
            throw fail("truncated model file: missing layer header");
        Layer layer;
        {
            std::istringstream ss(line.substr(6));
            if (!(ss >> layer.out_dim >> layer.in_dim)) throw fail("bad layer header");
        }
        layer.weights.reserve(static_cast<size_t>(layer.out_dim) * layer.in_dim);
        for (int r = 0; r < layer.out_dim; ++r) {
            if (!std::getline(in, line)) throw fail("truncated model file: missing weight row");
            std::istringstream ss(line);
            double v;
            int c = 0;
            while (ss >> v) {
                layer.weights.push_back(v);
                ++c;
            }
            if (c != layer.in_dim) throw fail("weight row has wrong width");
        }
        if (!std::getline(in, line) || line.rfind("bias", 0) != 0)
            throw fail("truncated model file: missing bias row");
        {
            std::istringstream ss(line.substr(4));
            double v;
            while (ss >> v) layer.biases.push_back(v);
        }
        if (static_cast<int>(layer.biases.size()) != layer.out_dim)
            throw fail("bias row has wrong width");
        model.layers.push_back(std::move(layer));
    }
    if (!std::getline(in, line) || line != "end") throw fail("truncated model file: missing end marker");

    // The dimension chain must agree with the config and manifest.
    std::vector<int> dims{model.config.input_dim};
    for (int h : model.config.hidden_sizes) dims.push_back(h);
    dims.push_back(2);
    if (model.layers.size() + 1 != dims.size()) throw fail("layer count does not match config");
    for (size_t l = 0; l < model.layers.size(); ++l)
        if (model.layers[l].in_dim != dims[l] || model.layers[l].out_dim != dims[l + 1])
            throw fail("layer dimensions do not chain with config");
    if (static_cast<size_t>(model.config.input_dim) != model.manifest.names.size())
        throw fail("input_dim does not match manifest");
    for (const auto& layer : model.layers)
        for (double w : layer.weights)
            if (!std::isfinite(w)) throw fail("non-finite parameter");
    return model;
}

void save_history(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write history file " + path);
    json j;
    j["best_epoch"] = history.best_epoch;
    json epochs = json::array();
    for (const auto& e : history.epochs) {
        json je;
        je["epoch"] = e.epoch;
        je["train_loss"] = e.train_loss;
        je["val_accuracy"] = e.val_accuracy ? json(*e.val_accuracy) : json(nullptr);
        je["val_tau"] = e.val_tau ? json(*e.val_tau) : json(nullptr);
        epochs.push_back(je);
    }
    j["epochs"] = epochs;
    out << j.dump(2) << '\n';
}

}  // namespace lceval

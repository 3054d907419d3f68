#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "features.hpp"

namespace lceval {

struct NetworkConfig {
    int input_dim = 0;
    std::vector<int> hidden_sizes = {12};  // empty = linear softmax model
    double l2_coefficient = 1e-4;
    uint64_t seed = 0;

    void validate() const;
};

// Dense layer parameters, row-major: weights[r * in_dim + c].
struct Layer {
    int in_dim = 0;
    int out_dim = 0;
    std::vector<double> weights;
    std::vector<double> biases;
};

struct Model {
    NetworkConfig config;
    FeatureManifest manifest;
    std::vector<Layer> layers;  // hidden layers then the 2-way output layer
    std::string training_meta;  // JSON blob recorded by training, empty if untrained

    size_t parameter_count() const;
};

struct TrainConfig {
    double learning_rate = 0.0005;
    int batch_size = 75;
    int max_epochs = 800;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    uint64_t shuffle_seed = 0;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_accuracy;
    std::optional<double> val_tau;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = -1;  // first epoch attaining the maximum recorded tau
};

// Glorot-uniform weights, zero biases, deterministic under config.seed.
Model init_model(const NetworkConfig& config, const FeatureManifest& manifest);

struct Forward {
    double prob_machine = 0.0;
    double prob_human = 0.0;
    std::vector<std::vector<double>> activations;  // input + each hidden output
    std::vector<double> logits;
};

Forward forward(const Model& model, const std::vector<double>& x);

// P(human | x): the metric value.
double score(const Model& model, const std::vector<double>& x);

struct Example {
    std::vector<double> x;
    int label = 0;  // 0 = machine, 1 = human
};

// Mean cross entropy plus l2 * sum of squared weights (biases excluded).
double loss(const Model& model, const std::vector<Example>& batch);

struct Gradients {
    std::vector<Layer> layers;  // same shapes as the model, gradient values
};

Gradients gradients(const Model& model, const std::vector<Example>& batch);

struct AdamState {
    std::vector<Layer> m;
    std::vector<Layer> v;
    int64_t step = 0;
};

AdamState make_adam_state(const Model& model);
void adam_step(Model& model, const Gradients& grads, AdamState& state, const TrainConfig& config);

// Features of labeled records; label unknown is rejected.
std::vector<Example> to_examples(const std::vector<FeatureVector>& vectors,
                                 const FeatureManifest& manifest);

struct TrainResult {
    Model best_model;
    TrainHistory history;
};

// Minibatch Adam over the training set with per-epoch validation
// accuracy and Kendall tau against human scores; the returned model is
// the one from the tau-maximizing epoch.
TrainResult train(const std::vector<FeatureVector>& train_vectors,
                  const std::vector<FeatureVector>& val_vectors, const FeatureManifest& manifest,
                  const NetworkConfig& net_config, const TrainConfig& train_config,
                  std::function<void(const EpochStats&)> on_epoch = nullptr);

// Single self-describing text file; reloading reproduces scores bitwise
// on the same platform.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

void save_history(const TrainHistory& history, const std::string& path);

}  // namespace lceval

#include "lceval/lceval.h"

#include <cstring>
#include <string>

#include "commands.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "semantic.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

// Runs f(), translating exceptions into status codes.
template <typename F>
lceval_status guarded(F&& f) {
    try {
        f();
        return LCEVAL_OK;
    } catch (const lceval::input_error& e) {
        set_error(e.what());
        return LCEVAL_INPUT_ERROR;
    } catch (const lceval::internal_error& e) {
        set_error(e.what());
        return LCEVAL_INTERNAL_ERROR;
    } catch (const std::exception& e) {
        set_error(e.what());
        return LCEVAL_INTERNAL_ERROR;
    }
}

lceval_status run(const char* name, const char* config_json) {
    std::string error;
    int rc = lceval::run_command(name, config_json ? config_json : "", &error);
    if (rc != 0) set_error(error);
    return static_cast<lceval_status>(rc);
}

}  // namespace

struct lceval_embeddings {
    lceval::EmbeddingTable table;
};

struct lceval_model {
    lceval::Model model;
};

extern "C" {

const char* lceval_version(void) { return lceval::kVersion; }

const char* lceval_last_error(void) { return g_last_error.c_str(); }

lceval_status lceval_embeddings_open(const char* path, lceval_embeddings** out) {
    if (!path || !out) {
        set_error("null argument");
        return LCEVAL_INPUT_ERROR;
    }
    *out = nullptr;
    return guarded([&] { *out = new lceval_embeddings{lceval::load_embeddings(path)}; });
}

void lceval_embeddings_free(lceval_embeddings* table) { delete table; }

lceval_status lceval_embeddings_dim(const lceval_embeddings* table, int* dim_out) {
    if (!table || !dim_out) {
        set_error("null argument");
        return LCEVAL_INPUT_ERROR;
    }
    *dim_out = table->table.dimension;
    return LCEVAL_OK;
}

lceval_status lceval_embeddings_count(const lceval_embeddings* table, size_t* count_out) {
    if (!table || !count_out) {
        set_error("null argument");
        return LCEVAL_INPUT_ERROR;
    }
    *count_out = table->table.vectors.size();
    return LCEVAL_OK;
}

lceval_status lceval_model_open(const char* path, lceval_model** out) {
    if (!path || !out) {
        set_error("null argument");
        return LCEVAL_INPUT_ERROR;
    }
    *out = nullptr;
    return guarded([&] { *out = new lceval_model{lceval::load_model(path)}; });
}

void lceval_model_free(lceval_model* model) { delete model; }

lceval_status lceval_model_input_dim(const lceval_model* model, int* dim_out) {
    if (!model || !dim_out) {
        set_error("null argument");
        return LCEVAL_INPUT_ERROR;
    }
    *dim_out = model->model.config.input_dim;
    return LCEVAL_OK;
}

lceval_status lceval_model_manifest(const lceval_model* model, char** json_out) {
    if (!model || !json_out) {
        set_error("null argument");
        return LCEVAL_INPUT_ERROR;
    }
    return guarded([&] {
        std::string text = model->model.manifest.to_json();
        char* buf = new char[text.size() + 1];
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *json_out = buf;
    });
}

lceval_status lceval_model_score(const lceval_model* model, const double* features, int length,
                                 double* score_out) {
    if (!model || !features || !score_out) {
        set_error("null argument");
        return LCEVAL_INPUT_ERROR;
    }
    return guarded([&] {
        std::vector<double> x(features, features + length);
        *score_out = lceval::score(model->model, x);
    });
}

void lceval_string_free(char* s) { delete[] s; }

lceval_status lceval_cmd_extract(const char* config_json) { return run("extract", config_json); }
lceval_status lceval_cmd_train(const char* config_json) { return run("train", config_json); }
lceval_status lceval_cmd_score(const char* config_json) { return run("score", config_json); }
lceval_status lceval_cmd_eval(const char* config_json) { return run("eval", config_json); }
lceval_status lceval_cmd_pair(const char* config_json) { return run("pair", config_json); }
lceval_status lceval_cmd_perturb(const char* config_json) { return run("perturb", config_json); }

}  // extern "C"

/* lceval — learned composite caption-evaluation metric.
 *
 * C interface to the shared library. All functions return an
 * lceval_status; on failure lceval_last_error() describes what went
 * wrong (the message is thread-local and valid until the next failing
 * call on the same thread). Handles are opaque and freed with their
 * matching *_free function.
 */

#ifndef LCEVAL_H
#define LCEVAL_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lceval_status {
    LCEVAL_OK = 0,
    LCEVAL_INTERNAL_ERROR = 1, /* broken invariant inside the library */
    LCEVAL_INPUT_ERROR = 2     /* bad arguments, files, or formats */
} lceval_status;

const char* lceval_version(void);
const char* lceval_last_error(void);

/* ---- embeddings ------------------------------------------------------ */

typedef struct lceval_embeddings lceval_embeddings;

lceval_status lceval_embeddings_open(const char* path, lceval_embeddings** out);
void lceval_embeddings_free(lceval_embeddings* table);
lceval_status lceval_embeddings_dim(const lceval_embeddings* table, int* dim_out);
lceval_status lceval_embeddings_count(const lceval_embeddings* table, size_t* count_out);

/* ---- models ---------------------------------------------------------- */

typedef struct lceval_model lceval_model;

lceval_status lceval_model_open(const char* path, lceval_model** out);
void lceval_model_free(lceval_model* model);
lceval_status lceval_model_input_dim(const lceval_model* model, int* dim_out);

/* Manifest of the model's feature contract as a JSON string; free the
 * result with lceval_string_free. */
lceval_status lceval_model_manifest(const lceval_model* model, char** json_out);

/* P(human) for one feature vector laid out in manifest order. */
lceval_status lceval_model_score(const lceval_model* model, const double* features, int length,
                                 double* score_out);

void lceval_string_free(char* s);

/* ---- commands -------------------------------------------------------- */

/* File-level pipeline stages, each driven by a JSON run configuration
 * (the same schema the CLI resolves its flags into). The return value
 * doubles as the process exit code: 0 ok, 1 internal error, 2 input
 * error. */
lceval_status lceval_cmd_extract(const char* config_json);
lceval_status lceval_cmd_train(const char* config_json);
lceval_status lceval_cmd_score(const char* config_json);
lceval_status lceval_cmd_eval(const char* config_json);
lceval_status lceval_cmd_pair(const char* config_json);
lceval_status lceval_cmd_perturb(const char* config_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LCEVAL_H */

/* C API for the seco engine: synthetic sequence generation, contrastive
 * pre-training with a momentum dual encoder, and frozen-feature evaluation.
 *
 * All entry points are thread-safe with respect to distinct handles; a
 * seco_config must not be used from two threads at once. Functions return
 * SECO_OK (0) on success; on failure they return a status code and leave a
 * human-readable message in seco_last_error() (thread-local). Status codes
 * are stable and double as the CLI's exit codes.
 */
#ifndef SECO_H
#define SECO_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SECO_API __declspec(dllexport)
#else
#define SECO_API __attribute__((visibility("default")))
#endif

typedef enum seco_status {
    SECO_OK = 0,
    SECO_ERR_IO = 1,           /* missing/unreadable/unwritable files */
    SECO_ERR_CONFIG = 2,       /* bad config keys/values, malformed files */
    SECO_ERR_DIVERGED = 3,     /* non-finite training loss */
    SECO_ERR_CHECK_FAILED = 4, /* gradient check found a discrepancy */
    SECO_ERR_INVALID = 5,      /* contract violation (null pointer, bad call) */
    SECO_ERR_INTERNAL = 6
} seco_status;

/* Opaque key=value configuration (gen.*, train.*, probe.* keys). A fresh
 * handle carries every documented default. */
typedef struct seco_config seco_config;

SECO_API seco_config* seco_config_create(void);
SECO_API void seco_config_destroy(seco_config* cfg);

/* Applies `key = value` lines from a file over the current values. Unknown
 * keys and unparsable values are errors. */
SECO_API seco_status seco_config_load_file(seco_config* cfg, const char* path);
SECO_API seco_status seco_config_set(seco_config* cfg, const char* key, const char* value);

/* Resolved configuration as text, one `key = value` line per known key.
 * The caller frees *out with seco_string_free. */
SECO_API seco_status seco_config_render(const seco_config* cfg, char** out);

/* Generates a synthetic dataset per gen.* and writes it to out_path.
 * Optionally reports the sequence count and the file size in bytes. */
SECO_API seco_status seco_generate_data(const seco_config* cfg, const char* out_path,
                                        uint32_t* num_sequences, uint64_t* file_bytes);

/* Trains per train.* on the dataset at data_path and writes checkpoint.seck
 * and metrics.csv into out_dir (created if absent). */
SECO_API seco_status seco_train(const seco_config* cfg, const char* data_path,
                                const char* out_dir);

/* Frozen-feature evaluation: linear probe of backbone features plus held-out
 * temporal-order accuracy. *report receives "metric,value" rows; the caller
 * frees it with seco_string_free. */
SECO_API seco_status seco_probe(const seco_config* cfg, const char* checkpoint_path,
                                const char* train_data_path, const char* eval_data_path,
                                char** report);

/* Finite-difference validation of every loss gradient. With inject_fault
 * nonzero, one deliberately corrupted backward rule is added; the run must
 * then report SECO_ERR_CHECK_FAILED. *report receives the per-target lines. */
SECO_API seco_status seco_grad_check(int inject_fault, char** report);

/* Message for the most recent failure on this thread; never NULL. */
SECO_API const char* seco_last_error(void);

SECO_API void seco_string_free(char* s);

SECO_API const char* seco_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SECO_H */

#ifndef KITAEV_LAB_H
#define KITAEV_LAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define KL_API __declspec(dllexport)
#else
#define KL_API __attribute__((visibility("default")))
#endif

/* Status values match the CLI exit codes. */
typedef enum kl_status {
    KL_OK = 0,
    KL_ERR_INTERNAL = 1,
    KL_ERR_CONFIG = 2,
    KL_ERR_NUMERIC = 3,
    KL_ERR_DOMAIN = 4
} kl_status;

typedef struct kl_config kl_config;
typedef struct kl_spectrum kl_spectrum;

/* Receives warnings (e.g. failed sweep rows) while a task runs. */
typedef void (*kl_diagnostic_fn)(const char* message, void* user);

KL_API const char* kl_version(void);

/* Message of the last failed call on this thread; "" when none. */
KL_API const char* kl_last_error(void);

KL_API kl_status kl_config_parse(const char* json_text, kl_config** out);
KL_API kl_status kl_config_load(const char* path, kl_config** out);
KL_API void kl_config_free(kl_config* config);

/* key is dotted ("model.mu") or a JSON pointer; value is JSON or a bare string. */
KL_API kl_status kl_config_set(kl_config* config, const char* key, const char* value);
KL_API kl_status kl_config_set_task(kl_config* config, const char* task);
KL_API kl_status kl_config_set_workers(kl_config* config, int workers);

/* Resolved config as JSON; release with kl_string_free. */
KL_API kl_status kl_config_to_json(const kl_config* config, char** out_json);
KL_API void kl_string_free(char* s);

/* Runs the configured task and writes its tables into out_dir. */
KL_API kl_status kl_run(const kl_config* config, const char* out_dir, kl_diagnostic_fn diag, void* user);

/* Eigen-decomposition of the configured model. */
KL_API kl_status kl_spectrum_compute(const kl_config* config, kl_spectrum** out);
KL_API size_t kl_spectrum_size(const kl_spectrum* spectrum);
KL_API kl_status kl_spectrum_energy(const kl_spectrum* spectrum, size_t index, double* re, double* im);
KL_API kl_status kl_spectrum_mode(const kl_spectrum* spectrum, size_t index, int* edge_flag, double* edge_weight,
                                  double* ipr);
KL_API void kl_spectrum_free(kl_spectrum* spectrum);

#ifdef __cplusplus
}
#endif

#endif

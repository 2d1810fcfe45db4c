/* stochlab C API
 *
 * Flat, C-linkage surface over the stochlab core: opaque handles for
 * sources and models, integer status codes, and JSON strings for structured
 * results. Every char* returned through an out-parameter is heap-allocated
 * by the library and must be released with stochlab_string_free().
 *
 * Thread safety: handles are immutable after creation except through the
 * *_train functions; the last-error message is thread-local.
 */
#ifndef STOCHLAB_H
#define STOCHLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define STOCHLAB_API __declspec(dllexport)
#else
#define STOCHLAB_API __attribute__((visibility("default")))
#endif

typedef int stochlab_status;

enum {
  STOCHLAB_OK = 0,
  STOCHLAB_E_INVALID_ARGUMENT = 1,
  STOCHLAB_E_DOMAIN = 2,      /* precondition violated (space mismatch, ...) */
  STOCHLAB_E_NUMERIC = 3,     /* non-finite values, diverged loss, ... */
  STOCHLAB_E_CONFIG = 4,      /* config file rejected */
  STOCHLAB_E_IO = 5,          /* filesystem failure */
  STOCHLAB_E_VERIFY_FAILED = 6, /* invariant suite reported failures */
  STOCHLAB_E_INTERNAL = 7
};

typedef struct stochlab_source stochlab_source; /* synthetic data process */
typedef struct stochlab_model stochlab_model;   /* trainable AR model */

STOCHLAB_API const char* stochlab_version(void);

/* Message for the most recent failing call on this thread; never NULL. */
STOCHLAB_API const char* stochlab_last_error(void);

STOCHLAB_API void stochlab_string_free(char* s);

/* ---- sources ---------------------------------------------------------- */

STOCHLAB_API stochlab_status stochlab_source_random(int vocab_size, int order, double gamma,
                                                    uint64_t seed, stochlab_source** out);

STOCHLAB_API stochlab_status stochlab_source_surplus(int num_classes, uint64_t seed,
                                                     stochlab_source** out);

STOCHLAB_API stochlab_status stochlab_source_two_cluster(int vocab_size, double wobble,
                                                         uint64_t seed, stochlab_source** out);

STOCHLAB_API stochlab_status stochlab_source_from_json(const char* json,
                                                       stochlab_source** out);

STOCHLAB_API stochlab_status stochlab_source_to_json(const stochlab_source* source,
                                                     char** out_json);

/* Average conditional Shannon entropy of the source, in nats. */
STOCHLAB_API stochlab_status stochlab_source_conditional_entropy(const stochlab_source* source,
                                                                 double* out_nats);

/* Information-surplus report (JSON) for the identity encoder at `horizon`. */
STOCHLAB_API stochlab_status stochlab_source_surplus_report(const stochlab_source* source,
                                                            int horizon, char** out_json);

STOCHLAB_API void stochlab_source_free(stochlab_source* source);

/* ---- models ----------------------------------------------------------- */

STOCHLAB_API stochlab_status stochlab_model_create(const stochlab_source* source, int d_emb,
                                                   int d_model, int tabular, int draft_horizon,
                                                   uint64_t seed, double init_scale,
                                                   stochlab_model** out);

STOCHLAB_API stochlab_status stochlab_model_from_json(const char* json, stochlab_model** out);

STOCHLAB_API stochlab_status stochlab_model_to_json(const stochlab_model* model,
                                                    char** out_json);

/* Exact losses over the source: out[0]=cross-entropy, out[1]=average KL,
 * out[2]=data conditional entropy. */
STOCHLAB_API stochlab_status stochlab_model_losses(const stochlab_model* model,
                                                   const stochlab_source* source,
                                                   double out[3]);

/* Full-batch training; returns the trace as CSV text. */
STOCHLAB_API stochlab_status stochlab_model_train(stochlab_model* model,
                                                  const stochlab_source* source,
                                                  double learning_rate, long epochs,
                                                  long log_every, char** out_trace_csv);

STOCHLAB_API void stochlab_model_free(stochlab_model* model);

/* ---- harness ---------------------------------------------------------- */

/* Runs a config file end to end; writes reports into its output directory
 * and returns the manifest JSON. Overrides (all optional):
 *   probe_override  - NULL keeps the config's probe list; otherwise one of
 *                     "losses", "entropy", "surplus", "geometry", "spectral",
 *                     "verify" selects exactly that probe.
 *   out_dir_override  - NULL keeps the config's output directory.
 *   seed_override     - < 0 keeps the config's seeds.
 *   format_override   - NULL keeps the config's formats; otherwise "csv",
 *                       "json", or "csv,json". */
STOCHLAB_API stochlab_status stochlab_run_file(const char* config_path,
                                               const char* probe_override,
                                               const char* out_dir_override, long seed_override,
                                               const char* format_override,
                                               char** out_manifest_json);

/* Same, from config text instead of a path. */
STOCHLAB_API stochlab_status stochlab_run_text(const char* config_text,
                                               const char* probe_override,
                                               const char* out_dir_override, long seed_override,
                                               const char* format_override,
                                               char** out_manifest_json);

/* Runs the full invariant suite. Returns STOCHLAB_OK when every check
 * passes, STOCHLAB_E_VERIFY_FAILED otherwise; the JSON lists each check
 * with a pass flag and detail line. */
STOCHLAB_API stochlab_status stochlab_verify(uint64_t seed, char** out_report_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* STOCHLAB_H */

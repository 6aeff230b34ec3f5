/* webqoe: QoS/usability correlation toolkit, C interface.
 *
 * Every fallible function returns a status code and sets a thread-local
 * message readable via webqoe_last_error(). Objects are opaque handles
 * owned by the caller; free with the matching *_free function. Strings
 * returned through char** out-parameters are heap copies; release them
 * with webqoe_string_free.
 */
#ifndef WEBQOE_H
#define WEBQOE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define WEBQOE_API __declspec(dllexport)
#else
#define WEBQOE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; they double as process exit codes. */
enum {
  WEBQOE_OK = 0,
  WEBQOE_E_USAGE = 1,   /* bad arguments or flags */
  WEBQOE_E_DATA = 2,    /* parse or validation failure */
  WEBQOE_E_NUMERIC = 3  /* numerical failure */
};

WEBQOE_API const char* webqoe_version(void);

/* Message from the most recent failure on the calling thread; empty
 * string when the last call succeeded. The pointer stays valid until the
 * next webqoe call on the same thread. */
WEBQOE_API const char* webqoe_last_error(void);

WEBQOE_API void webqoe_string_free(char* s);

/* ---- packet traces ---- */

typedef struct webqoe_trace webqoe_trace;

WEBQOE_API int webqoe_trace_load(const char* path, webqoe_trace** out);
WEBQOE_API int webqoe_trace_record_count(const webqoe_trace* trace, size_t* out);
WEBQOE_API void webqoe_trace_free(webqoe_trace* trace);

/* ---- per-trace QoS summaries ---- */

typedef struct webqoe_summary webqoe_summary;

/* ci_level in (0,1), e.g. 0.95. */
WEBQOE_API int webqoe_trace_summarize(const webqoe_trace* trace, double ci_level,
                                      webqoe_summary** out);
/* Metric names: handshake_rtt_ms, allseg_rtt_ms, mean_segment_len_bytes,
 * pkts_per_s, bytes_per_s, retrans_pkts_per_s, retrans_bytes_per_s,
 * measured_loss_rate. */
WEBQOE_API int webqoe_summary_metric(const webqoe_summary* summary, const char* name,
                                     double* out);
WEBQOE_API int webqoe_summary_to_json(const webqoe_summary* summary, char** out);
WEBQOE_API void webqoe_summary_free(webqoe_summary* summary);

/* ---- fitted regression models ---- */

typedef struct webqoe_model webqoe_model;

WEBQOE_API int webqoe_model_load(const char* path, webqoe_model** out);
WEBQOE_API int webqoe_model_parse(const char* json_text, webqoe_model** out);
/* names/values: n parallel regressor entries; unknown or missing
 * regressors fail with WEBQOE_E_DATA. */
WEBQOE_API int webqoe_model_predict(const webqoe_model* model, const char* const* names,
                                    const double* values, size_t n, double* out);
/* Ratio |coef(service_dummy)| / |coef(retrans_pkts_per_s)|: the
 * retransmission rate at which the service effect is offset. */
WEBQOE_API int webqoe_model_crossover(const webqoe_model* model, double* out);
WEBQOE_API int webqoe_model_equation(const webqoe_model* model, char** out);
WEBQOE_API void webqoe_model_free(webqoe_model* model);

/* ---- command entry points ----
 *
 * Mirrors of the CLI subcommands. config_path may be NULL to use the
 * built-in study defaults. format is "csv", "json", or "both" (the
 * default when NULL). On success the human-readable report text is
 * stored in *out_text when out_text is non-NULL. On failure nothing is
 * written to disk and *out_text is untouched. */

WEBQOE_API int webqoe_cmd_simulate(const char* config_path, uint64_t seed, const char* out_dir,
                                   char** out_text);
WEBQOE_API int webqoe_cmd_qos(const char* const* trace_paths, size_t n_paths,
                              const char* out_dir, const char* format, char** out_text);
WEBQOE_API int webqoe_cmd_usability(const char* sessions_path, const char* ratings_path,
                                    const char* config_path, const char* out_dir,
                                    const char* format, char** out_text);
WEBQOE_API int webqoe_cmd_regress(const char* qos_csv_path, const char* usability_csv_path,
                                  const char* config_path, const char* out_dir, char** out_text);
WEBQOE_API int webqoe_cmd_pipeline(const char* config_path, uint64_t seed, const char* out_dir,
                                   char** out_text);

#ifdef __cplusplus
}
#endif

#endif /* WEBQOE_H */

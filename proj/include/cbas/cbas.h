/* C interface to the adaptive-sampling benchmark library.
 *
 * All functions return CBAS_OK on success; on failure they return
 * CBAS_ERR_CONFIG (bad input or configuration) or CBAS_ERR_RUNTIME and leave
 * a message retrievable via cbas_last_error(). Strings returned through
 * out-parameters are owned by the caller and released with cbas_string_free.
 */
#ifndef CBAS_CBAS_H
#define CBAS_CBAS_H

#ifdef __cplusplus
extern "C" {
#endif

#define CBAS_OK 0
#define CBAS_ERR_CONFIG 1
#define CBAS_ERR_RUNTIME 2

typedef struct cbas_config_s cbas_config;

const char* cbas_version(void);

/* message from the most recent failing call on this thread; empty otherwise */
const char* cbas_last_error(void);

/* scenario is one of: "illustrative-1d", "sequence-design", "q-sweep",
 * "specification-1d" */
int cbas_config_default(const char* scenario, cbas_config** out);
int cbas_config_load(const char* path, cbas_config** out);
int cbas_config_parse(const char* json_text, cbas_config** out);

int cbas_config_set_scenario(cbas_config* config, const char* scenario);
int cbas_config_set_seed(cbas_config* config, unsigned long long master_seed);
int cbas_config_set_out_dir(cbas_config* config, const char* dir);

int cbas_config_validate(const cbas_config* config);
int cbas_config_to_json(const cbas_config* config, char** out_json);
void cbas_config_free(cbas_config* config);

/* run the configured scenario; artifacts are written under the configured
 * output directory and the summary JSON is returned */
int cbas_run(const cbas_config* config, char** out_summary_json);

/* recompute aggregate.csv and summary.json from the per-run CSVs in dir */
int cbas_report(const char* dir, char** out_summary_json);

void cbas_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* CBAS_CBAS_H */

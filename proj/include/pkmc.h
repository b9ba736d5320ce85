/* Apache License, Version 2.0, refer to LICENSE.txt */
/*
 * C interface to the Poisson-Kingman hybrid MCMC library. Opaque handles,
 * integer status codes, thread-local error messages. All functions return
 * PKMC_OK on success; on failure pkmc_last_error() describes the problem.
 */

#ifndef PKMC_H
#define PKMC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pkmc_status {
  PKMC_OK = 0,
  PKMC_ERR_CONFIG = 1, /* invalid configuration or arguments */
  PKMC_ERR_IO = 2,     /* file system failure */
  PKMC_ERR_NUMERIC = 3 /* sampling or evaluation failure */
} pkmc_status;

typedef struct pkmc_config pkmc_config; /* opaque */

const char* pkmc_version(void);

/* Message for the most recent failure on this thread. Never NULL. */
const char* pkmc_last_error(void);

pkmc_config* pkmc_config_create(void);
void pkmc_config_free(pkmc_config* cfg);

/* Set one flat key, e.g. pkmc_config_set(cfg, "prior.family", "pitman-yor").
 * Keys and values use the same grammar as the TOML config file. */
pkmc_status pkmc_config_set(pkmc_config* cfg, const char* key, const char* value);

/* Merge every key of a TOML-style config file into cfg. */
pkmc_status pkmc_config_load_file(pkmc_config* cfg, const char* path);

/* Run the configured chains; writes chain_<k>.csv, summary.csv, report.txt.
 * out_dir overrides the configured output directory when non-NULL. */
pkmc_status pkmc_run(const pkmc_config* cfg, const char* out_dir);

/* EPPF reproduction suite for the configured Pitman-Yor prior on n
 * observations. *pass_out is 1 when every partition probability is inside
 * 3 MC standard errors. The report is heap text; free with pkmc_string_free. */
pkmc_status pkmc_prior_check(const pkmc_config* cfg, int n, long sweeps,
                             long forward_draws, char** report_out, int* pass_out);

/* Geweke joint-distribution test with the configured prior and variant.
 * *pass_out is 1 when every monitored |z| < 4. */
pkmc_status pkmc_geweke(const pkmc_config* cfg, int n_obs, long min_effective,
                        char** report_out, int* pass_out);

/* ESS of a raw series (Geyer initial monotone positive sequence truncation). */
pkmc_status pkmc_ess(const double* series, long n, double* ess_out,
                     long* cutoff_lag_out, int* degenerate_out);

/* ESS report for the K and T columns of an existing trace CSV. */
pkmc_status pkmc_trace_ess(const char* trace_csv_path, char** report_out);

void pkmc_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* PKMC_H */

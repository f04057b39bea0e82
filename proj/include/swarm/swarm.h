/* C API for the swarm learning runtime: opaque handles + status codes.
 * Every function returning swarm_status sets a thread-local error message
 * readable via swarm_last_error() on failure. */
#ifndef SWARM_H
#define SWARM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum swarm_status {
    SWARM_OK = 0,
    SWARM_ERR_INVALID_ARG = 1,  /* bad input, config, or file contents */
    SWARM_ERR_RUNTIME = 2,      /* I/O, transport, or internal failure */
} swarm_status;

/* Message describing the most recent failure on this thread. */
const char* swarm_last_error(void);

/* ---- datasets ---- */

typedef struct swarm_dataset swarm_dataset;

swarm_status swarm_dataset_synth(uint64_t n, uint64_t d, double class_sep,
                                 double positive_frac, int64_t seed,
                                 swarm_dataset** out);
swarm_status swarm_dataset_load_csv(const char* path, swarm_dataset** out);
swarm_status swarm_dataset_write_csv(const swarm_dataset* ds, const char* path);
uint64_t swarm_dataset_rows(const swarm_dataset* ds);
uint64_t swarm_dataset_cols(const swarm_dataset* ds);
void swarm_dataset_free(swarm_dataset* ds);

/* Writes node<k>_train.csv / node<k>_val.csv per node into out_dir.
 * class_bias may be NULL. */
swarm_status swarm_partition_csv(const swarm_dataset* ds, const double* fractions,
                                 uint64_t n_nodes, const double* class_bias,
                                 int64_t seed, double val_frac, const char* out_dir);

/* ---- experiments ---- */

/* Executes the scenario spec (JSON file); one result file per seed in
 * out_dir. verbose != 0 logs progress to stderr. */
swarm_status swarm_run_scenario(const char* spec_path, const char* out_dir, int verbose);

/* N-node simulated swarm on a default synthetic dataset; writes one result
 * file into out_dir. */
swarm_status swarm_run_sim(uint32_t nodes, int64_t seed, const char* out_dir);

/* Renders all result files found in results_dir. format is "text" (summary
 * with means/stds/uplifts) or "csv" (per-cell table). *out receives a
 * malloc'd string; free with swarm_text_free. */
swarm_status swarm_report(const char* results_dir, const char* format, char** out);
void swarm_text_free(char* text);

/* ---- real-transport node ---- */

typedef struct swarm_node swarm_node;

/* Starts a TCP node from a JSON config file; returns immediately. */
swarm_status swarm_node_start(const char* config_path, int verbose, swarm_node** out);
/* Manual stop, observed at epoch granularity. Fails with
 * SWARM_ERR_RUNTIME ("AlreadyStopped") once the run has finished. */
swarm_status swarm_node_signal_stop(swarm_node* node);
/* Blocks until the run ends. *summary (optional) receives a malloc'd JSON
 * string with the final reports; free with swarm_text_free. */
swarm_status swarm_node_wait(swarm_node* node, char** summary);
void swarm_node_free(swarm_node* node);

#ifdef __cplusplus
}
#endif

#endif /* SWARM_H */

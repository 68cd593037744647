/* C interface to the cloud-removal library.
 *
 * All functions return a status code; 0 is success. On failure a
 * human-readable message is available from dbcr_last_error() until the next
 * call on the same thread.
 */
#ifndef DBCR_H
#define DBCR_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct dbcr_ctx dbcr_ctx;

enum dbcr_status {
  DBCR_OK = 0,
  DBCR_ERR_CONFIG = 2,
  DBCR_ERR_NUMERIC = 3,
  DBCR_ERR_IO = 4
};

/* Context with default configuration; never fails except on allocation. */
dbcr_ctx* dbcr_ctx_create(void);
void dbcr_ctx_free(dbcr_ctx* ctx);

/* Replaces the context configuration from a JSON file (strict keys). */
int dbcr_load_config(dbcr_ctx* ctx, const char* path);

/* Applies one "section.key" override; value is JSON-encoded (bare strings
 * are accepted as-is). */
int dbcr_set(dbcr_ctx* ctx, const char* dotted_key, const char* json_value);

/* Writes the current configuration as JSON into buf (NUL-terminated,
 * truncated to bufsize); returns needed length via *needed if non-NULL. */
int dbcr_get_config(dbcr_ctx* ctx, char* buf, size_t bufsize, size_t* needed);

/* Generates the synthetic dataset under out_dir. */
int dbcr_make_data(dbcr_ctx* ctx, const char* out_dir);

/* Trains on the dataset under data_root; checkpoints and the loss log go to
 * out_dir. Resumes from out_dir/last.ckpt when present. */
int dbcr_train(dbcr_ctx* ctx, const char* data_root, const char* out_dir);

/* Restores one scene directory (x0.bin/y.bin/z.bin/meta.txt layout) with the
 * given checkpoint. Writes restored.bin plus preview images to out_dir.
 * trace != 0 additionally writes every intermediate state. */
int dbcr_infer(dbcr_ctx* ctx, const char* checkpoint, const char* scene_dir,
               const char* out_dir, int trace);

/* Evaluates a checkpoint over one split of the dataset. nfe_sweep is a
 * comma-separated list like "1,5,10", or NULL for the configured value.
 * compare_sde != 0 runs both samplers (requires train.sde_beta_max). */
int dbcr_eval(dbcr_ctx* ctx, const char* checkpoint, const char* data_root,
              const char* split, const char* out_dir, const char* nfe_sweep,
              int compare_sde);

/* Message for the most recent failure on this thread; never NULL. */
const char* dbcr_last_error(void);

#ifdef __cplusplus
}
#endif

#endif /* DBCR_H */

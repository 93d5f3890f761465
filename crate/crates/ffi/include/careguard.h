#ifndef CAREGUARD_H
#define CAREGUARD_H

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every FFI call.
 */
typedef enum CgStatus {
  CG_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CG_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  CG_STATUS_INVALID_UTF8 = 2,
  /**
   * A file could not be read.
   */
  CG_STATUS_IO = 3,
  /**
   * The record line or a model/schema file did not parse.
   */
  CG_STATUS_PARSE = 4,
  /**
   * A model file was structurally valid but unusable (wrong kind,
   * version or checksum).
   */
  CG_STATUS_MODEL = 5,
  /**
   * Unexpected internal failure.
   */
  CG_STATUS_INTERNAL = 6,
} CgStatus;

/**
 * Which detection layer classifies the record.
 */
typedef enum CgLayer {
  CG_LAYER_ANOMALY = 0,
  CG_LAYER_MISUSE = 1,
  CG_LAYER_HYBRID = 2,
} CgLayer;

/**
 * Opaque handle over the loaded layer stack.
 */
typedef struct CgIds CgIds;

/**
 * Classification result. `attack_class` is a NUL-terminated name, empty
 * for normal verdicts; `corrected` is non-zero when the hybrid decision
 * unit overturned an anomaly positive.
 */
typedef struct CgVerdict {
  int32_t is_attack;
  int32_t corrected;
  char attack_class[32];
} CgVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the library, as a static NUL-terminated string.
 */
const char *cg_version(void);

/**
 * Static description of a status code.
 */
const char *cg_status_message(enum CgStatus status);

/**
 * Loads the encoding schema from a built dataset directory and the two
 * trained models, returning a handle through `out`.
 *
 * # Safety
 * The three path arguments must be null or NUL-terminated strings valid
 * for reads; `out` must be a valid pointer to a `*mut CgIds`.
 */
enum CgStatus cg_ids_open(const char *dataset_dir,
                          const char *anomaly_model,
                          const char *misuse_model,
                          struct CgIds **out);

/**
 * Classifies one comma-separated record line (41 features, optionally
 * followed by a label and difficulty) with the chosen layer.
 *
 * # Safety
 * `ids` must be a handle from [`cg_ids_open`] not yet freed; `line` must be
 * null or a NUL-terminated string valid for reads; `out` must be a valid
 * pointer to a `CgVerdict`.
 */
enum CgStatus cg_ids_classify_line(const struct CgIds *ids,
                                   enum CgLayer layer,
                                   const char *line,
                                   struct CgVerdict *out);

/**
 * Releases a handle. Accepts null.
 *
 * # Safety
 * `ids` must be null or a handle from [`cg_ids_open`] not yet freed.
 */
void cg_ids_free(struct CgIds *ids);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAREGUARD_H */

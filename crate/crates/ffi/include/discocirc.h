#ifndef DISCOCIRC_H
#define DISCOCIRC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum DcStatus {
  DC_STATUS_OK = 0,
  DC_STATUS_NULL_POINTER = 1,
  DC_STATUS_INVALID_UTF8 = 2,
  DC_STATUS_FORMAT = 3,
  DC_STATUS_INVALID_DIAGRAM = 4,
  DC_STATUS_NO_PARSE = 5,
  DC_STATUS_CAP_EXCEEDED = 6,
  DC_STATUS_UNEXPANDED_FRAME = 7,
  DC_STATUS_SIMULATION = 8,
  DC_STATUS_INVALID_CONFIG = 9,
  DC_STATUS_BUFFER_SIZE = 10,
  DC_STATUS_IO = 11,
  DC_STATUS_PANIC = 12,
  DC_STATUS_OTHER = 13,
} DcStatus;

/**
 * A compiled parameterised circuit.
 */
typedef struct DcCircuit DcCircuit;

/**
 * A parsed document with its coreference chains.
 */
typedef struct DcDocument DcDocument;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy of the last error raised on this thread, or null. Free with
 * [`dc_string_free`].
 */
char *dc_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void dc_string_free(char *s);

/**
 * Loads an interchange document from a file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum DcStatus dc_document_load(const char *path, struct DcDocument **out);

/**
 * Parses an interchange document from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid for writes.
 */
enum DcStatus dc_document_from_json(const char *json, struct DcDocument **out);

/**
 * Parses plain text with the built-in lexicon and resolves pronouns.
 *
 * # Safety
 * `plain` must be a NUL-terminated string and `out` valid for writes.
 */
enum DcStatus dc_document_from_text(const char *plain, struct DcDocument **out);

/**
 * Number of sentences, or 0 for a null handle.
 *
 * # Safety
 * `doc` must be null or a live document handle.
 */
size_t dc_document_sentence_count(const struct DcDocument *doc);

/**
 * # Safety
 * `doc` must be null or a document handle not yet freed.
 */
void dc_document_free(struct DcDocument *doc);

/**
 * Runs the pipeline down to a circuit. `config_json` is a pipeline
 * configuration object; null or `"{}"` selects the defaults.
 *
 * # Safety
 * `doc` must be a live document handle, `config_json` null or a
 * NUL-terminated string, and `out` valid for writes.
 */
enum DcStatus dc_compile(const struct DcDocument *doc,
                         const char *config_json,
                         struct DcCircuit **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid for writes.
 */
enum DcStatus dc_circuit_from_json(const char *json, struct DcCircuit **out);

/**
 * Serialises a circuit; free the result with [`dc_string_free`].
 *
 * # Safety
 * `circuit` must be a live circuit handle and `out` valid for writes.
 */
enum DcStatus dc_circuit_to_json(const struct DcCircuit *circuit, char **out);

/**
 * # Safety
 * `circuit` must be null or a live circuit handle.
 */
size_t dc_circuit_qubit_count(const struct DcCircuit *circuit);

/**
 * Number of outcomes in the output distribution, `2^outputs`.
 *
 * # Safety
 * `circuit` must be null or a live circuit handle.
 */
size_t dc_circuit_outcome_count(const struct DcCircuit *circuit);

/**
 * Simulates the circuit. `params_json` maps symbols to values and may be
 * null to use the circuit's initial values. `probs` receives the
 * renormalised output distribution and must hold exactly
 * [`dc_circuit_outcome_count`] entries; `success` (nullable) receives the
 * postselection success probability.
 *
 * # Safety
 * `circuit` must be a live circuit handle, `params_json` null or a
 * NUL-terminated string, `probs` valid for `len` writes and `success` null
 * or valid for one write.
 */
enum DcStatus dc_simulate(const struct DcCircuit *circuit,
                          const char *params_json,
                          double *probs,
                          size_t len,
                          double *success);

/**
 * # Safety
 * `circuit` must be null or a circuit handle not yet freed.
 */
void dc_circuit_free(struct DcCircuit *circuit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISCOCIRC_H */

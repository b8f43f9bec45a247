#ifndef WRAPSYNTH_H
#define WRAPSYNTH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WsDomain {
  WS_DOMAIN_INTERVAL = 0,
  WS_DOMAIN_OCTAGON = 1,
} WsDomain;

typedef enum WsStrategy {
  WS_STRATEGY_LADDER = 0,
  WS_STRATEGY_EXACT = 1,
  WS_STRATEGY_RELATIONAL = 2,
  WS_STRATEGY_CONST = 3,
  WS_STRATEGY_MEDIUM = 4,
} WsStrategy;

typedef enum WsStatus {
  WS_STATUS_OK = 0,
  /**
   * Verification found an unsound output.
   */
  WS_STATUS_UNSOUND = 1,
  WS_STATUS_INVALID_ARGUMENT = 2,
  WS_STATUS_PARSE = 3,
  WS_STATUS_RESOURCE_LIMIT = 4,
  WS_STATUS_INTERNAL = 5,
} WsStatus;

/**
 * A parsed basic block.
 */
typedef struct WsBlock WsBlock;

/**
 * A synthesized or parsed transfer function.
 */
typedef struct WsTransferFunction WsTransferFunction;

/**
 * Synthesis options. `conflict_budget` 0 means unlimited.
 */
typedef struct WsSynthOptions {
  enum WsDomain domain;
  enum WsStrategy strategy;
  bool drop_redundant;
  uint64_t conflict_budget;
} WsSynthOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *ws_last_error(void);

/**
 * Default options: octagon domain, full strategy ladder, no budget.
 */
struct WsSynthOptions ws_synth_options_default(void);

/**
 * Parses assembly text. `width` 0 keeps the block's own (default 32).
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` must be writable.
 */
enum WsStatus ws_block_parse(const char *text, uint32_t width, struct WsBlock **out);

/**
 * Sets the interpretation: `is_unsigned` selects unsigned, else signed.
 *
 * # Safety
 * `block` must be a live handle.
 */
enum WsStatus ws_block_set_unsigned(struct WsBlock *block, bool is_unsigned);

/**
 * Gives `LSL` the four signed modes instead of the carry-out pair.
 *
 * # Safety
 * `block` must be a live handle.
 */
enum WsStatus ws_block_set_lsl_signed(struct WsBlock *block, bool enable);

/**
 * # Safety
 * `block` must be null or a handle from [`ws_block_parse`], freed once.
 */
void ws_block_free(struct WsBlock *block);

/**
 * Synthesizes a transfer function. `options` may be null for defaults.
 *
 * # Safety
 * `block` must be a live handle, `options` null or valid, `out` writable.
 */
enum WsStatus ws_synthesize(const struct WsBlock *block,
                            const struct WsSynthOptions *options,
                            struct WsTransferFunction **out);

/**
 * Parses a transfer function in text or JSON form.
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` must be writable.
 */
enum WsStatus ws_tf_parse(const char *text, struct WsTransferFunction **out);

/**
 * Serializes as JSON (`json` true) or text. Free the string with
 * [`ws_string_free`].
 *
 * # Safety
 * `tf` must be a live handle; `out` must be writable.
 */
enum WsStatus ws_tf_serialize(const struct WsTransferFunction *tf, bool json, char **out);

/**
 * Number of guarded-update pairs.
 *
 * # Safety
 * `tf` must be a live handle; `out` must be writable.
 */
enum WsStatus ws_tf_pair_count(const struct WsTransferFunction *tf, size_t *out);

/**
 * Applies the function to a state expression such as
 * `"-10 <= R0 <= 5, R0+R1 <= 3"`; writes the rendered output state.
 *
 * # Safety
 * `tf` must be a live handle, `state` a nul-terminated string, `out`
 * writable.
 */
enum WsStatus ws_tf_apply(const struct WsTransferFunction *tf, const char *state, char **out);

/**
 * Checks `tf` against brute force on `block` and writes the JSON report.
 * Returns [`WsStatus::Unsound`] when the report is not clean.
 *
 * # Safety
 * Handles must be live; `report` must be writable or null.
 */
enum WsStatus ws_verify(const struct WsTransferFunction *tf,
                        const struct WsBlock *block,
                        size_t samples,
                        uint64_t seed,
                        char **report);

/**
 * # Safety
 * `tf` must be null or a handle from this library, freed once.
 */
void ws_tf_free(struct WsTransferFunction *tf);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void ws_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WRAPSYNTH_H */

#ifndef RFORGE_H
#define RFORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RfStatus {
  RF_STATUS_OK = 0,
  RF_STATUS_NULL_ARGUMENT = 1,
  RF_STATUS_INVALID_UTF8 = 2,
  RF_STATUS_PARSE = 3,
  RF_STATUS_LOGIC = 4,
  RF_STATUS_ENGINE = 5,
  /**
   * `rf_formula_variable_sharing` on a formula that is not a conditional.
   */
  RF_STATUS_NOT_A_CONDITIONAL = 6,
  RF_STATUS_IO = 7,
  RF_STATUS_OUT_OF_RANGE = 8,
  RF_STATUS_PIPELINE = 9,
  RF_STATUS_PANIC = 10,
} RfStatus;

/**
 * Result of `rf_derive`. Indexing covers premises and derived theorems.
 */
typedef struct RfDerivation RfDerivation;

/**
 * Parsed formula.
 */
typedef struct RfFormula RfFormula;

/**
 * Saturated logic fragment.
 */
typedef struct RfFragment RfFragment;

/**
 * Loaded logic: axioms plus rules.
 */
typedef struct RfLogic RfLogic;

/**
 * Degree of each connective: `=>`, `&`, `|`, `~`.
 */
typedef struct RfDegrees {
  uint32_t entail;
  uint32_t conj;
  uint32_t disj;
  uint32_t neg;
} RfDegrees;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call; do not free.
 */
const char *rf_last_error(void);

void rf_string_free(char *s);

enum RfStatus rf_formula_parse(const char *src, struct RfFormula **out);

void rf_formula_free(struct RfFormula *f);

/**
 * Renders with minimal parentheses. Free the result with `rf_string_free`.
 */
enum RfStatus rf_formula_render(const struct RfFormula *f, char **out);

enum RfStatus rf_formula_degrees(const struct RfFormula *f, struct RfDegrees *out);

/**
 * `zero-degree`, `first-degree` or `kth-degree(k)`.
 */
enum RfStatus rf_formula_classify(const struct RfFormula *f, char **out);

enum RfStatus rf_formula_strong_relevance(const struct RfFormula *f, bool *out);

enum RfStatus rf_formula_variable_sharing(const struct RfFormula *f, bool *out);

/**
 * Equal up to renaming of schema atoms and bound variables.
 */
enum RfStatus rf_formula_is_variant(const struct RfFormula *a,
                                    const struct RfFormula *b,
                                    bool *out);

/**
 * Loads a logic file, or a bundled one as `preset:<name>`.
 */
enum RfStatus rf_logic_load(const char *source, struct RfLogic **out);

void rf_logic_free(struct RfLogic *l);

/**
 * Saturates the axioms under `caps` (e.g. `"=>:2,&:1"`; unlisted
 * connectives are capped at 0). `max_depth` 0 keeps the default.
 */
enum RfStatus rf_fragment_generate(const struct RfLogic *logic,
                                   const char *caps_text,
                                   uint32_t max_depth,
                                   struct RfFragment **out);

enum RfStatus rf_fragment_load(const struct RfLogic *logic,
                               const char *path,
                               struct RfFragment **out);

enum RfStatus rf_fragment_save(const struct RfFragment *f, const char *path);

/**
 * Active members, subsumed ones excluded.
 */
enum RfStatus rf_fragment_len(const struct RfFragment *f, size_t *out);

void rf_fragment_free(struct RfFragment *f);

/**
 * Forward saturation of `premises` (one `label: formula` per line) with
 * the fragment. `caps_text` bounds rule results. `max_depth` 0 keeps the
 * default; `workers` 0 uses one thread per core.
 */
enum RfStatus rf_derive(const struct RfLogic *logic,
                        const struct RfFragment *fragment,
                        const char *premises,
                        const char *caps_text,
                        uint32_t max_depth,
                        uint32_t workers,
                        struct RfDerivation **out);

enum RfStatus rf_derivation_len(const struct RfDerivation *d, size_t *out);

/**
 * False when a limit cut the run short.
 */
enum RfStatus rf_derivation_complete(const struct RfDerivation *d, bool *out);

/**
 * The `index`-th theorem in id order. Free with `rf_string_free`.
 */
enum RfStatus rf_derivation_formula(const struct RfDerivation *d, size_t index, char **out);

void rf_derivation_free(struct RfDerivation *d);

/**
 * Runs a manifest end to end and stores the CLI exit code in `exit_code`
 * (0 done, 4 truncated). Setup failures return `RF_STATUS_PIPELINE` with
 * their exit code stored as well.
 */
enum RfStatus rf_pipeline_run(const char *manifest, uint32_t workers, int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RFORGE_H */

/* floodmit — flood-mitigation planning for transmission grids.
 *
 * C interface to the planning core. All functions return fm_status;
 * FM_OK means success, anything else leaves a thread-local message
 * retrievable via fm_last_error(). Objects returned through out-pointers
 * are owned by the caller and released with the matching *_free function;
 * strings returned through char** are released with fm_string_free.
 *
 * Handles are immutable after creation (except fm_config_override) and may
 * be shared across threads; concurrent solves are independent.
 */
#ifndef FLOODMIT_H
#define FLOODMIT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fm_status {
  FM_OK = 0,
  FM_ERR_IO = 1,
  FM_ERR_PARSE = 2,
  FM_ERR_VALIDATION = 3,
  FM_ERR_INVALID_ARG = 4,
  FM_ERR_SOLVER = 5,
  FM_ERR_INTERNAL = 6
} fm_status;

typedef struct fm_case fm_case;
typedef struct fm_scenarios fm_scenarios;
typedef struct fm_study fm_study;

const char* fm_version(void);

/* Message for the most recent failure on this thread. */
const char* fm_last_error(void);

void fm_string_free(char* s);

/* --- cases and scenario sets --------------------------------------- */

fm_status fm_case_load(const char* path, fm_case** out);
fm_status fm_case_parse(const char* json_text, const char* name, fm_case** out);
void fm_case_free(fm_case* c);
fm_status fm_case_to_json(const fm_case* c, char** out);
fm_status fm_case_name(const fm_case* c, char** out);

/* Merge a JSON object of config fields over the case's configuration. */
fm_status fm_config_override(fm_case* c, const char* json_text);
fm_status fm_config_hash(const fm_case* c, char** out);

fm_status fm_scenarios_load(const fm_case* c, const char* path, fm_scenarios** out);
fm_status fm_scenarios_parse(const fm_case* c, const char* json_text, fm_scenarios** out);
void fm_scenarios_free(fm_scenarios* s);
fm_status fm_scenarios_levels(const fm_scenarios* s, int* out);
fm_status fm_scenarios_count(const fm_scenarios* s, int* out);

/* Re-runs every invariant; FM_OK with an empty report when clean,
 * FM_ERR_VALIDATION with an itemized report otherwise. `scenarios` may be
 * NULL to validate the case alone. */
fm_status fm_validate(const fm_case* c, const fm_scenarios* s, char** report);

/* --- two-stage studies ---------------------------------------------- */

/* kind: sp | ro | ev | eev | ews | mv | mmv | mws
 * pf:   dc | lpac-c | lpac-f | qpac */
fm_status fm_solve_study(const fm_case* c, const fm_scenarios* s, const char* kind,
                         const char* pf, long budget, int use_warmstart, fm_study** out);
fm_status fm_study_objective(const fm_study* st, double* out);
/* Compact plan encoding "k1=2;k4=1"; empty string when the study kind has
 * no single plan (wait-and-see bounds). */
fm_status fm_study_plan_code(const fm_study* st, char** out);
/* Full record: kind, pf, budget, z, plan, per-scenario losses, node and
 * millisecond counts. */
fm_status fm_study_summary_json(const fm_study* st, char** out);
void fm_study_free(fm_study* st);

/* Precomputable maximum useful budgets (kind: sp | eev | ews | mmv). */
fm_status fm_budget_threshold(const fm_case* c, const fm_scenarios* s, const char* kind,
                              long* out);
/* Optimization-determined thresholds (kind: ro | mws). */
fm_status fm_optimized_threshold(const fm_case* c, const fm_scenarios* s, const char* kind,
                                 const char* pf, long* out);

/* Loss of a fixed plan under the kind's risk measure (sp-family mean,
 * ro-family max). */
fm_status fm_eval_plan(const fm_case* c, const fm_scenarios* s, const char* kind, const char* pf,
                       const char* plan_code, double* out);
fm_status fm_plan_cost(const fm_case* c, int levels, const char* plan_code, long* out);
/* Cost-weighted inner-product similarity; relative form normalizes by the
 * more expensive plan. */
fm_status fm_plan_similarity(const fm_case* c, int levels, const char* plan_a,
                             const char* plan_b, double* abs_out, double* rel_out);

/* Re-solve with the excluding cut; JSON: {unique, z, plan, alternate?,
 * alternate_z?}. kind: sp | ro. */
fm_status fm_uniqueness_json(const fm_case* c, const fm_scenarios* s, const char* kind,
                             const char* pf, long budget, char** out);

/* --- relaxation geometry -------------------------------------------- */

/* Minimax-optimal and equidistant cosine tangent sets with their worst
 * relaxation errors. */
fm_status fm_geometry_json(int tangent_count, double theta_delta_max, unsigned seed, char** out);
/* Sampled (theta, cos, optimal envelope, equidistant envelope) rows. */
fm_status fm_geometry_envelope_csv(int tangent_count, double theta_delta_max, unsigned seed,
                                   int samples, char** out);

/* --- audits and model export ----------------------------------------- */

/* Per-branch big-M ranges with sampled worst violations (expected <= 0). */
fm_status fm_bigm_audit_csv(const fm_case* c, const char* pf, int samples, unsigned seed,
                            char** out);

/* Deterministic-equivalent model in LP text format (kind: sp | ro | ev |
 * mv), re-importable by common external solvers. */
fm_status fm_export_lp(const fm_case* c, const fm_scenarios* s, const char* kind, const char* pf,
                       long budget, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* FLOODMIT_H */

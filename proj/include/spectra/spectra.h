#ifndef SPECTRA_SPECTRA_H
#define SPECTRA_SPECTRA_H

/* C interface to the spectrahedron projection library. All handles are
 * opaque; every fallible call returns an spx_status and leaves a message in
 * spx_last_error() (thread local). Strings returned through char** are owned
 * by the caller and released with spx_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(SPX_BUILDING_LIBRARY)
#define SPX_API __attribute__((visibility("default")))
#else
#define SPX_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct spx_instance spx_instance;
typedef struct spx_result spx_result;

typedef enum spx_status {
  SPX_OK = 0,
  SPX_ERR_INVALID_ARGUMENT = 1,
  SPX_ERR_DIMENSION_MISMATCH = 2,
  SPX_ERR_NOT_SYMMETRIC = 3,
  SPX_ERR_NOT_ORTHONORMAL = 4,
  SPX_ERR_LINEAR_ALGEBRA = 5,
  SPX_ERR_INFEASIBLE_MANIFOLD = 6,
  SPX_ERR_FACE_IS_ZERO = 7,
  SPX_ERR_NO_STALL = 8,
  SPX_ERR_INFEASIBLE_POINT = 9,
  SPX_ERR_INDEFINITE_DUAL = 10,
  SPX_ERR_SOLVER_FAILURE = 11,
  SPX_ERR_INCONCLUSIVE = 12,
  SPX_ERR_IO = 13,
  SPX_ERR_PARSE = 14,
  SPX_ERR_INTERNAL = 99
} spx_status;

typedef enum spx_solve_status {
  SPX_SOLVED = 0,
  SPX_SUSPECTED_DEGENERATE = 1,
  SPX_ITER_LIMIT = 2,
  SPX_NOT_A_SOLVE = -1
} spx_solve_status;

typedef struct spx_newton_options {
  double eps_final;
  int cond_budget;
  int max_iter;
  double reg_kappa;
  double zero_tol;
  int stop_on_cond;
} spx_newton_options;

SPX_API const char* spx_version(void);
SPX_API const char* spx_last_error(void);
SPX_API const char* spx_status_string(spx_status status);
SPX_API void spx_string_free(char* s);

/* Instances */
SPX_API spx_status spx_instance_load(const char* path, spx_instance** out);
SPX_API spx_status spx_instance_from_json(const char* text, spx_instance** out);
/* family: elliptope, vontope-pre, vontope-post, random-slater,
 * planted-noslater, dual-unattained, paper-sd2, paper-dual-fail.
 * m < 0 selects the family default; w_mode: random, rank1, feasible. */
SPX_API spx_status spx_instance_generate(const char* family, long n, long m, uint64_t seed, int sd, int iips,
                                         int support, const char* w_mode, spx_instance** out);
SPX_API spx_status spx_instance_to_json(const spx_instance* inst, char** out);
SPX_API spx_status spx_instance_save(const spx_instance* inst, const char* path);
SPX_API spx_status spx_instance_dims(const spx_instance* inst, long* n, long* m);
SPX_API void spx_instance_free(spx_instance* inst);

/* Solvers */
SPX_API void spx_newton_options_default(spx_newton_options* opts);
SPX_API spx_status spx_solve(const spx_instance* inst, const spx_newton_options* opts, spx_result** out);
SPX_API spx_status spx_fr_loop(const spx_instance* inst, spx_result** out);
SPX_API spx_status spx_pipeline_run(const spx_instance* inst, const spx_newton_options* opts, int fr_first,
                                    spx_result** out);
/* point_svec may be NULL (diagnose the terminal point of a solve). */
SPX_API spx_status spx_diagnose(const spx_instance* inst, const spx_newton_options* opts, const double* point_svec,
                                size_t len, spx_result** out);
/* suite: slater_table, noslater_table, singularity_demo, ellip_vontope_table.
 * sizes may be NULL (suite default). timing != 0 fills the wall-clock columns,
 * otherwise they read n/a. */
SPX_API spx_status spx_experiment_run(const char* suite, const long* sizes, size_t n_sizes, int count, uint64_t seed,
                                      unsigned threads, const spx_newton_options* opts, long vontope_n,
                                      int timing, spx_result** out);

/* Results */
SPX_API spx_solve_status spx_result_status(const spx_result* r);
SPX_API int spx_result_iterations(const spx_result* r);
SPX_API double spx_result_relres(const spx_result* r);
SPX_API double spx_result_cond(const spx_result* r);
SPX_API long spx_result_order(const spx_result* r);
/* Copies svec of the primal solution (original coordinates) into out[0..len). */
SPX_API spx_status spx_result_primal(const spx_result* r, double* out, size_t len);
SPX_API size_t spx_result_trace_count(const spx_result* r);
SPX_API spx_status spx_result_trace_csv(const spx_result* r, size_t index, char** out);
SPX_API spx_status spx_result_report_json(const spx_result* r, char** out);
/* kind: 0 markdown table, 1 CSV table (experiments only). */
SPX_API spx_status spx_result_table(const spx_result* r, int kind, char** out);
SPX_API size_t spx_result_artifact_count(const spx_result* r);
SPX_API spx_status spx_result_artifact(const spx_result* r, size_t index, char** name, char** content);
SPX_API void spx_result_free(spx_result* r);

#ifdef __cplusplus
}
#endif

#endif

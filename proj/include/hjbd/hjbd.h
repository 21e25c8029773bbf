#ifndef HJBD_HJBD_H
#define HJBD_HJBD_H

#include <stddef.h>
#include <stdint.h>

#if defined(HJBD_BUILDING_LIBRARY)
#define HJBD_API __attribute__((visibility("default")))
#else
#define HJBD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hjbd_status {
  HJBD_OK = 0,
  HJBD_INVALID_ARGUMENT = 1,
  HJBD_IO_ERROR = 2,
  HJBD_PARSE_ERROR = 3,
  HJBD_INVALID_SPACE = 4,
  HJBD_NUMERICAL_ERROR = 5,
  HJBD_CONVERGENCE_ERROR = 6,
  HJBD_GRID_MISMATCH = 7,
  HJBD_CHECK_FAILED = 8,
  HJBD_INTERNAL_ERROR = 99
} hjbd_status;

typedef struct hjbd_space hjbd_space;
typedef struct hjbd_potential hjbd_potential;
typedef struct hjbd_timefield hjbd_timefield;

/* Message of the last failed call on this thread; never NULL. */
HJBD_API const char* hjbd_last_error(void);
HJBD_API const char* hjbd_version(void);

/* ---- spaces ---- */

/* kind: "cycle", "torus2d" or "gasket"; size is n or the gasket level. */
HJBD_API hjbd_status hjbd_space_build(const char* kind, int size, double scaling, hjbd_space** out);
/* Loads and validates a space document. */
HJBD_API hjbd_status hjbd_space_load(const char* path, hjbd_space** out);
HJBD_API hjbd_status hjbd_space_save(const hjbd_space* space, const char* path);
HJBD_API size_t hjbd_space_size(const hjbd_space* space);
HJBD_API void hjbd_space_free(hjbd_space* space);

/* Validates the document at path without building a space. *ok is 1 when no
 * violation was found; the violations, one per line, are copied into buf. */
HJBD_API hjbd_status hjbd_space_validate_file(const char* path, int* ok, char* buf, size_t buf_len);

/* Field arrays have hjbd_space_size entries. */
HJBD_API hjbd_status hjbd_generator_apply(const hjbd_space* space, const double* f, double* out);
HJBD_API hjbd_status hjbd_carre_du_champ(const hjbd_space* space, const double* f, const double* g, double* out);
HJBD_API hjbd_status hjbd_energy(const hjbd_space* space, const double* f, const double* g, double* out);

/* Row-major n*n heat kernel at time h; method "pade" or "spectral". */
HJBD_API hjbd_status hjbd_heat_kernel(const hjbd_space* space, double h, const char* method, double* out);
HJBD_API hjbd_status hjbd_heat_kernel_csv(const hjbd_space* space, double h, const char* method, const char* path);

/* ---- potentials and fields ---- */

HJBD_API hjbd_status hjbd_potential_constant(const hjbd_space* space, double value, hjbd_potential** out);
HJBD_API hjbd_status hjbd_potential_load(const hjbd_space* space, const char* path, hjbd_potential** out);
HJBD_API void hjbd_potential_free(hjbd_potential* potential);
HJBD_API hjbd_status hjbd_potential_sample(const hjbd_potential* potential, double t, double* out);

/* Reads a field description document into out (hjbd_space_size entries). */
HJBD_API hjbd_status hjbd_field_load(const hjbd_space* space, const char* path, double* out);

/* ---- Schroedinger solutions ---- */

/* Solves d/dtau w + 1/2 Delta w + F w = 0 backward from w(0) = w0 to time t < 0
 * on a grid of steps intervals. method: "ode" or "duhamel". */
HJBD_API hjbd_status hjbd_solve(const hjbd_space* space, const hjbd_potential* potential, const double* w0, double t,
                                size_t steps, const char* method, hjbd_timefield** out);
HJBD_API size_t hjbd_timefield_steps(const hjbd_timefield* field);
HJBD_API double hjbd_timefield_time(const hjbd_timefield* field, size_t index);
/* Copies frame index (hjbd_space_size entries). */
HJBD_API hjbd_status hjbd_timefield_frame(const hjbd_timefield* field, size_t index, double* out);
HJBD_API hjbd_status hjbd_timefield_write_csv(const hjbd_timefield* field, const hjbd_space* space, const char* path);
HJBD_API hjbd_status hjbd_timefield_read_csv(const hjbd_space* space, const char* path, hjbd_timefield** out);
HJBD_API void hjbd_timefield_free(hjbd_timefield* field);

/* ---- Monte Carlo ---- */

typedef struct hjbd_mc_estimate {
  double mean;
  double std_error;
  uint64_t n_samples;
  uint64_t seed;
} hjbd_mc_estimate;

/* Feynman-Kac estimate of w(t, x). When paths_csv is not NULL the sampled
 * paths are written there as path,time,point rows. */
HJBD_API hjbd_status hjbd_fk_estimate(const hjbd_space* space, const hjbd_potential* potential, const double* w0,
                                      double t, size_t x, size_t samples, uint64_t seed, const char* paths_csv,
                                      hjbd_mc_estimate* out);

/* ---- HJB and value ---- */

typedef struct hjbd_hjb_summary {
  double residual_sup;
  double exact_sup;
  double defect_sup;
} hjbd_hjb_summary;

/* Residuals of u = -log w; per-frame norms go to csv_path and, when svg_path
 * is not NULL, a plot to svg_path. */
HJBD_API hjbd_status hjbd_hjb_report(const hjbd_space* space, const hjbd_potential* potential,
                                     const hjbd_timefield* w, const char* csv_path, const char* svg_path,
                                     hjbd_hjb_summary* out);

typedef struct hjbd_value_summary {
  double baseline;
  double j_optimal;
  double eps_report;
  int ordering_ok;
} hjbd_value_summary;

/* Value inequality for u = -log w over the drift files (timefield CSVs on the
 * grid of w) plus the drift -u; rho0 is normalized to a probability density.
 * The per-drift table goes to csv_path. */
HJBD_API hjbd_status hjbd_value_report(const hjbd_space* space, const hjbd_potential* potential,
                                       const hjbd_timefield* w, const double* rho0, const char* const* drift_paths,
                                       size_t n_drifts, const char* csv_path, hjbd_value_summary* out);

/* ---- studies ---- */

/* Runs the study described by the config file. overrides may be NULL or a JSON
 * object merged over the config. *passed is 1 when every check passed. */
HJBD_API hjbd_status hjbd_study_run(const char* config_path, const char* overrides_json, int* passed,
                                    size_t* n_checks);

#ifdef __cplusplus
}
#endif

#endif

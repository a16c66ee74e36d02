/* dflab - numerical laboratory for singular scale functions, time-changed
 * Brownian motion, translation-invariant (Levy-type) quadratic forms and
 * finite-state Dirichlet-form algebra.
 *
 * C interface of the shared library: opaque handles, status codes, owned
 * strings released with dflab_string_free.  All functions are safe to call
 * from multiple threads on distinct handles; handles are immutable after
 * construction.
 */
#ifndef DFLAB_H
#define DFLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DFLAB_API __declspec(dllexport)
#else
#define DFLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dflab_status {
    DFLAB_OK = 0,
    DFLAB_ERR_INVALID_ARGUMENT = 1,
    DFLAB_ERR_DOMAIN = 2,
    DFLAB_ERR_PRECONDITION = 3,
    DFLAB_ERR_NUMERIC = 4,
    DFLAB_ERR_UNSUPPORTED = 5,
    DFLAB_ERR_PARSE = 6,
    DFLAB_ERR_CHECK_FAILED = 7,
    DFLAB_ERR_INTERNAL = 8
} dflab_status;

typedef struct dflab_scale dflab_scale;
typedef struct dflab_profile dflab_profile;
typedef struct dflab_form dflab_form;
typedef struct dflab_symbol dflab_symbol;
typedef struct dflab_grid dflab_grid;

/* Message of the most recent failure on the calling thread. */
DFLAB_API const char* dflab_last_error(void);
DFLAB_API void dflab_string_free(char* s);
DFLAB_API void dflab_buffer_free(double* buf);

/* ----------------------------------------------------------- scale ----- */

DFLAB_API dflab_status dflab_scale_identity(dflab_scale** out);
DFLAB_API dflab_status dflab_scale_affine(double c, dflab_scale** out);
DFLAB_API dflab_status dflab_scale_fat_cantor(double lambda, int depth, dflab_scale** out);
DFLAB_API dflab_status dflab_scale_inverse_cantor(int depth, dflab_scale** out);
DFLAB_API dflab_status dflab_scale_from_json(const char* json, dflab_scale** out);
DFLAB_API dflab_status dflab_scale_to_json(const dflab_scale* s, char** json_out);
DFLAB_API dflab_status dflab_scale_gaps_csv(const dflab_scale* s, char** csv_out);
DFLAB_API void dflab_scale_free(dflab_scale* s);

DFLAB_API dflab_status dflab_scale_eval(const dflab_scale* s, double x, double* out);
/* left endpoint of the preimage on flat levels */
DFLAB_API dflab_status dflab_scale_inverse_eval(const dflab_scale* s, double y, double* out);
DFLAB_API dflab_status dflab_scale_flat_mass(const dflab_scale* s, double a, double b,
                                             double* out);
DFLAB_API dflab_status dflab_scale_domain(const dflab_scale* s, double* lo, double* hi);

/* depth-truncated standard Cantor function; clamped outside [0,1] */
DFLAB_API dflab_status dflab_cantor_value(double x, int depth, double* out);

/* --------------------------------------------------- profiles, forms --- */

DFLAB_API dflab_status dflab_profile_bump(double center, double radius, double amplitude,
                                          dflab_profile** out);
DFLAB_API dflab_status dflab_profile_hat(double left, double right, double slope,
                                         dflab_profile** out);
DFLAB_API dflab_status dflab_profile_clamped(const dflab_profile* p, double lo, double hi,
                                             dflab_profile** out);
DFLAB_API void dflab_profile_free(dflab_profile* p);

DFLAB_API dflab_status dflab_energy_es(const dflab_scale* s, const dflab_profile* phi,
                                       int quad_n, double* out);
DFLAB_API dflab_status dflab_dirichlet_energy(const dflab_scale* s, const dflab_profile* phi,
                                              long grid_n, double* out);
DFLAB_API dflab_status dflab_subspace_identity(const dflab_scale* s, const dflab_profile* phi,
                                               double tol, double* residual_out,
                                               int* converged_out);
DFLAB_API dflab_status dflab_weak_generator_residual(const dflab_scale* s,
                                                     const dflab_profile* phi_u,
                                                     const dflab_profile* phi_v, double* out);

/* ---------------------------------------------------- finite forms ----- */

DFLAB_API dflab_status dflab_form_create(size_t n, const double* m, const double* J_rowmajor,
                                         const double* k, dflab_form** out);
DFLAB_API dflab_status dflab_form_from_json(const char* json, dflab_form** out);
DFLAB_API dflab_status dflab_form_to_json(const dflab_form* f, char** json_out);
DFLAB_API void dflab_form_free(dflab_form* f);

DFLAB_API dflab_status dflab_bd_decompose(size_t n, const double* Q_rowmajor, const double* m,
                                          dflab_form** out);
DFLAB_API dflab_status dflab_form_energy(const dflab_form* f, const double* u, const double* v,
                                         double* out);
DFLAB_API dflab_status dflab_form_kill(const dflab_form* f, const double* extra_k,
                                       dflab_form** out);
DFLAB_API dflab_status dflab_form_resurrect(const dflab_form* f, dflab_form** out);
DFLAB_API dflab_status dflab_form_homeomorph(const dflab_form* f, const size_t* sigma,
                                             dflab_form** out);
DFLAB_API dflab_status dflab_form_time_change(const dflab_form* f, const double* mu,
                                              dflab_form** out);
DFLAB_API dflab_status dflab_subspace_check(const dflab_form* candidate, const dflab_form* full,
                                            int* is_subspace, int* triples_match);

/* ------------------------------------------------------------ levy ----- */

/* atom_locs is n_atoms * dim doubles, row per atom */
DFLAB_API dflab_status dflab_symbol_create(int dim, const double* S_rowmajor, size_t n_atoms,
                                           const double* atom_locs, const double* atom_weights,
                                           dflab_symbol** out);
DFLAB_API dflab_status dflab_symbol_from_json(const char* json, dflab_symbol** out);
DFLAB_API dflab_status dflab_symbol_to_json(const dflab_symbol* s, char** json_out);
DFLAB_API void dflab_symbol_free(dflab_symbol* s);
DFLAB_API dflab_status dflab_symbol_eval(const dflab_symbol* s, const double* x, double* out);
/* P is dim*dim row-major with eigenvector columns; eigenvalues descending */
DFLAB_API dflab_status dflab_symbol_diagonalize(const dflab_symbol* s, double* P_rowmajor,
                                                double* eigenvalues, int* rank);

DFLAB_API dflab_status dflab_grid_gaussian(int dim, const double* lo, double h, const int* n,
                                           const double* center, double sigma,
                                           dflab_grid** out);
DFLAB_API dflab_status dflab_grid_sample(int dim, const double* lo, double h, const int* n,
                                         double (*f)(const double* x, void* ctx), void* ctx,
                                         dflab_grid** out);
DFLAB_API void dflab_grid_free(dflab_grid* g);

DFLAB_API dflab_status dflab_energy_fourier(const dflab_symbol* s, const dflab_grid* u,
                                            double* out);
DFLAB_API dflab_status dflab_energy_direct(const dflab_symbol* s, const dflab_grid* u,
                                           double* local_out, double* jump_out,
                                           int* interpolated_out);
DFLAB_API dflab_status dflab_pairing_residual(const dflab_symbol* s, const dflab_grid* u,
                                              const dflab_grid* v, double* out);

/* -------------------------------------------------------- simulate ----- */

/* times/positions are malloc'ed arrays of length *len_out */
DFLAB_API dflab_status dflab_brownian_path(double x0, double horizon, double dt, uint64_t seed,
                                           double** times_out, double** positions_out,
                                           size_t* len_out);
DFLAB_API dflab_status dflab_exit_statistics(const dflab_scale* s, double a, double b, double x0,
                                             double dt, double epsilon, long n_paths,
                                             uint64_t seed, int threads, double* p_out,
                                             double* p_se_out, double* p_exact_out,
                                             double* time_out, double* time_se_out);
/* problem: 0 = hit probability of b, 1 = expected exit time */
DFLAB_API dflab_status dflab_chain_solve(const dflab_scale* s, double a, double b, double x0,
                                         long n, int problem, double* out);

/* -------------------------------------------------------- coupling ----- */

DFLAB_API dflab_status dflab_product_energy_json(const char* product_json,
                                                 const char* profiles_json, double* out);
/* masses_out must hold one double per component */
DFLAB_API dflab_status dflab_properness_json(const char* product_json, double* masses_out,
                                             int* proper_out);

/* ------------------------------------------------ experiment runner ---- */

/* Batch runner behind the CLI.  command: verify-energy | exit-stats | levy |
 * discrete | coupling | selftest.  seed_override < 0 keeps the config seed.
 * csv_out/report_out receive owned strings.  run_status_out: 0 ok, 1 a
 * configured tolerance failed, 2 usage/schema error, 3 internal error. */
DFLAB_API dflab_status dflab_run_command(const char* command, const char* config_json,
                                         long long seed_override, int sweep, char** csv_out,
                                         char** report_out, int* run_status_out);

#ifdef __cplusplus
}
#endif

#endif /* DFLAB_H */

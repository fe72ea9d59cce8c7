/* C interface to the droplet metastability laboratory.
 *
 * All functions return dl_status; out-parameters are written only on DL_OK.
 * dl_last_error() returns a thread-local message for the last failure. */
#ifndef DROPLET_H
#define DROPLET_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dl_status {
  DL_OK = 0,
  DL_EINVAL = 1,   /* invalid argument */
  DL_ECONFIG = 2,  /* configuration rejected */
  DL_ENUMERIC = 3, /* numerical failure */
  DL_EIO = 4,      /* file I/O failure */
  DL_EDATA = 5,    /* not enough data for the requested estimate */
  DL_EUNKNOWN = 6
} dl_status;

const char* dl_version(void);
const char* dl_last_error(void);

/* ---- pair potential ---- */
typedef struct dl_potential dl_potential;

dl_status dl_potential_create_gaussian(double a, double s, dl_potential** out);
dl_status dl_potential_eval(const dl_potential* p, double r, double* w, double* wp,
                            double* wpp);
/* derived constants: convexity lambda, admissibility threshold delta', c_w */
dl_status dl_potential_constants(const dl_potential* p, double* lambda,
                                 double* delta_prime, double* c_w);
void dl_potential_free(dl_potential* p);

/* ---- interacting system (N particles in dimension d, ball radius sqrt(N) delta) ---- */
typedef struct dl_system dl_system;

dl_status dl_system_create(const dl_potential* p, int n_particles, int dim, double delta,
                           dl_system** out);
/* x has length n_particles*dim, packed particle-major */
dl_status dl_system_energy(const dl_system* s, const double* x, int len, double* out);
dl_status dl_system_grad(const dl_system* s, const double* x, int len, double* grad_out);
/* minimum of the reduced energy over the boundary sphere */
dl_status dl_system_valley_depth(const dl_system* s, double* out);
void dl_system_free(dl_system* s);

/* ---- spectral solve of the killed generator ---- */
typedef struct dl_spectrum dl_spectrum;

/* form: 0 = weighted divergence, 1 = Witten flat, 2 = penalized */
dl_status dl_spectrum_solve(const dl_system* s, double beta, int grid, int m, int form,
                            dl_spectrum** out);
dl_status dl_spectrum_count(const dl_spectrum* sp, int* m_out, int* n_nodes_out);
dl_status dl_spectrum_eigenvalue(const dl_spectrum* sp, int k, double* out);
/* node i of the 1D grid: position, QSD density, stationary density */
dl_status dl_spectrum_node(const dl_spectrum* sp, int i, double* z, double* q, double* u);
/* (1/N) integral of |z|^2 against the QSD */
dl_status dl_spectrum_droplet_moment(const dl_spectrum* sp, double* out);
void dl_spectrum_free(dl_spectrum* sp);

/* ---- killed-ensemble simulation with survival fit ---- */
/* dt <= 0 selects the stability default min(1e-2, 0.1/beta). Starts are
 * uniform on the sub-ball of radius r0 (r0 <= 0 selects half the ball). */
dl_status dl_survival_rate(const dl_system* s, double beta, double dt, double t_max,
                           int n_paths, uint64_t seed, int jobs, double r0,
                           double* lambda1_out, int* n_exits_out);

/* ---- full experiment runner: JSON config in, JSON report out ---- */
dl_status dl_run_command_json(const char* config_json, char** report_json_out);
void dl_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* DROPLET_H */

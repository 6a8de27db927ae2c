/* C interface to the inexact-Krylov deblurring library.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return IKR_OK (0) on success or a nonzero error code;
 * ikr_last_error() describes the most recent failure on the calling
 * thread's last call.
 */
#ifndef IKR_IKRYLOV_H
#define IKR_IKRYLOV_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

enum ikr_status {
  IKR_OK = 0,
  IKR_ERR_INVALID = 1,
  IKR_ERR_RUNTIME = 2,
  IKR_ERR_BOUNDS = 3
};

const char* ikr_last_error(void);

enum ikr_image_source {
  IKR_IMG_STARFIELD = 0,
  IKR_IMG_PHANTOM = 1,
  IKR_IMG_FILE = 2
};

typedef struct ikr_problem ikr_problem;
typedef struct ikr_run ikr_run;

typedef struct ikr_problem_spec {
  int source;        /* ikr_image_source */
  const char* path;  /* PGM file when source == IKR_IMG_FILE, else NULL */
  int n;             /* image side length */
  double sigma1, sigma2, rho;
  double noise_level; /* ||e|| / ||b_true|| */
  unsigned seed;
} ikr_problem_spec;

int ikr_problem_create(const ikr_problem_spec* spec, ikr_problem** out);
void ikr_problem_destroy(ikr_problem* p);

enum ikr_image_kind {
  IKR_DATA_B = 0,
  IKR_DATA_B_TRUE = 1,
  IKR_DATA_X_TRUE = 2,
  IKR_DATA_NOISE = 3,
  IKR_DATA_PSF_TRUE = 4
};

/* n_pixels = n * n; buffers are column-major n x n images. */
int ikr_problem_size(const ikr_problem* p, int* n_side);
int ikr_problem_image(const ikr_problem* p, int kind, double* buf, size_t len);

enum ikr_method {
  IKR_METHOD_LSQR = 0,
  IKR_METHOD_CGLS = 1,
  IKR_METHOD_HYBRID = 2,
  IKR_METHOD_ILSQR = 3,
  IKR_METHOD_ICGLS = 4,
  IKR_METHOD_HYBRID_ILSQR = 5,
  IKR_METHOD_HYBRID_ICGLS = 6
};

enum ikr_lambda_policy {
  IKR_LAMBDA_FIXED = 0,
  IKR_LAMBDA_DISCREPANCY = 1,
  IKR_LAMBDA_WGCV = 2
};

typedef struct ikr_solve_opts {
  int method;        /* ikr_method */
  int iterations;    /* subspace dimension to build */
  double lambda;     /* fixed value for the hybrid methods */
  int lambda_policy; /* ikr_lambda_policy, hybrid methods only */
  double tau;        /* discrepancy safety threshold */
  double omega;      /* wGCV weight */
} ikr_solve_opts;

typedef struct ikr_deblur_opts {
  double sigma1_0, sigma2_0, rho_0;
  int isotropic;
  double lambda;
  int lambda_policy;
  double tau, omega;
  double epsilon; /* inexactness budget; <= 0 means unbounded */
  int bound;      /* 0: accumulated-gap bound, 1: per-iteration caps */
  int max_inner, max_outer;
  double theta1, theta2, theta3, grad_tol;
} ikr_deblur_opts;

void ikr_solve_opts_defaults(ikr_solve_opts* o);
void ikr_deblur_opts_defaults(ikr_deblur_opts* o);

/* Linear solves at the true blur parameters (the inexact variants run the
 * inexact machinery with a zero error sequence). */
int ikr_solve_linear(const ikr_problem* p, const ikr_solve_opts* o,
                     ikr_run** out);

/* Blind deblurring: inexact = 0 runs the inner-outer scheme with cold
 * restarts, inexact = 1 the interleaved scheme with warm restarts and
 * inexactness control. */
int ikr_deblur(const ikr_problem* p, const ikr_deblur_opts* o, int inexact,
               ikr_run** out);

void ikr_run_destroy(ikr_run* r);

typedef struct ikr_record {
  int total_iter, outer_iter, inner_iter;
  double lambda;
  double inexact_residual_norm, gap_bound, accumulated_budget;
  double rre_x, rre_y;
  double sigma1, sigma2, rho, gamma;
  int restarted;
  double objective_exact, objective_inexact, x_rel_change;
} ikr_record;

size_t ikr_run_length(const ikr_run* r);
int ikr_run_record(const ikr_run* r, size_t index, ikr_record* out);
int ikr_run_solution(const ikr_run* r, double* buf, size_t len);
int ikr_run_params(const ikr_run* r, double* sigma1, double* sigma2,
                   double* rho);
int ikr_run_restarts(const ikr_run* r, int* restarts);
int ikr_run_stop_reason(const ikr_run* r, char* buf, size_t len);
int ikr_run_write_csv(const ikr_run* r, const char* path);

/* Image file helpers (column-major n x n buffer, values in [0,1]). */
int ikr_write_image_pgm(const char* path, const double* buf, int n);
int ikr_write_image_png(const char* path, const double* buf, int n);

/* Rasterized unit-sum Gaussian PSF for inspection/output. */
int ikr_psf_image(double sigma1, double sigma2, double rho, int n, double* buf,
                  size_t len);

#ifdef __cplusplus
}
#endif

#endif /* IKR_IKRYLOV_H */

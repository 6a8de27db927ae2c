#pragma once

#include "ikr/blur.hpp"
#include "ikr/bounds.hpp"
#include "ikr/history.hpp"
#include "ikr/regparam.hpp"

namespace ikr {

struct DeblurProblem {
  int N = 0;
  Vector b;        // blurred, noisy data, length N^2
  Vector x_true;   // optional ground truth for RRE instrumentation
  PsfParams y_true;
  bool have_truth = false;
};

struct DeblurOptions {
  PsfParams y0{7.0, 7.0, 0.0};
  Vector x0;  // empty means zero
  /// Single-parameter mode: y = sigma1 = sigma2, rho = 0.
  bool isotropic = true;
  LambdaPolicy lambda_policy{LambdaKind::fixed, 0.5};
  StoppingConfig stopping;
  /// Algorithm 2 inexactness tolerance; +inf disables error control.
  double epsilon = 1.0;
  ControlBound active_bound = ControlBound::accumulated_gap;
  /// Spectra for error-norm estimates: symmetrized unless the parameters
  /// stay doubly symmetric (isotropic mode), where the exact spectrum is
  /// used.
  bool symmetric_approx_spectra = false;
  /// Trust cap on the relative parameter move of one Gauss-Newton step.
  double step_relcap = 0.09;
  /// Reorthogonalization of the exact inner GK loop (Algorithm 1).
  bool inner_reorth = false;
  /// Relative x-change threshold that ends an Algorithm 1 inner cycle.
  double inner_tol = 1e-4;
  /// When false the blur parameters stay frozen at y0 (plain hybrid
  /// solves; used for fixed-y comparison runs).
  bool gauss_newton = true;
};

struct DeblurResult {
  SolveHistory history;
  Vector x;
  PsfParams y{};
  int total_iterations = 0;
};

/// g(z, y) = ||A(y) z - r0||^2 + lambda^2 ||z||^2.
double evaluate_objective(const Vector& z, const PsfParams& y, double lambda,
                          const Vector& r0, int N);

struct GnDirection {
  Vector d;  // length p (1 or 3)
  bool rank_deficient = false;
};

/// Least-squares solution of min_d ||jac d - residual|| by dense QR;
/// returns the zero direction flagged when the Jacobian is rank deficient.
GnDirection gauss_newton_direction(const Vector& residual, const Matrix& jac);

/// Parameter update y + gamma * d for p = 1 (isotropic) or p = 3.
PsfParams apply_step(const PsfParams& y, const Vector& d, double gamma,
                     bool isotropic);

/// Golden-section on gamma in [0, ub], ub = min(2, relcap ||y|| / ||d||,
/// feasible limit), minimizing g(z_fixed, y + gamma d); 24 objective
/// evaluations; returns 0 when no feasible improving step exists.
double line_search_gamma(const PsfParams& y, const Vector& d,
                         const Vector& z_fixed, double lambda,
                         const Vector& r0, int N, bool isotropic,
                         double relcap);

/// Inner-outer scheme: full hybrid-LSQR cycles at fixed parameters, one
/// Gauss-Newton update per cycle, cold restarts (x0 = 0).
DeblurResult run_algorithm1(const DeblurProblem& problem,
                            const DeblurOptions& opts);

/// Interleaved scheme: one Gauss-Newton update per iGK iteration,
/// inexactness budget checked before every expansion, warm restarts.
DeblurResult run_algorithm2(const DeblurProblem& problem,
                            const DeblurOptions& opts);

}  // namespace ikr

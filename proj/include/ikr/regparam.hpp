#pragma once

#include "ikr/history.hpp"
#include "ikr/linear_operator.hpp"

namespace ikr {

enum class LambdaKind { fixed, discrepancy, wgcv };

struct LambdaPolicy {
  LambdaKind kind = LambdaKind::fixed;
  double fixed_value = 0.0;
  double tau = 1.01;       // discrepancy safety threshold, > 1
  double omega = 1.0;      // wGCV weight in (0, 1]
  double noise_norm = 0.0; // ||e|| estimate for the discrepancy principle
};

struct StoppingConfig {
  double theta1 = 1e-3;
  double theta2 = 1e-3;
  double theta3 = 1e-3;
  double grad_tol = 1e-8;
  int max_inner = 50;
  int max_outer = 500;
};

enum class LambdaStatus { converged, below_noise, unbracketable, flat };

struct LambdaResult {
  double lambda = 0.0;
  LambdaStatus status = LambdaStatus::converged;
};

/// Discrepancy principle on the projected problem: lambda with
/// ||M s_lambda - beta e1||^2 = tau ||e||^2, by safeguarded bisection on
/// log lambda via the SVD filter formula. Returns lambda = 0 flagged
/// below_noise when even the unregularized residual exceeds the target.
LambdaResult discrepancy_lambda(const Matrix& M, double beta,
                                const LambdaPolicy& policy);

/// wGCV minimizer over a 61-point log grid in [1e-8, 1e2] * beta, refined
/// by golden section. Flags a flat objective (all singular values equal).
LambdaResult wgcv_lambda(const Matrix& M, double beta,
                         const LambdaPolicy& policy);

/// The wGCV objective G(lambda), evaluated through the SVD of M.
double wgcv_objective(const Matrix& M, double beta, double lambda,
                      double omega);

enum class StopReason { none, stationary, stabilized, budget };

struct StopDecision {
  bool stop = false;
  StopReason reason = StopReason::none;
};

/// Stop when grad_norm/grad0_norm <= grad_tol, when the lambda/x/y
/// relative-change triple all fall below theta1..theta3 (from the last two
/// records), or when iteration caps are hit.
StopDecision stopping_check(const SolveHistory& history,
                            const StoppingConfig& cfg, double grad_norm,
                            double grad0_norm);

}  // namespace ikr

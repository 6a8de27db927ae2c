#pragma once

#include "ikr/linear_operator.hpp"

namespace ikr {

struct GkOptions {
  /// Full two-pass reorthogonalization of new basis vectors.
  bool reorthogonalize = true;
  /// A normalization coefficient below breakdown_factor * ||A|| is treated
  /// as zero. When op_norm <= 0 the estimate is computed from the operator.
  double breakdown_factor = 1e-14;
  double op_norm = 0.0;
};

/// Partial Golub-Kahan bidiagonalization A V_k = U_{k+1} Bbar_k.
///
/// After k steps U has k+1 columns, V has k+1 columns (v_{k+1} is kept for
/// the Lanczos view), alpha holds alpha_1..alpha_{k+1} and beta holds
/// beta_2..beta_{k+1}.
class GkFactorization {
public:
  int k = 0;
  bool breakdown = false;
  double beta0 = 0.0;  // ||r_0||

  Matrix U;      // m x (k+1)
  Matrix V;      // n x (k+1)
  Vector alpha;  // k+1 entries
  Vector beta;   // k entries (beta_{i+1})

  GkOptions opts;

  /// Lower bidiagonal (k+1) x k factor.
  Matrix bbar() const;
  /// Leading k columns of V (the solution subspace basis).
  Matrix basis() const { return V.leftCols(k); }
};

struct TridiagView {
  Matrix T;     // k x k symmetric tridiagonal Bbar^T Bbar
  Matrix Tbar;  // (k+1) x k
};

GkFactorization gk_init(const LinearOperator& op, const Vector& r0,
                        GkOptions opts = {});

/// Appends u_{k+1}, v_{k+1}; flags breakdown when a normalization
/// coefficient vanishes (the state stays valid, no further steps allowed).
void gk_step(GkFactorization& f, const LinearOperator& op);

TridiagView tridiag_view(const GkFactorization& f);

struct ProjectedSolution {
  Vector s;
  double residual_norm = 0.0;  // ||Bbar s - beta e1||
  bool rank_deficient = false;
};

/// min ||Bbar_k s - beta e1|| by Givens QR of the bidiagonal factor.
/// Falls back to an SVD minimum-norm solution when rank deficient.
ProjectedSolution lsqr_solve(const GkFactorization& f);

/// Solves T_k s = Bbar_k^T (beta e1). Throws std::runtime_error when T_k is
/// numerically singular.
Vector cgls_solve(const GkFactorization& f);

/// Tikhonov-regularized projected solution via QR of the augmented
/// [Bbar; lambda I] system. lambda = 0 falls back to lsqr_solve.
Vector hybrid_solve(const GkFactorization& f, double lambda);

/// Same solution through the penalized normal equations
/// (Bbar^T Bbar + lambda^2 I) s = Bbar^T beta e1; kept as the second
/// algebraic route for cross-checking.
Vector hybrid_solve_penalized(const GkFactorization& f, double lambda);

/// x = x0 + V_k s.
Vector assemble_solution(const GkFactorization& f, const Vector& x0,
                         const Vector& s);

}  // namespace ikr

#pragma once

#include "ikr/linear_operator.hpp"

#include <functional>
#include <vector>

namespace ikr {

/// One perturbation term: forward action x -> E x, adjoint action
/// u -> F^T u, plus a 2-norm estimate for the bound bookkeeping.
/// Empty std::function means the zero operator.
struct ErrorOp {
  std::function<Vector(const Vector&)> forward;
  std::function<Vector(const Vector&)> adjoint;
  double norm = 0.0;

  bool is_zero() const { return !forward && !adjoint; }
};

/// Per-iteration error operators: E_0 (initial residual), E_1..E_k applied
/// with the forward products, F_1..F_{k+1} applied with the adjoint
/// products. Entries beyond what was supplied read as zero operators.
class ErrorSequence {
public:
  static ErrorOp dense(const Matrix& e);

  void set_E(int i, ErrorOp op);  // i >= 0
  void set_F(int i, ErrorOp op);  // i >= 1
  const ErrorOp& E(int i) const;
  const ErrorOp& F(int i) const;

  int max_E_index() const { return static_cast<int>(e_.size()) - 1; }

private:
  std::vector<ErrorOp> e_;  // e_[i] = E_i
  std::vector<ErrorOp> f_;  // f_[i-1] = F_i
  static const ErrorOp zero_;
};

struct IgkOptions {
  double breakdown_factor = 1e-14;
  double op_norm = 0.0;
};

/// Inexact Golub-Kahan decomposition (A + E_i) v_i = U_{i+1} M(:,i),
/// (A + F_i)^T u_i = V_i (L^T)(:,i). Orthogonalization is explicit
/// (two-pass classical Gram-Schmidt), M is upper Hessenberg, L lower
/// triangular.
class IgkFactorization {
public:
  int k = 0;
  bool breakdown = false;
  double beta0 = 0.0;

  Matrix U;  // m x (k+1)
  Matrix V;  // n x (k+1)
  Matrix M;  // (k+1) x k
  Matrix L;  // (k+1) x (k+1)

  IgkOptions opts;

  Matrix basis() const { return V.leftCols(k); }
  /// Lbar = L without its last column, (k+1) x k.
  Matrix lbar() const { return L.topLeftCorner(k + 1, k); }
  /// Hhat = L_{k+1}^T M_k, the inexact-Lanczos upper Hessenberg factor.
  Matrix hhat() const { return L.topLeftCorner(k + 1, k + 1).transpose() * M.topLeftCorner(k + 1, k); }
};

IgkFactorization igk_init(const LinearOperator& op, const ErrorSequence& errs,
                          const Vector& r0, IgkOptions opts = {});

/// One iGK step using the stored error sequence: forward product with
/// (A + E_{k+1}), adjoint product with (A + F_{k+2}).
void igk_step(IgkFactorization& f, const LinearOperator& op,
              const ErrorSequence& errs);

/// Variant with the per-iteration products supplied directly (the blind
/// deblurring driver applies A(y_{i-1}) for both; errors stay implicit).
void igk_step_with(IgkFactorization& f,
                   const std::function<Vector(const Vector&)>& forward_product,
                   const std::function<Vector(const Vector&)>& adjoint_product);

IgkFactorization igk_init_with(
    const std::function<Vector(const Vector&)>& adjoint_product,
    Eigen::Index nrows, Eigen::Index ncols, const Vector& r0,
    IgkOptions opts = {});

struct IarnoldiFactorization {
  int k = 0;
  bool breakdown = false;
  Matrix V;  // n x (k+1)
  Matrix H;  // (k+1) x k
};

/// Inexact Arnoldi on A^T A: step i applies (A + F_{i+1})^T (A + E_i).
IarnoldiFactorization iarnoldi_run(const LinearOperator& op,
                                   const ErrorSequence& errs, const Vector& v1,
                                   int k);

struct InexactProjectedSolution {
  Vector s;
  double residual_norm = 0.0;  // ||M s - beta e1||
  bool rank_deficient = false;
};

/// iLSQR: min ||M_k s - beta e1||.
InexactProjectedSolution ilsqr_solve(const IgkFactorization& f);

/// iCGLS: (Lbar^T M) s = [L]_{1,1} beta e1. Throws on singular systems.
Vector icgls_solve(const IgkFactorization& f);

/// hybrid-iLSQR via QR of [M; lambda I]; lambda = 0 equals ilsqr_solve.
Vector hybrid_ilsqr_solve(const IgkFactorization& f, double lambda);
/// Same through (M^T M + lambda^2 I)^{-1} M^T beta e1 (cross-check route).
Vector hybrid_ilsqr_solve_penalized(const IgkFactorization& f, double lambda);

/// hybrid-iCGLS: (Lbar^T M + lambda^2 I) s = [L]_{1,1} beta e1.
Vector hybrid_icgls_solve(const IgkFactorization& f, double lambda);

Vector assemble_solution(const IgkFactorization& f, const Vector& x0,
                         const Vector& s);

struct ShiftInvarianceReport {
  double max_projector_distance = 0.0;
};

/// Builds V_k once per lambda (the build never reads lambda) and reports
/// the largest pairwise projector distance ||P_i - P_j||_F.
ShiftInvarianceReport shift_invariance_probe(const LinearOperator& op,
                                             const ErrorSequence& errs,
                                             const Vector& r0,
                                             const std::vector<double>& lambdas,
                                             int k);

}  // namespace ikr

#include "ikr/gk.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace ikr {

namespace {

void grow_cols(Matrix& m, Eigen::Index nrows, int needed) {
  if (m.cols() < needed) {
    Matrix bigger(nrows, needed);
    bigger.leftCols(m.cols()) = m;
    m.swap(bigger);
  }
}

void grow(Vector& v, int needed) {
  if (v.size() < needed) {
    Vector bigger(needed);
    bigger.head(v.size()) = v;
    v.swap(bigger);
  }
}

// Two-pass classical Gram-Schmidt of w against the first ncols columns of Q.
void reorthogonalize(const Matrix& Q, int ncols, Vector& w) {
  for (int pass = 0; pass < 2; ++pass) {
    Vector c = Q.leftCols(ncols).transpose() * w;
    w -= Q.leftCols(ncols) * c;
  }
}

}  // namespace

Matrix GkFactorization::bbar() const {
  Matrix b = Matrix::Zero(k + 1, k);
  for (int i = 0; i < k; ++i) {
    b(i, i) = alpha[i];
    b(i + 1, i) = beta[i];
  }
  return b;
}

GkFactorization gk_init(const LinearOperator& op, const Vector& r0,
                        GkOptions opts) {
  GkFactorization f;
  f.opts = opts;
  if (f.opts.op_norm <= 0.0) f.opts.op_norm = opnorm_estimate(op);
  const double tol = f.opts.breakdown_factor * std::max(f.opts.op_norm, 1.0);

  f.beta0 = r0.norm();
  if (f.beta0 == 0.0)
    throw std::invalid_argument("gk_init: zero initial residual");

  f.U = r0 / f.beta0;
  Vector v = op.apply_adjoint(f.U.col(0));
  double a1 = v.norm();
  f.alpha = Vector::Constant(1, a1);
  f.beta = Vector(0);
  if (a1 <= tol) {
    f.breakdown = true;
    f.V = Matrix::Zero(op.cols(), 1);
  } else {
    f.V = v / a1;
  }
  return f;
}

void gk_step(GkFactorization& f, const LinearOperator& op) {
  if (f.breakdown) throw std::runtime_error("gk_step: factorization broke down");
  const int i = f.k;  // current index, 0-based: computing u_{i+2}, v_{i+2}
  const double tol = f.opts.breakdown_factor * std::max(f.opts.op_norm, 1.0);

  Vector u = op.apply(f.V.col(i)) - f.alpha[i] * f.U.col(i);
  if (f.opts.reorthogonalize) reorthogonalize(f.U, i + 1, u);
  double b = u.norm();
  if (b <= tol) {
    // The current column is exact (beta_{k+1} = 0): the factorization is
    // complete and solvable at k+1, no further steps are possible.
    grow_cols(f.U, f.U.rows(), i + 2);
    f.U.col(i + 1).setZero();
    grow_cols(f.V, f.V.rows(), i + 2);
    f.V.col(i + 1).setZero();
    grow(f.beta, i + 1);
    f.beta[i] = 0.0;
    grow(f.alpha, i + 2);
    f.alpha[i + 1] = 0.0;
    f.k = i + 1;
    f.breakdown = true;
    return;
  }
  u /= b;

  Vector v = op.apply_adjoint(u) - b * f.V.col(i);
  if (f.opts.reorthogonalize) reorthogonalize(f.V, i + 1, v);
  double a = v.norm();

  grow_cols(f.U, f.U.rows(), i + 2);
  f.U.col(i + 1) = u;
  grow(f.beta, i + 1);
  f.beta[i] = b;
  grow(f.alpha, i + 2);
  f.alpha[i + 1] = a;
  f.k = i + 1;

  if (a <= tol) {
    f.breakdown = true;
    grow_cols(f.V, f.V.rows(), i + 2);
    f.V.col(i + 1).setZero();
    return;
  }
  grow_cols(f.V, f.V.rows(), i + 2);
  f.V.col(i + 1) = v / a;
}

TridiagView tridiag_view(const GkFactorization& f) {
  const int k = f.k;
  TridiagView t;
  t.T = Matrix::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    t.T(i, i) = f.alpha[i] * f.alpha[i] + f.beta[i] * f.beta[i];
    if (i + 1 < k) {
      double off = f.alpha[i + 1] * f.beta[i];
      t.T(i, i + 1) = off;
      t.T(i + 1, i) = off;
    }
  }
  t.Tbar = Matrix::Zero(k + 1, k);
  t.Tbar.topRows(k) = t.T;
  if (k >= 1) t.Tbar(k, k - 1) = f.alpha[k] * f.beta[k - 1];
  return t;
}

ProjectedSolution lsqr_solve(const GkFactorization& f) {
  const int k = f.k;
  if (k < 1) throw std::invalid_argument("lsqr_solve: needs k >= 1");

  // Givens QR of the lower bidiagonal factor: rotate each subdiagonal
  // beta_{i+1} into the diagonal, carrying the rhs along (the classic
  // rho/phi recurrence).
  Vector diag(k), super(std::max(k - 1, 0)), phi(k);
  double rhobar = f.alpha[0];
  double phibar = f.beta0;
  for (int i = 0; i < k; ++i) {
    double b = f.beta[i];
    double rho = std::hypot(rhobar, b);
    double c = rhobar / rho;
    double s = b / rho;
    diag[i] = rho;
    phi[i] = c * phibar;
    phibar = s * phibar;
    if (i + 1 < k) {
      double a_next = f.alpha[i + 1];
      super[i] = s * a_next;
      rhobar = -c * a_next;
    }
  }

  const double scale = diag.cwiseAbs().maxCoeff();
  bool deficient = false;
  for (int i = 0; i < k; ++i)
    if (std::abs(diag[i]) <= 1e-13 * scale) deficient = true;

  ProjectedSolution out;
  if (!deficient) {
    Vector s = Vector::Zero(k);
    for (int i = k - 1; i >= 0; --i) {
      double rhs = phi[i];
      if (i + 1 < k) rhs -= super[i] * s[i + 1];
      s[i] = rhs / diag[i];
    }
    out.s = s;
    out.residual_norm = std::abs(phibar);
  } else {
    Matrix bb = f.bbar();
    Vector rhs = Vector::Zero(k + 1);
    rhs[0] = f.beta0;
    Eigen::JacobiSVD<Matrix> svd(bb, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    out.s = svd.solve(rhs);
    out.residual_norm = (bb * out.s - rhs).norm();
    out.rank_deficient = true;
  }
  return out;
}

Vector cgls_solve(const GkFactorization& f) {
  const int k = f.k;
  if (k < 1) throw std::invalid_argument("cgls_solve: needs k >= 1");
  TridiagView tv = tridiag_view(f);
  Vector rhs = Vector::Zero(k);
  rhs[0] = f.alpha[0] * f.beta0;  // Bbar^T (beta e1)
  Eigen::FullPivLU<Matrix> lu(tv.T);
  if (!lu.isInvertible())
    throw std::runtime_error("cgls_solve: singular projected matrix");
  return lu.solve(rhs);
}

Vector hybrid_solve(const GkFactorization& f, double lambda) {
  const int k = f.k;
  if (k < 1) throw std::invalid_argument("hybrid_solve: needs k >= 1");
  if (lambda == 0.0) return lsqr_solve(f).s;
  Matrix aug = Matrix::Zero(2 * k + 1, k);
  aug.topRows(k + 1) = f.bbar();
  aug.bottomRows(k).diagonal().setConstant(lambda);
  Vector rhs = Vector::Zero(2 * k + 1);
  rhs[0] = f.beta0;
  return aug.colPivHouseholderQr().solve(rhs);
}

Vector hybrid_solve_penalized(const GkFactorization& f, double lambda) {
  const int k = f.k;
  if (k < 1) throw std::invalid_argument("hybrid_solve_penalized: needs k >= 1");
  TridiagView tv = tridiag_view(f);
  Matrix lhs = tv.T + lambda * lambda * Matrix::Identity(k, k);
  Vector rhs = Vector::Zero(k);
  rhs[0] = f.alpha[0] * f.beta0;
  return lhs.ldlt().solve(rhs);
}

Vector assemble_solution(const GkFactorization& f, const Vector& x0,
                         const Vector& s) {
  return x0 + f.V.leftCols(s.size()) * s;
}

}  // namespace ikr

#include "ikr/igk.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace ikr {

const ErrorOp ErrorSequence::zero_{};

ErrorOp ErrorSequence::dense(const Matrix& e) {
  ErrorOp op;
  op.forward = [e](const Vector& x) { return Vector(e * x); };
  op.adjoint = [e](const Vector& u) { return Vector(e.transpose() * u); };
  Eigen::JacobiSVD<Matrix> svd(e);
  op.norm = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  return op;
}

void ErrorSequence::set_E(int i, ErrorOp op) {
  if (i < 0) throw std::invalid_argument("ErrorSequence::set_E: i >= 0");
  if (static_cast<int>(e_.size()) <= i) e_.resize(i + 1);
  e_[i] = std::move(op);
}

void ErrorSequence::set_F(int i, ErrorOp op) {
  if (i < 1) throw std::invalid_argument("ErrorSequence::set_F: i >= 1");
  if (static_cast<int>(f_.size()) < i) f_.resize(i);
  f_[i - 1] = std::move(op);
}

const ErrorOp& ErrorSequence::E(int i) const {
  if (i < 0 || i >= static_cast<int>(e_.size())) return zero_;
  return e_[i];
}

const ErrorOp& ErrorSequence::F(int i) const {
  if (i < 1 || i > static_cast<int>(f_.size())) return zero_;
  return f_[i - 1];
}

namespace {

// Two-pass CGS; returns the accumulated coefficients against the first
// ncols columns of Q.
Vector orthogonalize(const Matrix& Q, int ncols, Vector& w) {
  Vector coeffs = Vector::Zero(ncols);
  for (int pass = 0; pass < 2; ++pass) {
    Vector c = Q.leftCols(ncols).transpose() * w;
    w -= Q.leftCols(ncols) * c;
    coeffs += c;
  }
  return coeffs;
}

void grow_cols(Matrix& m, int needed) {
  if (m.cols() < needed) {
    Matrix bigger = Matrix::Zero(m.rows(), needed);
    bigger.leftCols(m.cols()) = m;
    m.swap(bigger);
  }
}

void grow_square(Matrix& m, int needed) {
  if (m.rows() < needed) {
    Matrix bigger = Matrix::Zero(needed, needed);
    bigger.topLeftCorner(m.rows(), m.cols()) = m;
    m.swap(bigger);
  }
}

void grow_rect(Matrix& m, int nrows, int ncols) {
  if (m.rows() < nrows || m.cols() < ncols) {
    Matrix bigger = Matrix::Zero(nrows, ncols);
    if (m.size() > 0) bigger.topLeftCorner(m.rows(), m.cols()) = m;
    m.swap(bigger);
  }
}

}  // namespace

IgkFactorization igk_init_with(
    const std::function<Vector(const Vector&)>& adjoint_product,
    Eigen::Index nrows, Eigen::Index ncols, const Vector& r0, IgkOptions opts) {
  IgkFactorization f;
  f.opts = opts;
  if (f.opts.op_norm <= 0.0) f.opts.op_norm = 1.0;
  const double tol = f.opts.breakdown_factor * std::max(f.opts.op_norm, 1.0);

  f.beta0 = r0.norm();
  if (f.beta0 == 0.0)
    throw std::invalid_argument("igk_init: zero initial residual");
  if (r0.size() != nrows)
    throw std::invalid_argument("igk_init: r0 dimension mismatch");

  f.U = r0 / f.beta0;
  Vector v = adjoint_product(f.U.col(0));
  if (v.size() != ncols)
    throw std::invalid_argument("igk_init: adjoint product dimension mismatch");
  double l11 = v.norm();
  f.L = Matrix::Constant(1, 1, l11);
  f.M = Matrix::Zero(1, 0);
  if (l11 <= tol) {
    f.breakdown = true;
    f.V = Matrix::Zero(ncols, 1);
  } else {
    f.V = v / l11;
  }
  return f;
}

IgkFactorization igk_init(const LinearOperator& op, const ErrorSequence& errs,
                          const Vector& r0, IgkOptions opts) {
  if (opts.op_norm <= 0.0) opts.op_norm = opnorm_estimate(op);
  const ErrorOp& f1 = errs.F(1);
  auto adj = [&](const Vector& u) {
    Vector v = op.apply_adjoint(u);
    if (f1.adjoint) v += f1.adjoint(u);
    return v;
  };
  return igk_init_with(adj, op.rows(), op.cols(), r0, opts);
}

void igk_step_with(
    IgkFactorization& f,
    const std::function<Vector(const Vector&)>& forward_product,
    const std::function<Vector(const Vector&)>& adjoint_product) {
  if (f.breakdown)
    throw std::runtime_error("igk_step: factorization broke down");
  const int i = f.k;  // building column i+1 of M, row i+2 of L (1-based)
  const double tol = f.opts.breakdown_factor * std::max(f.opts.op_norm, 1.0);

  Vector u = forward_product(f.V.col(i));
  Vector mcol = orthogonalize(f.U, i + 1, u);
  double nu = u.norm();

  grow_rect(f.M, i + 2, i + 1);
  f.M.col(i).head(i + 1) = mcol;
  f.M(i + 1, i) = nu;
  if (nu <= tol) {
    // Exact column: keep the completed factor for the k+1 solves.
    grow_cols(f.U, i + 2);
    f.U.col(i + 1).setZero();
    grow_cols(f.V, i + 2);
    f.V.col(i + 1).setZero();
    grow_square(f.L, i + 2);
    f.k = i + 1;
    f.breakdown = true;
    return;
  }
  u /= nu;
  grow_cols(f.U, i + 2);
  f.U.col(i + 1) = u;

  Vector v = adjoint_product(u);
  Vector lrow = orthogonalize(f.V, i + 1, v);
  double nv = v.norm();
  grow_square(f.L, i + 2);
  f.L.row(i + 1).head(i + 1) = lrow;
  f.L(i + 1, i + 1) = nv;
  f.k = i + 1;
  if (nv <= tol) {
    f.breakdown = true;
    grow_cols(f.V, i + 2);
    f.V.col(i + 1).setZero();
    return;
  }
  grow_cols(f.V, i + 2);
  f.V.col(i + 1) = v / nv;
}

void igk_step(IgkFactorization& f, const LinearOperator& op,
              const ErrorSequence& errs) {
  const int next = f.k + 1;  // 1-based iteration index
  const ErrorOp& e = errs.E(next);
  const ErrorOp& fi = errs.F(next + 1);
  auto fwd = [&](const Vector& x) {
    Vector y = op.apply(x);
    if (e.forward) y += e.forward(x);
    return y;
  };
  auto adj = [&](const Vector& u) {
    Vector v = op.apply_adjoint(u);
    if (fi.adjoint) v += fi.adjoint(u);
    return v;
  };
  igk_step_with(f, fwd, adj);
}

IarnoldiFactorization iarnoldi_run(const LinearOperator& op,
                                   const ErrorSequence& errs, const Vector& v1,
                                   int k) {
  if (std::abs(v1.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("iarnoldi_run: v1 must be a unit vector");
  IarnoldiFactorization f;
  f.V = Matrix::Zero(v1.size(), k + 1);
  f.V.col(0) = v1;
  f.H = Matrix::Zero(k + 1, k);
  const double nrm = opnorm_estimate(op);
  const double tol = 1e-14 * std::max(nrm * nrm, 1.0);
  for (int i = 0; i < k; ++i) {
    const ErrorOp& e = errs.E(i + 1);
    const ErrorOp& fi = errs.F(i + 2);
    Vector w = f.V.col(i);
    Vector aw = op.apply(w);
    if (e.forward) aw += e.forward(w);
    Vector v = op.apply_adjoint(aw);
    if (fi.adjoint) v += fi.adjoint(aw);
    Vector h = orthogonalize(f.V, i + 1, v);
    double nv = v.norm();
    f.H.col(i).head(i + 1) = h;
    f.H(i + 1, i) = nv;
    if (nv <= tol) {
      f.breakdown = true;
      f.k = i + 1;
      return f;
    }
    f.V.col(i + 1) = v / nv;
    f.k = i + 1;
  }
  return f;
}

InexactProjectedSolution ilsqr_solve(const IgkFactorization& f) {
  const int k = f.k;
  if (k < 1) throw std::invalid_argument("ilsqr_solve: needs k >= 1");
  Matrix m = f.M.topLeftCorner(k + 1, k);
  Vector rhs = Vector::Zero(k + 1);
  rhs[0] = f.beta0;

  InexactProjectedSolution out;
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  qr.setThreshold(1e-12);
  if (qr.rank() < k) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    out.s = svd.solve(rhs);
    out.rank_deficient = true;
  } else {
    out.s = qr.solve(rhs);
  }
  out.residual_norm = (m * out.s - rhs).norm();
  return out;
}

Vector icgls_solve(const IgkFactorization& f) {
  const int k = f.k;
  if (k < 1) throw std::invalid_argument("icgls_solve: needs k >= 1");
  Matrix sys = f.lbar().transpose() * f.M.topLeftCorner(k + 1, k);
  Vector rhs = Vector::Zero(k);
  rhs[0] = f.L(0, 0) * f.beta0;
  Eigen::FullPivLU<Matrix> lu(sys);
  if (!lu.isInvertible())
    throw std::runtime_error("icgls_solve: singular projected matrix");
  return lu.solve(rhs);
}

Vector hybrid_ilsqr_solve(const IgkFactorization& f, double lambda) {
  const int k = f.k;
  if (k < 1) throw std::invalid_argument("hybrid_ilsqr_solve: needs k >= 1");
  if (lambda == 0.0) return ilsqr_solve(f).s;
  Matrix aug = Matrix::Zero(2 * k + 1, k);
  aug.topRows(k + 1) = f.M.topLeftCorner(k + 1, k);
  aug.bottomRows(k).diagonal().setConstant(lambda);
  Vector rhs = Vector::Zero(2 * k + 1);
  rhs[0] = f.beta0;
  return aug.colPivHouseholderQr().solve(rhs);
}

Vector hybrid_ilsqr_solve_penalized(const IgkFactorization& f, double lambda) {
  const int k = f.k;
  if (k < 1)
    throw std::invalid_argument("hybrid_ilsqr_solve_penalized: needs k >= 1");
  Matrix m = f.M.topLeftCorner(k + 1, k);
  Matrix lhs = m.transpose() * m + lambda * lambda * Matrix::Identity(k, k);
  Vector rhs = m.transpose() * (Vector::Unit(k + 1, 0) * f.beta0);
  return lhs.ldlt().solve(rhs);
}

Vector hybrid_icgls_solve(const IgkFactorization& f, double lambda) {
  const int k = f.k;
  if (k < 1) throw std::invalid_argument("hybrid_icgls_solve: needs k >= 1");
  Matrix sys = f.lbar().transpose() * f.M.topLeftCorner(k + 1, k) +
               lambda * lambda * Matrix::Identity(k, k);
  Vector rhs = Vector::Zero(k);
  rhs[0] = f.L(0, 0) * f.beta0;
  Eigen::FullPivLU<Matrix> lu(sys);
  if (!lu.isInvertible())
    throw std::runtime_error("hybrid_icgls_solve: singular shifted matrix");
  return lu.solve(rhs);
}

Vector assemble_solution(const IgkFactorization& f, const Vector& x0,
                         const Vector& s) {
  return x0 + f.V.leftCols(s.size()) * s;
}

ShiftInvarianceReport shift_invariance_probe(const LinearOperator& op,
                                             const ErrorSequence& errs,
                                             const Vector& r0,
                                             const std::vector<double>& lambdas,
                                             int k) {
  std::vector<Matrix> bases;
  bases.reserve(lambdas.size());
  for (std::size_t t = 0; t < lambdas.size(); ++t) {
    // The build consumes the operator, the errors and r0 only; lambda is
    // deliberately unused, which is the content of the invariance claim.
    IgkFactorization f = igk_init(op, errs, r0);
    for (int i = 0; i < k && !f.breakdown; ++i) igk_step(f, op, errs);
    bases.push_back(f.basis());
  }
  ShiftInvarianceReport rep;
  for (std::size_t a = 0; a < bases.size(); ++a)
    for (std::size_t b = a + 1; b < bases.size(); ++b) {
      Matrix pa = bases[a] * bases[a].transpose();
      Matrix pb = bases[b] * bases[b].transpose();
      rep.max_projector_distance =
          std::max(rep.max_projector_distance, (pa - pb).norm());
    }
  return rep;
}

}  // namespace ikr

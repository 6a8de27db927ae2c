#pragma once

#include <Eigen/Core>

#include <stdexcept>

namespace ikr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Matrix-free linear map with forward and adjoint actions.
///
/// Implementations are immutable after construction and may be applied
/// concurrently from several workers.
class LinearOperator {
public:
  virtual ~LinearOperator() = default;

  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;

  /// y = A x. Throws std::invalid_argument on a dimension mismatch.
  Vector apply(const Vector& x) const {
    if (x.size() != cols())
      throw std::invalid_argument("LinearOperator::apply: dimension mismatch");
    return apply_impl(x);
  }

  /// y = A^T u. Throws std::invalid_argument on a dimension mismatch.
  Vector apply_adjoint(const Vector& u) const {
    if (u.size() != rows())
      throw std::invalid_argument(
          "LinearOperator::apply_adjoint: dimension mismatch");
    return apply_adjoint_impl(u);
  }

protected:
  virtual Vector apply_impl(const Vector& x) const = 0;
  virtual Vector apply_adjoint_impl(const Vector& u) const = 0;
};

/// Operator backed by an explicit dense matrix.
class DenseOperator final : public LinearOperator {
public:
  explicit DenseOperator(Matrix entries) : entries_(std::move(entries)) {}

  Eigen::Index rows() const override { return entries_.rows(); }
  Eigen::Index cols() const override { return entries_.cols(); }
  const Matrix& entries() const { return entries_; }

protected:
  Vector apply_impl(const Vector& x) const override { return entries_ * x; }
  Vector apply_adjoint_impl(const Vector& u) const override {
    return entries_.transpose() * u;
  }

private:
  Matrix entries_;
};

struct AdjointReport {
  double max_violation = 0.0;
  bool pass = false;
};

/// Max over random probe pairs of |<Ax,u> - <x,A^T u>| / (||x|| ||u||).
AdjointReport adjoint_check(const LinearOperator& op, int ntrials, double tol,
                            unsigned seed = 20240319u);

/// Materialize the operator column by column. Guarded: rows*cols must not
/// exceed 2^22 entries.
Matrix to_dense(const LinearOperator& op);

/// 2-norm estimate via power iteration on A^T A (fixed seed, fixed count).
double opnorm_estimate(const LinearOperator& op, int iters = 20,
                       unsigned seed = 20240319u);

}  // namespace ikr

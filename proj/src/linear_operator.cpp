#include "ikr/linear_operator.hpp"

#include <cmath>
#include <random>

namespace ikr {

namespace {

Vector random_unit(Eigen::Index n, std::mt19937_64& gen) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(gen);
  double nrm = v.norm();
  if (nrm > 0) v /= nrm;
  return v;
}

}  // namespace

AdjointReport adjoint_check(const LinearOperator& op, int ntrials, double tol,
                            unsigned seed) {
  if (ntrials < 1)
    throw std::invalid_argument("adjoint_check: ntrials must be >= 1");
  std::mt19937_64 gen(seed);
  double worst = 0.0;
  for (int t = 0; t < ntrials; ++t) {
    Vector x = random_unit(op.cols(), gen);
    Vector u = random_unit(op.rows(), gen);
    double lhs = op.apply(x).dot(u);
    double rhs = x.dot(op.apply_adjoint(u));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return {worst, worst <= tol};
}

Matrix to_dense(const LinearOperator& op) {
  constexpr Eigen::Index kMaxEntries = Eigen::Index(1) << 22;
  if (op.rows() * op.cols() > kMaxEntries)
    throw std::invalid_argument("to_dense: operator exceeds size guard");
  Matrix dense(op.rows(), op.cols());
  Vector e = Vector::Zero(op.cols());
  for (Eigen::Index j = 0; j < op.cols(); ++j) {
    e[j] = 1.0;
    dense.col(j) = op.apply(e);
    e[j] = 0.0;
  }
  return dense;
}

double opnorm_estimate(const LinearOperator& op, int iters, unsigned seed) {
  std::mt19937_64 gen(seed);
  Vector v = random_unit(op.cols(), gen);
  double sigma = 0.0;
  for (int i = 0; i < iters; ++i) {
    Vector w = op.apply_adjoint(op.apply(v));
    double nrm = w.norm();
    if (nrm == 0.0) return 0.0;
    sigma = std::sqrt(nrm);
    v = w / nrm;
  }
  return sigma;
}

}  // namespace ikr

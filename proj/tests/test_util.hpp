#pragma once

#include "ikr/linear_operator.hpp"

#include <Eigen/Dense>

#include <random>

namespace ikr::test {

inline Matrix random_matrix(Eigen::Index m, Eigen::Index n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix a(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) a(i, j) = dist(gen);
  return a;
}

inline Vector random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

// Matrix with quickly decaying singular values, the ill-posed test shape.
inline Matrix ill_posed_matrix(Eigen::Index m, Eigen::Index n, unsigned seed,
                               double decay = 1e-4) {
  Matrix a = random_matrix(m, n, seed);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i)
    s[i] *= std::pow(decay, double(i) / double(s.size() - 1));
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

// Independent symmetric-Lanczos tridiagonalization of B = A^T A started at
// q1 = A^T r0 / ||A^T r0||; plain three-term recurrence with full
// reorthogonalization. Returns the k x k tridiagonal.
inline Matrix lanczos_tridiag_oracle(const Matrix& a, const Vector& r0,
                                     int k) {
  Matrix b = a.transpose() * a;
  Vector q = a.transpose() * r0;
  q /= q.norm();
  Matrix Q(b.rows(), k);
  Matrix t = Matrix::Zero(k, k);
  Vector q_prev = Vector::Zero(b.rows());
  double beta = 0.0;
  for (int j = 0; j < k; ++j) {
    Q.col(j) = q;
    Vector w = b * q - beta * q_prev;
    double alpha = q.dot(w);
    w -= alpha * q;
    for (int pass = 0; pass < 2; ++pass)
      w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * w);
    t(j, j) = alpha;
    beta = w.norm();
    if (j + 1 < k) {
      t(j, j + 1) = beta;
      t(j + 1, j) = beta;
      q_prev = q;
      q = w / beta;
    }
  }
  return t;
}

// Dense Arnoldi on the square matrix B from unit v1; returns the basis
// (n x (k+1)).
inline Matrix arnoldi_basis_oracle(const Matrix& b, const Vector& v1, int k) {
  Matrix v(b.rows(), k + 1);
  v.col(0) = v1;
  for (int j = 0; j < k; ++j) {
    Vector w = b * v.col(j);
    for (int pass = 0; pass < 2; ++pass)
      w -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * w);
    v.col(j + 1) = w / w.norm();
  }
  return v;
}

inline double projector_distance(const Matrix& va, const Matrix& vb) {
  return (va * va.transpose() - vb * vb.transpose()).norm();
}

}  // namespace ikr::test

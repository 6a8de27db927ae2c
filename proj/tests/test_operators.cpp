#include "ikr/linear_operator.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace ikr;

TEST_CASE("identity operator maps e1 to e1") {
  DenseOperator op(Matrix::Identity(4, 4));
  Vector e1 = Vector::Unit(4, 0);
  CHECK((op.apply(e1) - e1).norm() == 0.0);
  CHECK((op.apply_adjoint(e1) - e1).norm() == 0.0);
}

TEST_CASE("2x2 dense forward and adjoint hand values") {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  DenseOperator op(a);
  Vector ones = Vector::Ones(2);
  Vector fwd = op.apply(ones);
  CHECK(fwd[0] == doctest::Approx(3.0));
  CHECK(fwd[1] == doctest::Approx(7.0));
  Vector adj = op.apply_adjoint(ones);
  CHECK(adj[0] == doctest::Approx(4.0));
  CHECK(adj[1] == doctest::Approx(6.0));
}

TEST_CASE("dimension mismatches are rejected") {
  DenseOperator op(test::random_matrix(5, 3, 1));
  CHECK_THROWS_AS(op.apply(Vector::Zero(4)), std::invalid_argument);
  CHECK_THROWS_AS(op.apply_adjoint(Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("forward map is linear on random probes") {
  DenseOperator op(test::random_matrix(7, 5, 2));
  Vector x = test::random_vector(5, 3);
  Vector y = test::random_vector(5, 4);
  double al = 0.37, be = -1.91;
  Vector lhs = op.apply(al * x + be * y);
  Vector rhs = al * op.apply(x) + be * op.apply(y);
  CHECK((lhs - rhs).norm() <= 1e-12 * (x.norm() + y.norm()));
}

TEST_CASE("adjoint_check: identity has zero violation") {
  DenseOperator op(Matrix::Identity(6, 6));
  auto rep = adjoint_check(op, 10, 1e-12);
  CHECK(rep.max_violation == 0.0);
  CHECK(rep.pass);
}

TEST_CASE("adjoint_check passes on a random dense 10x6") {
  DenseOperator op(test::random_matrix(10, 6, 5));
  auto rep = adjoint_check(op, 25, 1e-10);
  CHECK(rep.pass);
}

TEST_CASE("adjoint_check flags a broken adjoint") {
  struct Broken : LinearOperator {
    Matrix a = test::random_matrix(6, 6, 6);
    Eigen::Index rows() const override { return 6; }
    Eigen::Index cols() const override { return 6; }
    Vector apply_impl(const Vector& x) const override { return a * x; }
    Vector apply_adjoint_impl(const Vector& u) const override {
      return a * u;  // wrong on purpose
    }
  } op;
  CHECK_FALSE(adjoint_check(op, 10, 1e-8).pass);
}

TEST_CASE("to_dense reproduces the identity and respects the size guard") {
  DenseOperator op(Matrix::Identity(3, 3));
  CHECK((to_dense(op) - Matrix::Identity(3, 3)).norm() == 0.0);

  DenseOperator big(Matrix::Zero(1, 1));
  struct Huge : LinearOperator {
    Eigen::Index rows() const override { return 1 << 12; }
    Eigen::Index cols() const override { return 1 << 12; }
    Vector apply_impl(const Vector& x) const override { return x; }
    Vector apply_adjoint_impl(const Vector& u) const override { return u; }
  } huge;
  CHECK_THROWS_AS(to_dense(huge), std::invalid_argument);
}

TEST_CASE("to_dense round trip is idempotent") {
  Matrix a = test::random_matrix(6, 4, 7);
  DenseOperator op(a);
  Matrix d1 = to_dense(op);
  DenseOperator op2(d1);
  CHECK((to_dense(op2) - d1).norm() == 0.0);
}

TEST_CASE("to_dense agrees with apply on random vectors") {
  DenseOperator op(test::random_matrix(8, 5, 8));
  Matrix d = to_dense(op);
  Vector x = test::random_vector(5, 9);
  CHECK((d * x - op.apply(x)).norm() <= 1e-12 * x.norm());
}

TEST_CASE("opnorm_estimate is deterministic and close to the true norm") {
  Matrix a = test::random_matrix(12, 9, 10);
  DenseOperator op(a);
  double est1 = opnorm_estimate(op);
  double est2 = opnorm_estimate(op);
  CHECK(est1 == est2);
  Eigen::JacobiSVD<Matrix> svd(a);
  double truth = svd.singularValues()[0];
  CHECK(est1 <= truth * (1 + 1e-12));
  CHECK(est1 >= truth * 0.9);
}

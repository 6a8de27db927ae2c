#include "ikr/regparam.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace ikr;

namespace {

double residual_sq_direct(const Matrix& m, double beta, double lambda) {
  int k = static_cast<int>(m.cols());
  Matrix lhs = m.transpose() * m + lambda * lambda * Matrix::Identity(k, k);
  Vector rhs = m.transpose() * (Vector::Unit(m.rows(), 0) * beta);
  Vector s = lhs.ldlt().solve(rhs);
  return (m * s - Vector::Unit(m.rows(), 0) * beta).squaredNorm();
}

}  // namespace

TEST_CASE("discrepancy principle: scalar closed form gives lambda = 1") {
  // M = [1; 0], beta = 2, tau ||e||^2 = 1: (2 lambda^2/(1+lambda^2))^2 = 1.
  Matrix m(2, 1);
  m << 1.0, 0.0;
  LambdaPolicy policy;
  policy.kind = LambdaKind::discrepancy;
  policy.tau = 1.0;
  policy.noise_norm = 1.0;
  LambdaResult r = discrepancy_lambda(m, 2.0, policy);
  CHECK(r.status == LambdaStatus::converged);
  CHECK(r.lambda == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(residual_sq_direct(m, 2.0, r.lambda) - 1.0) <= 1e-10);
}

TEST_CASE("discrepancy principle: zero noise target returns lambda = 0") {
  Matrix m(3, 2);
  m << 1, 0, 0, 1, 0, 0;
  LambdaPolicy policy;
  policy.kind = LambdaKind::discrepancy;
  policy.noise_norm = 0.0;
  LambdaResult r = discrepancy_lambda(m, 1.0, policy);
  CHECK(r.lambda == 0.0);
  CHECK(r.status == LambdaStatus::converged);
}

TEST_CASE("discrepancy principle flags an already-exceeded residual") {
  // Inconsistent rhs: even lambda = 0 leaves residual^2 = beta^2 e_2-part.
  Matrix m(2, 1);
  m << 1.0, 0.0;
  LambdaPolicy policy;
  policy.kind = LambdaKind::discrepancy;
  policy.tau = 1.0;
  policy.noise_norm = 1e-6;
  // beta e1 is fully reachable, so drive the target below the minimum by
  // using an M with an unreachable component.
  Matrix m2(3, 1);
  m2 << 0.0, 1.0, 0.0;  // column orthogonal to e1: residual stays beta
  LambdaResult r = discrepancy_lambda(m2, 1.0, policy);
  CHECK(r.lambda == 0.0);
  CHECK(r.status == LambdaStatus::below_noise);
}

TEST_CASE("discrepancy residual is increasing in lambda") {
  Matrix m = test::random_matrix(7, 5, 120);
  double beta = 2.5;
  LambdaPolicy policy;
  policy.kind = LambdaKind::discrepancy;
  policy.tau = 1.01;
  policy.noise_norm = 0.4 * beta;
  LambdaResult r = discrepancy_lambda(m, beta, policy);
  REQUIRE(r.status == LambdaStatus::converged);
  double target = policy.tau * policy.noise_norm * policy.noise_norm;
  CHECK(std::abs(residual_sq_direct(m, beta, r.lambda) - target) <=
        1e-8 * target);
  CHECK(residual_sq_direct(m, beta, 2.0 * r.lambda) > target);
}

TEST_CASE("discrepancy satisfies its residual equation on seeded problems") {
  int solved = 0;
  for (unsigned seed = 0; seed < 50; ++seed) {
    int k = 3 + int(seed % 5);
    Matrix m = test::random_matrix(k + 1, k, 500 + seed);
    double beta = 1.0 + 0.1 * (seed % 7);
    // Pick a noise level between the attainable minimum and beta^2 so the
    // root is bracketed, as the oracle harness does.
    double r0sq = residual_sq_direct(m, beta, 0.0);
    LambdaPolicy policy;
    policy.kind = LambdaKind::discrepancy;
    policy.tau = 1.01;
    policy.noise_norm =
        std::sqrt((0.6 * r0sq + 0.4 * beta * beta) / policy.tau);
    LambdaResult r = discrepancy_lambda(m, beta, policy);
    if (r.status != LambdaStatus::converged) continue;
    ++solved;
    double target = policy.tau * policy.noise_norm * policy.noise_norm;
    CHECK(std::abs(residual_sq_direct(m, beta, r.lambda) - target) <=
          1e-8 * target);
  }
  CHECK(solved == 50);
}

TEST_CASE("wGCV: SVD evaluation equals the direct dense formula") {
  Matrix m = test::random_matrix(6, 4, 121);
  double beta = 1.7, omega = 0.8;
  for (double lambda : {1e-4, 0.05, 0.9, 7.0}) {
    double via_svd = wgcv_objective(m, beta, lambda, omega);
    int k = 4;
    Matrix inner =
        m * (m.transpose() * m + lambda * lambda * Matrix::Identity(k, k))
                .inverse() *
        m.transpose();
    Matrix eye = Matrix::Identity(m.rows(), m.rows());
    Vector resid = (eye - inner) * Vector::Unit(m.rows(), 0) * beta;
    double direct = k * resid.squaredNorm() /
                    std::pow((eye - omega * inner).trace(), 2);
    CHECK(via_svd == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("wGCV returns the grid-global minimizer") {
  Matrix m = test::random_matrix(7, 5, 122);
  double beta = 2.0;
  LambdaPolicy policy;
  policy.kind = LambdaKind::wgcv;
  policy.omega = 1.0;
  LambdaResult r = wgcv_lambda(m, beta, policy);
  double got = wgcv_objective(m, beta, r.lambda, policy.omega);
  for (int i = 0; i < 61; ++i) {
    double lam = 1e-8 * beta * std::pow(1e10, double(i) / 60.0);
    CHECK(got <= wgcv_objective(m, beta, lam, policy.omega) * (1 + 1e-10));
  }
  // endpoints are no better
  CHECK(wgcv_objective(m, beta, 1e-8, policy.omega) >= got * (1 - 1e-12));
  CHECK(wgcv_objective(m, beta, 1e4, policy.omega) >= got * (1 - 1e-12));
}

TEST_CASE("wGCV scalar case matches a fine-grid oracle") {
  Matrix m(2, 1);
  m << 1.0, 0.0;
  double beta = 1.0;
  LambdaPolicy policy;
  policy.kind = LambdaKind::wgcv;
  policy.omega = 1.0;
  LambdaResult r = wgcv_lambda(m, beta, policy);
  // Fine-grid oracle over the same range.
  double best_lam = 0.0, best_g = std::numeric_limits<double>::infinity();
  for (double lg = -8.0; lg <= 2.0; lg += 1e-4) {
    double lam = beta * std::pow(10.0, lg);
    double g = wgcv_objective(m, beta, lam, 1.0);
    if (g < best_g) {
      best_g = g;
      best_lam = lam;
    }
  }
  CHECK(wgcv_objective(m, beta, r.lambda, 1.0) <= best_g * (1 + 1e-8));
  static_cast<void>(best_lam);
}

TEST_CASE("wGCV is deterministic") {
  Matrix m = test::random_matrix(6, 4, 123);
  LambdaPolicy policy;
  policy.kind = LambdaKind::wgcv;
  LambdaResult a = wgcv_lambda(m, 1.3, policy);
  LambdaResult b = wgcv_lambda(m, 1.3, policy);
  CHECK(a.lambda == b.lambda);
}

TEST_CASE("stopping_check: identical consecutive records stabilize") {
  SolveHistory h;
  IterationRecord r;
  r.lambda = 0.5;
  r.sigma1 = r.sigma2 = 2.0;
  r.x_rel_change = 0.0;
  r.total_iter = 1;
  h.records.push_back(r);
  r.total_iter = 2;
  h.records.push_back(r);
  StoppingConfig cfg;
  StopDecision d = stopping_check(h, cfg, 1.0, 1.0);
  CHECK(d.stop);
  CHECK(d.reason == StopReason::stabilized);
}

TEST_CASE("stopping_check: zero gradient is stationary") {
  SolveHistory h;
  StoppingConfig cfg;
  StopDecision d = stopping_check(h, cfg, 0.0, 1.0);
  CHECK(d.stop);
  CHECK(d.reason == StopReason::stationary);
}

TEST_CASE("stopping_check: caps produce a budget stop") {
  SolveHistory h;
  IterationRecord r;
  r.lambda = 0.5;
  r.sigma1 = 3.0;
  r.x_rel_change = 1.0;  // not stabilized
  r.inner_iter = 50;
  r.total_iter = 50;
  h.records.push_back(r);
  StoppingConfig cfg;
  cfg.max_inner = 50;
  StopDecision d = stopping_check(h, cfg, 1.0, 1.0);
  CHECK(d.stop);
  CHECK(d.reason == StopReason::budget);
}

TEST_CASE("stopping_check guards divisions by zero previous values") {
  SolveHistory h;
  IterationRecord r;
  r.lambda = 0.0;  // zero previous lambda: clause treated as satisfied
  r.sigma1 = 0.0;
  r.sigma2 = 0.0;
  r.rho = 0.0;
  r.x_rel_change = 0.0;
  h.records.push_back(r);
  h.records.push_back(r);
  StoppingConfig cfg;
  StopDecision d = stopping_check(h, cfg, 1.0, 1.0);
  CHECK(d.stop);
  CHECK(d.reason == StopReason::stabilized);
}

#include "ikr/regparam.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ikr {

namespace {

struct ProjectedSvd {
  Vector sv;   // singular values of M, size k
  Vector c;    // P^T e1 * beta, size min(k+1, ...) = full left size
  int k = 0;

  explicit ProjectedSvd(const Matrix& M, double beta) {
    k = static_cast<int>(M.cols());
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU);
    sv = svd.singularValues();
    c = beta * svd.matrixU().row(0).transpose();
  }

  // ||M s_lambda - beta e1||^2 at the Tikhonov-filtered solution.
  double residual_sq(double lambda) const {
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
      double denom = sv[i] * sv[i] + lambda * lambda;
      double t = denom > 0.0 ? (lambda * lambda) / denom : 1.0;
      acc += t * t * c[i] * c[i];
    }
    for (int i = k; i < c.size(); ++i) acc += c[i] * c[i];
    return acc;
  }

  double gcv(double lambda, double omega) const {
    double num = k * residual_sq(lambda);
    double trace = static_cast<double>(c.size());
    for (int i = 0; i < k; ++i) {
      double denom = sv[i] * sv[i] + lambda * lambda;
      if (denom > 0.0) trace -= omega * sv[i] * sv[i] / denom;
    }
    return num / (trace * trace);
  }
};

}  // namespace

double wgcv_objective(const Matrix& M, double beta, double lambda,
                      double omega) {
  return ProjectedSvd(M, beta).gcv(lambda, omega);
}

LambdaResult discrepancy_lambda(const Matrix& M, double beta,
                                const LambdaPolicy& policy) {
  if (policy.kind != LambdaKind::discrepancy)
    throw std::invalid_argument("discrepancy_lambda: wrong policy kind");
  const double target = policy.tau * policy.noise_norm * policy.noise_norm;
  if (target <= 0.0) return {0.0, LambdaStatus::converged};

  ProjectedSvd svd(M, beta);
  if (svd.residual_sq(0.0) > target) return {0.0, LambdaStatus::below_noise};
  if (target >= beta * beta * (1.0 - 1e-14))
    return {0.0, LambdaStatus::unbracketable};

  // residual_sq is increasing in lambda; bracket then bisect in log space.
  double scale = svd.sv.size() ? svd.sv[0] : 1.0;
  if (scale <= 0.0) scale = 1.0;
  double lo = 1e-12 * scale, hi = 1e10 * scale;
  if (svd.residual_sq(hi) < target) return {0.0, LambdaStatus::unbracketable};
  for (int it = 0; it < 200; ++it) {
    double mid = std::sqrt(lo * hi);
    if (svd.residual_sq(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  double lambda = std::sqrt(lo * hi);
  if (std::abs(svd.residual_sq(lambda) - target) > 1e-8 * target)
    return {lambda, LambdaStatus::unbracketable};
  return {lambda, LambdaStatus::converged};
}

LambdaResult wgcv_lambda(const Matrix& M, double beta,
                         const LambdaPolicy& policy) {
  if (policy.kind != LambdaKind::wgcv)
    throw std::invalid_argument("wgcv_lambda: wrong policy kind");
  ProjectedSvd svd(M, beta);

  const int npts = 61;
  const double lo = 1e-8 * beta, hi = 1e2 * beta;
  double best_lambda = lo, best_g = std::numeric_limits<double>::infinity();
  double min_g = best_g, max_g = 0.0;
  int best_i = 0;
  std::vector<double> grid(npts);
  for (int i = 0; i < npts; ++i) {
    grid[i] = lo * std::pow(hi / lo, double(i) / (npts - 1));
    double g = svd.gcv(grid[i], policy.omega);
    min_g = std::min(min_g, g);
    max_g = std::max(max_g, g);
    if (g < best_g) {
      best_g = g;
      best_lambda = grid[i];
      best_i = i;
    }
  }
  if (max_g - min_g <= 1e-12 * std::max(max_g, 1e-300))
    return {grid[0], LambdaStatus::flat};

  // Golden-section refinement inside the bracketing grid cells.
  double a = grid[std::max(best_i - 1, 0)];
  double b = grid[std::min(best_i + 1, npts - 1)];
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
  double f1 = svd.gcv(c1, policy.omega), f2 = svd.gcv(c2, policy.omega);
  while (b - a > 1e-6 * b) {
    if (f1 <= f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - phi * (b - a);
      f1 = svd.gcv(c1, policy.omega);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + phi * (b - a);
      f2 = svd.gcv(c2, policy.omega);
    }
  }
  double refined = 0.5 * (a + b);
  if (svd.gcv(refined, policy.omega) < best_g) best_lambda = refined;
  return {best_lambda, LambdaStatus::converged};
}

StopDecision stopping_check(const SolveHistory& history,
                            const StoppingConfig& cfg, double grad_norm,
                            double grad0_norm) {
  if (grad0_norm > 0.0 && grad_norm / grad0_norm <= cfg.grad_tol)
    return {true, StopReason::stationary};
  if (grad0_norm == 0.0 && grad_norm == 0.0)
    return {true, StopReason::stationary};

  if (history.records.size() >= 2) {
    const IterationRecord& cur = history.records.back();
    const IterationRecord& prev = history.records[history.records.size() - 2];
    bool ok_lambda =
        prev.lambda == 0.0
            ? true
            : std::abs(cur.lambda - prev.lambda) / prev.lambda <= cfg.theta1;
    bool ok_x = cur.x_rel_change <= cfg.theta2;
    double ynorm = std::sqrt(prev.sigma1 * prev.sigma1 +
                             prev.sigma2 * prev.sigma2 + prev.rho * prev.rho);
    double ydiff = std::sqrt(std::pow(cur.sigma1 - prev.sigma1, 2) +
                             std::pow(cur.sigma2 - prev.sigma2, 2) +
                             std::pow(cur.rho - prev.rho, 2));
    bool ok_y = ynorm == 0.0 ? true : ydiff / ynorm <= cfg.theta3;
    if (ok_lambda && ok_x && ok_y) return {true, StopReason::stabilized};
  }

  if (!history.records.empty()) {
    const IterationRecord& cur = history.records.back();
    if (cur.inner_iter >= cfg.max_inner && cfg.max_inner > 0)
      return {true, StopReason::budget};
    if (cur.total_iter >= cfg.max_outer && cfg.max_outer > 0)
      return {true, StopReason::budget};
  }
  return {false, StopReason::none};
}

}  // namespace ikr

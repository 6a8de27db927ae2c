#include "ikr/bounds.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ikr {

namespace {

double weighted_sum(const Vector& s, const std::vector<double>& norms) {
  if (static_cast<int>(norms.size()) != s.size())
    throw std::invalid_argument("gap bound: error norm count must equal k");
  double acc = 0.0;
  for (Eigen::Index l = 0; l < s.size(); ++l)
    acc += norms[l] * std::abs(s[l]);
  return acc;
}

}  // namespace

BoundReport ilsqr_gap_bound(const Vector& s,
                            const std::vector<double>& error_norms,
                            double e0_term, double inexact_residual_norm) {
  BoundReport rep;
  rep.which_bound = BoundKind::ilsqr;
  rep.inexact_residual_norm = inexact_residual_norm;
  rep.gap_bound = e0_term + weighted_sum(s, error_norms);
  rep.exact_residual_interval = {
      std::max(0.0, inexact_residual_norm - rep.gap_bound),
      inexact_residual_norm + rep.gap_bound};
  return rep;
}

BoundReport hybrid_ilsqr_gap_bound(const Vector& s,
                                   const std::vector<double>& error_norms,
                                   double e0_term,
                                   double inexact_residual_norm) {
  if (static_cast<int>(error_norms.size()) != s.size())
    throw std::invalid_argument("gap bound: error norm count must equal k");
  BoundReport rep;
  rep.which_bound = BoundKind::hybrid_ilsqr;
  rep.inexact_residual_norm = inexact_residual_norm;
  double acc_sq = e0_term * e0_term;
  for (Eigen::Index l = 0; l < s.size(); ++l) {
    double t = error_norms[l] * std::abs(s[l]);
    acc_sq += t * t;
  }
  rep.gap_bound = std::sqrt(acc_sq);
  double r2 = inexact_residual_norm * inexact_residual_norm;
  rep.exact_residual_interval = {std::sqrt(std::max(0.0, r2 - acc_sq)),
                                 std::sqrt(r2 + acc_sq)};
  return rep;
}

namespace {

BoundReport normal_eq_bound(const IgkFactorization& f, const Vector& s,
                            double lambda, const NormalEqErrorNorms& norms,
                            BoundKind kind) {
  const int k = f.k;
  if (s.size() != k)
    throw std::invalid_argument("normal-equations bound: |s| must equal k");
  if (static_cast<int>(norms.AtE.size()) != k ||
      static_cast<int>(norms.F.size()) != k + 1)
    throw std::invalid_argument("normal-equations bound: norm list sizes");

  Matrix hhat = f.hhat();
  Vector rhs = Vector::Zero(k + 1);
  rhs[0] = f.L(0, 0) * f.beta0;
  Vector resid = rhs - hhat * s;
  if (lambda != 0.0) resid.head(k) -= lambda * lambda * s;

  BoundReport rep;
  rep.which_bound = kind;
  rep.inexact_residual_norm = resid.norm();

  const Matrix& M = f.M;
  double acc = norms.b0_hat + norms.e0_hat;
  for (int j = 0; j < k; ++j) {
    double inner = 0.0;
    for (int i = 0; i <= j + 1; ++i)
      inner += std::abs(M(i, j)) * norms.F[i];
    acc += (norms.AtE[j] + inner) * std::abs(s[j]);
  }
  rep.gap_bound = acc;
  rep.exact_residual_interval = {
      std::max(0.0, rep.inexact_residual_norm - acc),
      rep.inexact_residual_norm + acc};
  return rep;
}

}  // namespace

BoundReport icgls_gap_bound(const IgkFactorization& f, const Vector& s,
                            const NormalEqErrorNorms& norms) {
  return normal_eq_bound(f, s, 0.0, norms, BoundKind::icgls);
}

BoundReport hybrid_icgls_gap_bound(const IgkFactorization& f, const Vector& s,
                                   double lambda,
                                   const NormalEqErrorNorms& norms) {
  return normal_eq_bound(f, s, lambda, norms, BoundKind::hybrid_icgls);
}

double allowable_error(int k_target, double sigma_min_estimate,
                       double residual_norm_prev, double lambda, double epsilon,
                       bool hybrid) {
  if (k_target < 1)
    throw std::invalid_argument("allowable_error: k_target >= 1");
  if (residual_norm_prev == 0.0)
    return std::numeric_limits<double>::infinity();
  double sigma = hybrid ? std::sqrt(sigma_min_estimate * sigma_min_estimate +
                                    lambda * lambda)
                        : sigma_min_estimate;
  return sigma / (k_target * residual_norm_prev) * epsilon;
}

double projected_sigma_min(const IgkFactorization& f) {
  if (f.k < 1) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(f.M.topLeftCorner(f.k + 1, f.k));
  return svd.singularValues()[f.k - 1];
}

void InexactnessBudget::update(const std::vector<double>& error_norms,
                               const Vector& s, ControlBound active) {
  accumulated = 0.0;
  double acc_sq = e0_term * e0_term;
  for (Eigen::Index l = 0; l < s.size(); ++l) {
    double t = error_norms[l] * std::abs(s[l]);
    accumulated += t;
    acc_sq += t * t;
  }
  if (active == ControlBound::accumulated_gap) {
    exceeded = std::sqrt(acc_sq) > epsilon;
  } else {
    exceeded = false;
    for (std::size_t l = 0; l < error_norms.size(); ++l) {
      double cap = l < per_iter_caps.size()
                       ? per_iter_caps[l]
                       : std::numeric_limits<double>::infinity();
      if (error_norms[l] > cap) {
        exceeded = true;
        break;
      }
    }
  }
}

bool implies_gap(const InexactnessBudget& budget, const BoundReport&) {
  return budget.accumulated <= budget.epsilon;
}

double ztrue_lower_bound(double r0_norm, double e_norm, double e0x0_norm,
                         double a_norm) {
  if (a_norm <= 0.0)
    throw std::invalid_argument("ztrue_lower_bound: a_norm must be positive");
  double num = r0_norm * r0_norm - e_norm * e_norm - e0x0_norm * e0x0_norm;
  return std::max(0.0, num) / (a_norm * a_norm);
}

}  // namespace ikr

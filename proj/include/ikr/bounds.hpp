#pragma once

#include "ikr/igk.hpp"

#include <utility>
#include <vector>

namespace ikr {

enum class BoundKind { ilsqr, hybrid_ilsqr, icgls, hybrid_icgls };

struct BoundReport {
  double inexact_residual_norm = 0.0;
  double gap_bound = 0.0;
  std::pair<double, double> exact_residual_interval{0.0, 0.0};
  BoundKind which_bound = BoundKind::ilsqr;
};

/// Linear residual-gap bound for iLSQR:
/// gap = ||E_0 x_0|| + sum_l ||E_l|| |[s]_l|, interval = ||r|| -/+ gap
/// clipped at zero.
BoundReport ilsqr_gap_bound(const Vector& s,
                            const std::vector<double>& error_norms,
                            double e0_term, double inexact_residual_norm);

/// Squared-accumulation bound for hybrid-iLSQR, evaluated exactly as
/// printed: ||r_e||^2 <= ||r||^2 + ||E_0 x_0||^2 + sum ||E_l||^2 |[s]_l|^2.
/// gap_bound stores sqrt of the accumulated squared terms; the interval is
/// [sqrt(max(0, r^2 - g^2)), sqrt(r^2 + g^2)]. Note the companion linear
/// bound of ilsqr_gap_bound also applies to the augmented residuals and is
/// the only one of the two that is a triangle-inequality consequence.
BoundReport hybrid_ilsqr_gap_bound(const Vector& s,
                                   const std::vector<double>& error_norms,
                                   double e0_term,
                                   double inexact_residual_norm);

struct NormalEqErrorNorms {
  std::vector<double> AtE;  // ||A^T E_j||, j = 1..k
  std::vector<double> F;    // ||F_i^T||,   i = 1..k+1
  double b0_hat = 0.0;      // ||F_1^T b||
  double e0_hat = 0.0;      // ||(F_1^T A + A^T E_0 + F_1^T E_0) x_0||
};

/// Four-term iCGLS bound on the exact normal-equations residual:
/// ||r_hat|| + ||b0_hat|| + ||E0_hat x0||
///   + sum_j ||A^T E_j|| |s_j| + sum_j (sum_i |[M]_{i,j}| ||F_i^T||) |s_j|
/// with r_hat = [L]_{1,1} beta e1 - Hhat s.
BoundReport icgls_gap_bound(const IgkFactorization& f, const Vector& s,
                            const NormalEqErrorNorms& norms);

/// Same accumulation with the shifted inexact residual
/// [L]_{1,1} beta e1 - (Hhat + lambda^2 Ibar) s.
BoundReport hybrid_icgls_gap_bound(const IgkFactorization& f, const Vector& s,
                                   double lambda,
                                   const NormalEqErrorNorms& norms);

/// Per-iteration allowable forward-error norm: with hybrid=false
/// sigma_k(M_k) / (k ||r_{j-1}||) * eps, with hybrid=true
/// sqrt(sigma_k(M^T M + lambda^2 I)) / (k ||r_{lambda,j-1}||) * eps.
/// Returns +inf when the previous residual norm is zero.
double allowable_error(int k_target, double sigma_min_estimate,
                       double residual_norm_prev, double lambda, double epsilon,
                       bool hybrid);

/// Smallest singular value of the leading (k+1) x k block of M.
double projected_sigma_min(const IgkFactorization& f);

enum class ControlBound { accumulated_gap, per_iteration_caps };

/// Running inexactness budget against the tolerance eps.
struct InexactnessBudget {
  double epsilon = 0.0;
  double e0_term = 0.0;              // ||E_0 x_0||
  double accumulated = 0.0;          // sum_l ||E_l|| |[s]_l|
  std::vector<double> per_iter_caps; // allowable_error values per iteration
  bool exceeded = false;

  /// Recomputes the accumulated term for the current projected solution
  /// and sets `exceeded` per the active bound: accumulated_gap compares
  /// sqrt(e0^2 + sum (||E_l|| |s_l|)^2) with eps; per_iteration_caps
  /// compares each ||E_l|| with its recorded cap.
  void update(const std::vector<double>& error_norms, const Vector& s,
              ControlBound active);
};

/// Literal form of the allowance guarantee: accumulated <= eps.
bool implies_gap(const InexactnessBudget& budget, const BoundReport& report);

/// max(0, ||r0||^2 - ||e||^2 - ||E0 x0||^2) / ||A||^2.
double ztrue_lower_bound(double r0_norm, double e_norm, double e0x0_norm,
                         double a_norm);

}  // namespace ikr

#pragma once

#include "ikr/linear_operator.hpp"

#include <array>

namespace ikr {

/// Gaussian blur parameters y = (sigma1, sigma2, rho); rho controls the
/// orientation through the covariance [[s1^2, rho^2], [rho^2, s2^2]].
struct PsfParams {
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double rho = 0.0;

  double psd_margin() const {
    return sigma1 * sigma1 * sigma2 * sigma2 - rho * rho * rho * rho;
  }
};

/// Strict feasibility: positive-definite covariance with margin, and the
/// spreads bounded away from the near-delta regime.
inline constexpr double kPsdMargin = 1e-6;
inline constexpr double kSigmaFloor = 0.05;

bool psf_params_valid(const PsfParams& y);

/// Rasterized N x N kernel, nonnegative, unit sum, centered at
/// chi = ceil((N+1)/2) in both axes (1-based).
struct PsfGrid {
  Matrix values;
  int center = 0;  // 1-based

  int size() const { return static_cast<int>(values.rows()); }
};

/// Throws std::invalid_argument when the parameters violate the PSD
/// constraint or the sigma floor.
PsfGrid gaussian_psf(const PsfParams& y, int N);

/// Analytic derivatives of the normalized PSF with respect to
/// (sigma1, sigma2, rho); each matrix has zero sum by construction.
std::array<Matrix, 3> psf_jacobian(const PsfParams& y, int N);

}  // namespace ikr

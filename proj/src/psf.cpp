#include "ikr/psf.hpp"

#include <cmath>
#include <stdexcept>

namespace ikr {

bool psf_params_valid(const PsfParams& y) {
  return y.sigma1 >= kSigmaFloor && y.sigma2 >= kSigmaFloor &&
         y.psd_margin() > kPsdMargin;
}

namespace {

struct InverseCovariance {
  double a, b, d;  // [[a, b], [b, d]]
};

InverseCovariance invert(const PsfParams& y) {
  double det = y.psd_margin();
  return {y.sigma2 * y.sigma2 / det, -y.rho * y.rho / det,
          y.sigma1 * y.sigma1 / det};
}

}  // namespace

PsfGrid gaussian_psf(const PsfParams& y, int N) {
  if (N < 1) throw std::invalid_argument("gaussian_psf: N must be positive");
  if (!psf_params_valid(y))
    throw std::invalid_argument("gaussian_psf: parameters violate the PSD constraint");
  PsfGrid grid;
  grid.center = (N + 2) / 2;  // ceil((N+1)/2), 1-based
  grid.values.resize(N, N);
  InverseCovariance k = invert(y);
  for (int i = 1; i <= N; ++i) {
    double d1 = i - grid.center;
    for (int j = 1; j <= N; ++j) {
      double d2 = j - grid.center;
      double q = k.a * d1 * d1 + 2.0 * k.b * d1 * d2 + k.d * d2 * d2;
      grid.values(i - 1, j - 1) = std::exp(-0.5 * q);
    }
  }
  grid.values /= grid.values.sum();
  return grid;
}

std::array<Matrix, 3> psf_jacobian(const PsfParams& y, int N) {
  if (!psf_params_valid(y))
    throw std::invalid_argument("psf_jacobian: parameters violate the PSD constraint");
  const int chi = (N + 2) / 2;
  InverseCovariance k = invert(y);

  Matrix g(N, N), dq1(N, N), dq2(N, N), dqr(N, N);
  for (int i = 1; i <= N; ++i) {
    double d1 = i - chi;
    for (int j = 1; j <= N; ++j) {
      double d2 = j - chi;
      double w1 = k.a * d1 + k.b * d2;  // (K d)_1
      double w2 = k.b * d1 + k.d * d2;  // (K d)_2
      double q = d1 * w1 + d2 * w2;
      g(i - 1, j - 1) = std::exp(-0.5 * q);
      // dq/dtheta = -(K d)^T dSigma (K d)
      dq1(i - 1, j - 1) = -2.0 * y.sigma1 * w1 * w1;
      dq2(i - 1, j - 1) = -2.0 * y.sigma2 * w2 * w2;
      dqr(i - 1, j - 1) = -4.0 * y.rho * w1 * w2;
    }
  }
  double s = g.sum();
  Matrix p = g / s;
  std::array<Matrix, 3> out;
  const Matrix* dqs[3] = {&dq1, &dq2, &dqr};
  for (int t = 0; t < 3; ++t) {
    Matrix dg = -0.5 * g.cwiseProduct(*dqs[t]);
    out[t] = dg / s - p * (dg.sum() / s);
  }
  return out;
}

}  // namespace ikr

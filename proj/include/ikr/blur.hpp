#pragma once

#include "ikr/linear_operator.hpp"
#include "ikr/psf.hpp"

#include <memory>

namespace ikr {

/// Spatially invariant blur with reflexive (Neumann) boundary conditions.
///
/// Forward action: out(i,j) = sum_{s,t} P(s,t) XR(i+chi-s, j+chi-t) where
/// XR is the reflexive extension of the image; realized as a circular
/// convolution on the 2N-periodic symmetric extension. The adjoint is the
/// exact composition adjoint (zero-extend, correlate, fold back).
/// Images are N x N, stacked column-major into vectors of length N^2.
class BlurOperator final : public LinearOperator {
public:
  explicit BlurOperator(PsfGrid psf);
  ~BlurOperator() override;

  BlurOperator(const BlurOperator&) = delete;
  BlurOperator& operator=(const BlurOperator&) = delete;

  Eigen::Index rows() const override { return n_; }
  Eigen::Index cols() const override { return n_; }
  int image_size() const { return N_; }
  const PsfGrid& psf() const { return psf_; }

  Matrix apply_image(const Matrix& x) const;
  Matrix apply_adjoint_image(const Matrix& u) const;

protected:
  Vector apply_impl(const Vector& x) const override;
  Vector apply_adjoint_impl(const Vector& u) const override;

private:
  struct Impl;
  PsfGrid psf_;
  int N_ = 0;
  Eigen::Index n_ = 0;
  std::unique_ptr<Impl> impl_;
};

/// Dual form of the blur identity A(y)X = A(X)P(y): the operator built
/// from the image X as kernel (reflexively extended) applied to the
/// kernel-argument Q placed with the same center convention.
Matrix image_kernel_apply(const Matrix& image, const Matrix& kernel_arg,
                          int center);

/// d(A(y) z)/dy as an n x p matrix: column l is the image z "blurred" by
/// the l-th PSF derivative through the duality above. p = 3, or 1 in the
/// constrained isotropic mode (sigma1 = sigma2, rho = 0) where the single
/// column is the sum of the two sigma columns.
Matrix jacobian_apply(const Vector& z, const PsfParams& y, int N,
                      bool isotropic = false);

/// Orthonormal 2-D DCT-II and its inverse.
Matrix dct2_ortho(const Matrix& x);
Matrix idct2_ortho(const Matrix& a);

struct DctSpectrum {
  Vector eigenvalues;  // N^2, column-major over the (l1, l2) DCT grid
  bool symmetric_approx = false;
  int N = 0;

  double max_abs() const { return eigenvalues.cwiseAbs().maxCoeff(); }
};

/// Spectral surrogate of the blur operator in the DCT-II basis.
/// symmetric_approx = false: lambda_l = [C A e1]_l / [C]_{l,1} (exact for
/// doubly symmetric PSFs). symmetric_approx = true: the diagonal of
/// C (A + A^T)/2 C^T, i.e. the optimal DCT approximation of the symmetric
/// part, computed in closed form from the 2N-DFT of the wrapped kernel.
DctSpectrum dct_spectrum(const PsfGrid& psf, bool symmetric_approx);

/// Applies the spectral surrogate C^T diag(lambda) C to an image vector.
Vector apply_spectrum(const DctSpectrum& spec, const Vector& x);

/// max_l |lambda_l^(i) - lambda_l^(j)|: the 2-norm of the (approximated)
/// operator difference.
double error_norm_estimate(const DctSpectrum& a, const DctSpectrum& b);
double error_norm_estimate(const PsfParams& yi, const PsfParams& yj, int N,
                           bool symmetric_approx);

}  // namespace ikr

#include "ikr/blur.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace ikr {

namespace {

struct FftwBuffer {
  double* p = nullptr;
  explicit FftwBuffer(std::size_t n)
      : p(static_cast<double*>(fftw_malloc(sizeof(double) * n))) {}
  ~FftwBuffer() { fftw_free(p); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

struct FftwComplexBuffer {
  fftw_complex* p = nullptr;
  explicit FftwComplexBuffer(std::size_t n)
      : p(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {}
  ~FftwComplexBuffer() { fftw_free(p); }
  FftwComplexBuffer(const FftwComplexBuffer&) = delete;
  FftwComplexBuffer& operator=(const FftwComplexBuffer&) = delete;
};

// Row-major 2N x 2N real transforms, r2c layout 2N x (N+1).
struct PeriodicTransform {
  int two_n = 0;
  int ccols = 0;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  explicit PeriodicTransform(int two_n_in) : two_n(two_n_in) {
    ccols = two_n / 2 + 1;
    FftwBuffer re(std::size_t(two_n) * two_n);
    FftwComplexBuffer cx(std::size_t(two_n) * ccols);
    fwd = fftw_plan_dft_r2c_2d(two_n, two_n, re.p, cx.p, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_2d(two_n, two_n, cx.p, re.p, FFTW_ESTIMATE);
  }
  ~PeriodicTransform() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  PeriodicTransform(const PeriodicTransform&) = delete;
  PeriodicTransform& operator=(const PeriodicTransform&) = delete;

  std::vector<std::complex<double>> forward(const double* re) const {
    FftwBuffer in(std::size_t(two_n) * two_n);
    std::copy(re, re + std::size_t(two_n) * two_n, in.p);
    FftwComplexBuffer out(std::size_t(two_n) * ccols);
    fftw_execute_dft_r2c(fwd, in.p, out.p);
    std::vector<std::complex<double>> result(std::size_t(two_n) * ccols);
    for (std::size_t i = 0; i < result.size(); ++i)
      result[i] = {out.p[i][0], out.p[i][1]};
    return result;
  }

  // Inverse with the 1/(2N)^2 normalization folded in.
  std::vector<double> backward(const std::vector<std::complex<double>>& c) const {
    FftwComplexBuffer in(std::size_t(two_n) * ccols);
    for (std::size_t i = 0; i < c.size(); ++i) {
      in.p[i][0] = c[i].real();
      in.p[i][1] = c[i].imag();
    }
    FftwBuffer out(std::size_t(two_n) * two_n);
    fftw_execute_dft_c2r(bwd, in.p, out.p);
    std::vector<double> result(std::size_t(two_n) * two_n);
    double scale = 1.0 / (double(two_n) * two_n);
    for (std::size_t i = 0; i < result.size(); ++i) result[i] = out.p[i] * scale;
    return result;
  }
};

// Reflexive (half-sample symmetric) extension of an N x N image to the
// 2N x 2N torus, row-major.
std::vector<double> extend_reflexive(const Matrix& x) {
  const int N = static_cast<int>(x.rows());
  const int two_n = 2 * N;
  std::vector<double> e(std::size_t(two_n) * two_n);
  for (int i = 0; i < two_n; ++i) {
    int si = i < N ? i : two_n - 1 - i;
    for (int j = 0; j < two_n; ++j) {
      int sj = j < N ? j : two_n - 1 - j;
      e[std::size_t(i) * two_n + j] = x(si, sj);
    }
  }
  return e;
}

// Kernel wrapped so that its center sits at the torus origin.
std::vector<double> wrap_kernel(const Matrix& p, int center) {
  const int N = static_cast<int>(p.rows());
  const int two_n = 2 * N;
  std::vector<double> h(std::size_t(two_n) * two_n, 0.0);
  for (int s = 1; s <= N; ++s) {
    int a = ((s - center) % two_n + two_n) % two_n;
    for (int t = 1; t <= N; ++t) {
      int b = ((t - center) % two_n + two_n) % two_n;
      h[std::size_t(a) * two_n + b] += p(s - 1, t - 1);
    }
  }
  return h;
}

Matrix crop_topleft(const std::vector<double>& w, int two_n, int N) {
  Matrix out(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) out(i, j) = w[std::size_t(i) * two_n + j];
  return out;
}

}  // namespace

struct BlurOperator::Impl {
  PeriodicTransform plans;
  std::vector<std::complex<double>> kernel_fft;

  Impl(const PsfGrid& psf, int two_n) : plans(two_n) {
    std::vector<double> h = wrap_kernel(psf.values, psf.center);
    kernel_fft = plans.forward(h.data());
  }
};

BlurOperator::BlurOperator(PsfGrid psf)
    : psf_(std::move(psf)), N_(psf_.size()), n_(Eigen::Index(N_) * N_) {
  impl_ = std::make_unique<Impl>(psf_, 2 * N_);
}

BlurOperator::~BlurOperator() = default;

Matrix BlurOperator::apply_image(const Matrix& x) const {
  const int two_n = 2 * N_;
  auto xf = impl_->plans.forward(extend_reflexive(x).data());
  for (std::size_t i = 0; i < xf.size(); ++i) xf[i] *= impl_->kernel_fft[i];
  return crop_topleft(impl_->plans.backward(xf), two_n, N_);
}

Matrix BlurOperator::apply_adjoint_image(const Matrix& u) const {
  const int two_n = 2 * N_;
  std::vector<double> padded(std::size_t(two_n) * two_n, 0.0);
  for (int i = 0; i < N_; ++i)
    for (int j = 0; j < N_; ++j)
      padded[std::size_t(i) * two_n + j] = u(i, j);
  auto uf = impl_->plans.forward(padded.data());
  for (std::size_t i = 0; i < uf.size(); ++i)
    uf[i] *= std::conj(impl_->kernel_fft[i]);
  std::vector<double> w = impl_->plans.backward(uf);
  Matrix out(N_, N_);
  for (int i = 0; i < N_; ++i) {
    int ri = two_n - 1 - i;
    for (int j = 0; j < N_; ++j) {
      int rj = two_n - 1 - j;
      out(i, j) = w[std::size_t(i) * two_n + j] +
                  w[std::size_t(i) * two_n + rj] +
                  w[std::size_t(ri) * two_n + j] +
                  w[std::size_t(ri) * two_n + rj];
    }
  }
  return out;
}

Vector BlurOperator::apply_impl(const Vector& x) const {
  Eigen::Map<const Matrix> xi(x.data(), N_, N_);
  Matrix out = apply_image(xi);
  return Eigen::Map<Vector>(out.data(), n_);
}

Vector BlurOperator::apply_adjoint_impl(const Vector& u) const {
  Eigen::Map<const Matrix> ui(u.data(), N_, N_);
  Matrix out = apply_adjoint_image(ui);
  return Eigen::Map<Vector>(out.data(), n_);
}

Matrix image_kernel_apply(const Matrix& image, const Matrix& kernel_arg,
                          int center) {
  const int N = static_cast<int>(image.rows());
  if (kernel_arg.rows() != N || kernel_arg.cols() != N)
    throw std::invalid_argument("image_kernel_apply: size mismatch");
  PeriodicTransform plans(2 * N);
  auto xf = plans.forward(extend_reflexive(image).data());
  auto qf = plans.forward(wrap_kernel(kernel_arg, center).data());
  for (std::size_t i = 0; i < xf.size(); ++i) xf[i] *= qf[i];
  return crop_topleft(plans.backward(xf), 2 * N, N);
}

Matrix jacobian_apply(const Vector& z, const PsfParams& y, int N,
                      bool isotropic) {
  if (z.size() != Eigen::Index(N) * N)
    throw std::invalid_argument("jacobian_apply: dimension mismatch");
  Eigen::Map<const Matrix> zi(z.data(), N, N);
  std::array<Matrix, 3> dp = psf_jacobian(y, N);
  const int chi = (N + 2) / 2;
  const int p = isotropic ? 1 : 3;
  Matrix jac(z.size(), p);

  PeriodicTransform plans(2 * N);
  auto zf = plans.forward(extend_reflexive(zi).data());
  auto col = [&](const Matrix& dkernel) {
    auto qf = plans.forward(wrap_kernel(dkernel, chi).data());
    for (std::size_t i = 0; i < qf.size(); ++i) qf[i] *= zf[i];
    Matrix img = crop_topleft(plans.backward(qf), 2 * N, N);
    return Eigen::Map<Vector>(img.data(), z.size()).eval();
  };
  if (isotropic) {
    jac.col(0) = col(dp[0] + dp[1]);
  } else {
    for (int t = 0; t < 3; ++t) jac.col(t) = col(dp[t]);
  }
  return jac;
}

namespace {

struct DctPlans {
  int N;
  fftw_plan fwd = nullptr;  // REDFT10 x REDFT10
  fftw_plan bwd = nullptr;  // REDFT01 x REDFT01

  explicit DctPlans(int n) : N(n) {
    FftwBuffer a(std::size_t(N) * N), b(std::size_t(N) * N);
    fwd = fftw_plan_r2r_2d(N, N, a.p, b.p, FFTW_REDFT10, FFTW_REDFT10,
                           FFTW_ESTIMATE);
    bwd = fftw_plan_r2r_2d(N, N, a.p, b.p, FFTW_REDFT01, FFTW_REDFT01,
                           FFTW_ESTIMATE);
  }
  ~DctPlans() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
};

double gamma_coeff(int k, int n) {
  return k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
}

}  // namespace

Matrix dct2_ortho(const Matrix& x) {
  const int N = static_cast<int>(x.rows());
  DctPlans plans(N);
  FftwBuffer in(std::size_t(N) * N), out(std::size_t(N) * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) in.p[std::size_t(i) * N + j] = x(i, j);
  fftw_execute_r2r(plans.fwd, in.p, out.p);
  Matrix a(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      a(i, j) = out.p[std::size_t(i) * N + j] * gamma_coeff(i, N) *
                gamma_coeff(j, N) * 0.25;
  return a;
}

Matrix idct2_ortho(const Matrix& a) {
  const int N = static_cast<int>(a.rows());
  DctPlans plans(N);
  FftwBuffer in(std::size_t(N) * N), out(std::size_t(N) * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      in.p[std::size_t(i) * N + j] =
          a(i, j) / (gamma_coeff(i, N) * gamma_coeff(j, N));
  fftw_execute_r2r(plans.bwd, in.p, out.p);
  Matrix x(N, N);
  double scale = 1.0 / (double(N) * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      x(i, j) = out.p[std::size_t(i) * N + j] * scale;
  return x;
}

DctSpectrum dct_spectrum(const PsfGrid& psf, bool symmetric_approx) {
  const int N = psf.size();
  DctSpectrum spec;
  spec.N = N;
  spec.symmetric_approx = symmetric_approx;
  Matrix lam(N, N);

  if (!symmetric_approx) {
    BlurOperator op(psf);
    Matrix e1 = Matrix::Zero(N, N);
    e1(0, 0) = 1.0;
    Matrix num = dct2_ortho(op.apply_image(e1));
    Matrix den = dct2_ortho(e1);
    lam = num.cwiseQuotient(den);
  } else {
    // diag(C (A + A^T)/2 C^T) in closed form: the symmetric extension of a
    // DCT-II basis vector is a pure 2N-cosine, so each diagonal entry is a
    // two-bin combination of the wrapped kernel's 2N-DFT.
    const int two_n = 2 * N;
    PeriodicTransform plans(two_n);
    auto hf = plans.forward(wrap_kernel(psf.values, psf.center).data());
    auto re = [&](int k1, int k2) {
      k1 = ((k1 % two_n) + two_n) % two_n;
      k2 = ((k2 % two_n) + two_n) % two_n;
      if (k2 <= N) return hf[std::size_t(k1) * (N + 1) + k2].real();
      // r2c stores k2 in [0, N]; use conjugate symmetry for the rest.
      return hf[std::size_t((two_n - k1) % two_n) * (N + 1) + (two_n - k2)]
          .real();
    };
    for (int l1 = 0; l1 < N; ++l1)
      for (int l2 = 0; l2 < N; ++l2)
        lam(l1, l2) = 0.5 * (re(l1, l2) + re(l1, -l2));
  }
  spec.eigenvalues = Eigen::Map<Vector>(lam.data(), Eigen::Index(N) * N);
  return spec;
}

Vector apply_spectrum(const DctSpectrum& spec, const Vector& x) {
  const int N = spec.N;
  if (x.size() != Eigen::Index(N) * N)
    throw std::invalid_argument("apply_spectrum: dimension mismatch");
  Eigen::Map<const Matrix> xi(x.data(), N, N);
  Eigen::Map<const Matrix> lam(spec.eigenvalues.data(), N, N);
  Matrix out = idct2_ortho(lam.cwiseProduct(dct2_ortho(xi)));
  return Eigen::Map<Vector>(out.data(), x.size());
}

double error_norm_estimate(const DctSpectrum& a, const DctSpectrum& b) {
  if (a.N != b.N)
    throw std::invalid_argument("error_norm_estimate: size mismatch");
  return (a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff();
}

double error_norm_estimate(const PsfParams& yi, const PsfParams& yj, int N,
                           bool symmetric_approx) {
  DctSpectrum a = dct_spectrum(gaussian_psf(yi, N), symmetric_approx);
  DctSpectrum b = dct_spectrum(gaussian_psf(yj, N), symmetric_approx);
  return error_norm_estimate(a, b);
}

}  // namespace ikr

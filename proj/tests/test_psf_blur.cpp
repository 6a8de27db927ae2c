#include "ikr/blur.hpp"
#include "ikr/psf.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace ikr;

namespace {

// Direct double-loop reflexive convolution, the naive oracle.
Matrix blur_naive(const PsfGrid& psf, const Matrix& x) {
  const int N = static_cast<int>(x.rows());
  const int chi = psf.center;
  auto reflect = [N](int idx) {  // 1-based reflexive index
    int t = ((idx - 1) % (2 * N) + 2 * N) % (2 * N);
    return t < N ? t : 2 * N - 1 - t;
  };
  Matrix out = Matrix::Zero(N, N);
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N; ++j) {
      double acc = 0.0;
      for (int s = 1; s <= N; ++s)
        for (int t = 1; t <= N; ++t)
          acc += psf.values(s - 1, t - 1) *
                 x(reflect(i + chi - s), reflect(j + chi - t));
      out(i - 1, j - 1) = acc;
    }
  return out;
}

Matrix delta_psf(int N) {
  Matrix p = Matrix::Zero(N, N);
  p((N + 2) / 2 - 1, (N + 2) / 2 - 1) = 1.0;
  return p;
}

}  // namespace

TEST_CASE("gaussian_psf: isotropic PSF is doubly symmetric") {
  PsfGrid g = gaussian_psf({1.5, 1.5, 0.0}, 9);
  CHECK(g.values.sum() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK((g.values - g.values.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  // flips about the center
  const int N = 9;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      CHECK(g.values(i, j) ==
            doctest::Approx(g.values(N - 1 - i, j)).epsilon(1e-14));
}

TEST_CASE("gaussian_psf: the illustrative 256 satellite kernel") {
  PsfGrid g = gaussian_psf({2.5, 2.5, 0.0}, 256);
  CHECK(g.values.sum() == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::Index mi, mj;
  g.values.maxCoeff(&mi, &mj);
  CHECK(mi == g.center - 1);
  CHECK(mj == g.center - 1);
  CHECK(g.values.minCoeff() >= 0.0);
}

TEST_CASE("gaussian_psf: N = 3 direct evaluation oracle") {
  PsfGrid g = gaussian_psf({1.0, 1.0, 0.0}, 3);
  Matrix direct(3, 3);
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      double d1 = i - 2, d2 = j - 2;
      direct(i - 1, j - 1) = std::exp(-0.5 * (d1 * d1 + d2 * d2));
    }
  direct /= direct.sum();
  CHECK((g.values - direct).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("gaussian_psf rejects constraint-violating parameters") {
  CHECK_THROWS_AS(gaussian_psf({1.0, 1.0, 1.0}, 8), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_psf({0.01, 1.0, 0.0}, 8), std::invalid_argument);
  CHECK(psf_params_valid({1.0, 1.0, 0.9}));
  CHECK_FALSE(psf_params_valid({1.0, 1.0, 1.0}));
}

TEST_CASE("blur with a delta PSF is the identity") {
  const int N = 8;
  PsfGrid g{delta_psf(N), (N + 2) / 2};
  BlurOperator op(g);
  Vector x = test::random_vector(N * N, 130);
  CHECK((op.apply(x) - x).norm() <= 1e-13 * x.norm());
}

TEST_CASE("unit-sum PSF and reflexive BC preserve constant images") {
  const int N = 12;
  BlurOperator op(gaussian_psf({2.0, 1.2, 0.7}, N));
  Vector c = Vector::Constant(N * N, 0.37);
  CHECK((op.apply(c) - c).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("FFT blur matches the naive double-loop oracle") {
  const int N = 8;
  PsfGrid g = gaussian_psf({1.2, 2.1, 0.8}, N);
  BlurOperator op(g);
  Matrix x(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      x(i, j) = test::random_vector(1, 131 + i * N + j)[0];
  Matrix fast = op.apply_image(x);
  Matrix slow = blur_naive(g, x);
  CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("interior impulse response is the centered PSF") {
  const int N = 16;
  PsfGrid g = gaussian_psf({1.0, 1.0, 0.0}, N);
  BlurOperator op(g);
  int pi = 8, pj = 8;  // 1-based interior pixel
  Matrix impulse = Matrix::Zero(N, N);
  impulse(pi - 1, pj - 1) = 1.0;
  Matrix out = op.apply_image(impulse);
  // out(i,j) = P(i - pi + chi, j - pj + chi); boundary folds only move
  // far-tail mass (< 1e-13 for this sigma), so the match is per-entry.
  const int chi = g.center;
  double worst = 0.0;
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N; ++j) {
      int s = i - pi + chi, t = j - pj + chi;
      if (s >= 1 && s <= N && t >= 1 && t <= N)
        worst = std::max(worst,
                         std::abs(out(i - 1, j - 1) - g.values(s - 1, t - 1)));
    }
  CHECK(worst <= 1e-12);
}

TEST_CASE("adjoint: doubly symmetric PSF gives a self-adjoint operator") {
  const int N = 9;
  BlurOperator op(gaussian_psf({1.3, 1.3, 0.0}, N));
  Vector x = test::random_vector(N * N, 132);
  CHECK((op.apply(x) - op.apply_adjoint(x)).norm() <= 1e-10 * x.norm());
}

TEST_CASE("adjoint passes the inner-product test for an anisotropic PSF") {
  const int N = 16;
  BlurOperator op(gaussian_psf({1.5, 2.5, 1.0}, N));
  auto rep = adjoint_check(op, 20, 1e-10);
  CHECK(rep.pass);
}

TEST_CASE("adjoint equals the dense transpose at N = 8") {
  const int N = 8;
  BlurOperator op(gaussian_psf({1.2, 2.0, 0.9}, N));
  Matrix dense = to_dense(op);
  Vector u = test::random_vector(N * N, 133);
  CHECK((op.apply_adjoint(u) - dense.transpose() * u).norm() <= 1e-10);
}

TEST_CASE("doubly symmetric PSF yields a symmetric dense matrix") {
  const int N = 8;
  // Narrow kernel: the even-N grid clips the unpaired tail below 1e-12.
  BlurOperator op(gaussian_psf({0.5, 0.5, 0.0}, N));
  Matrix dense = to_dense(op);
  CHECK((dense - dense.transpose()).norm() <= 1e-12);
}

TEST_CASE("blur duality: A(y)x equals A(X) applied to the PSF") {
  for (int N : {8, 9, 16}) {
    PsfGrid g = gaussian_psf({1.4, 2.2, 0.9}, N);
    BlurOperator op(g);
    Matrix x(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        x(i, j) = std::sin(0.3 * i) + std::cos(0.41 * j * i);
    Matrix via_blur = op.apply_image(x);
    Matrix via_dual = image_kernel_apply(x, g.values, g.center);
    CHECK((via_blur - via_dual).cwiseAbs().maxCoeff() <=
          1e-10 * x.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("psf_jacobian: isotropic transpose symmetry and zero sums") {
  const int N = 12;
  auto dp = psf_jacobian({1.7, 1.7, 0.0}, N);
  CHECK((dp[0] - dp[1].transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  for (int t = 0; t < 3; ++t) CHECK(std::abs(dp[t].sum()) <= 1e-10);
}

TEST_CASE("psf_jacobian matches central finite differences") {
  const int N = 16;
  PsfParams y{3.0, 4.0, 0.5};
  auto dp = psf_jacobian(y, N);
  double steps[3] = {1e-5 * y.sigma1, 1e-5 * y.sigma2, 1e-5 * y.rho};
  for (int t = 0; t < 3; ++t) {
    PsfParams yp = y, ym = y;
    double h = steps[t] != 0.0 ? steps[t] : 1e-5;
    (t == 0 ? yp.sigma1 : t == 1 ? yp.sigma2 : yp.rho) += h;
    (t == 0 ? ym.sigma1 : t == 1 ? ym.sigma2 : ym.rho) -= h;
    Matrix fd =
        (gaussian_psf(yp, N).values - gaussian_psf(ym, N).values) / (2 * h);
    CHECK((dp[t] - fd).norm() <= 1e-5 * fd.norm());
  }
}

TEST_CASE("jacobian_apply: zero image gives a zero Jacobian") {
  CHECK(jacobian_apply(Vector::Zero(64), {2.0, 2.0, 0.0}, 8).norm() == 0.0);
}

TEST_CASE("jacobian_apply matches a directional finite difference") {
  const int N = 16;
  PsfParams y{3.0, 4.0, 0.5};
  Vector z = test::random_vector(N * N, 134);
  Matrix jac = jacobian_apply(z, y, N);
  Vector delta(3);
  delta << 0.4, -0.3, 0.2;
  double h = 1e-5;
  PsfParams yp{y.sigma1 + h * delta[0], y.sigma2 + h * delta[1],
               y.rho + h * delta[2]};
  PsfParams ym{y.sigma1 - h * delta[0], y.sigma2 - h * delta[1],
               y.rho - h * delta[2]};
  BlurOperator opp(gaussian_psf(yp, N)), opm(gaussian_psf(ym, N));
  Vector fd = (opp.apply(z) - opm.apply(z)) / (2 * h);
  Vector jd = jac * delta;
  CHECK((fd - jd).norm() <= 1e-4 * jd.norm());
}

TEST_CASE("isotropic constrained Jacobian is the sum of the sigma columns") {
  const int N = 12;
  PsfParams y{2.2, 2.2, 0.0};
  Vector z = test::random_vector(N * N, 135);
  Matrix full = jacobian_apply(z, y, N, false);
  Matrix iso = jacobian_apply(z, y, N, true);
  CHECK((iso.col(0) - (full.col(0) + full.col(1))).norm() <= 1e-10);
}

TEST_CASE("dct_spectrum: delta PSF has all eigenvalues equal to one") {
  const int N = 8;
  PsfGrid g{delta_psf(N), (N + 2) / 2};
  DctSpectrum s = dct_spectrum(g, false);
  CHECK((s.eigenvalues.array() - 1.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("dct_spectrum diagonalizes doubly symmetric blurs") {
  const int N = 9;  // odd grid keeps the sampled Gaussian exactly symmetric
  PsfGrid g = gaussian_psf({1.8, 1.8, 0.0}, N);
  BlurOperator op(g);
  DctSpectrum s = dct_spectrum(g, false);
  for (unsigned seed : {136u, 137u}) {
    Vector x = test::random_vector(N * N, seed);
    CHECK((op.apply(x) - apply_spectrum(s, x)).norm() <= 1e-8 * x.norm());
  }
  CHECK(s.max_abs() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("dct_spectrum on an even grid needs a clipped kernel") {
  const int N = 8;
  PsfGrid g = gaussian_psf({0.5, 0.5, 0.0}, N);
  BlurOperator op(g);
  DctSpectrum s = dct_spectrum(g, false);
  Vector x = test::random_vector(N * N, 138);
  CHECK((op.apply(x) - apply_spectrum(s, x)).norm() <= 1e-8 * x.norm());
}

TEST_CASE("symmetric-approx spectrum equals diag(C Asym C^T) densely") {
  const int N = 8;
  PsfGrid g = gaussian_psf({1.3, 2.1, 0.8}, N);
  BlurOperator op(g);
  DctSpectrum s = dct_spectrum(g, true);
  // dense oracle: diagonal entries c_l^T A c_l
  Matrix dense = to_dense(op);
  Eigen::Map<const Matrix> lam(s.eigenvalues.data(), N, N);
  for (int l1 = 0; l1 < N; ++l1)
    for (int l2 = 0; l2 < N; ++l2) {
      Matrix e = Matrix::Zero(N, N);
      e(l1, l2) = 1.0;
      Matrix basis_img = idct2_ortho(e);
      Eigen::Map<Vector> c(basis_img.data(), N * N);
      double direct = c.dot(dense * c);
      CHECK(lam(l1, l2) == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("dct round trip is orthonormal") {
  Matrix x = test::random_matrix(7, 7, 139);
  Matrix rec = idct2_ortho(dct2_ortho(x));
  CHECK((rec - x).cwiseAbs().maxCoeff() <= 1e-12);
  // Parseval
  CHECK(dct2_ortho(x).norm() == doctest::Approx(x.norm()).epsilon(1e-12));
}

TEST_CASE("error_norm_estimate: identical parameters give zero") {
  CHECK(error_norm_estimate({2.5, 2.5, 0.0}, {2.5, 2.5, 0.0}, 16, false) ==
        0.0);
}

TEST_CASE("error_norm_estimate matches power iteration for symmetric pairs") {
  const int N = 17;  // odd: the DCT diagonalization is exact
  PsfParams ya{2.5, 2.5, 0.0}, yb{3.0, 3.0, 0.0};
  double est = error_norm_estimate(ya, yb, N, false);

  struct Diff : LinearOperator {
    BlurOperator a, b;
    Diff(int n, PsfParams pa, PsfParams pb)
        : a(gaussian_psf(pa, n)), b(gaussian_psf(pb, n)) {}
    Eigen::Index rows() const override { return a.rows(); }
    Eigen::Index cols() const override { return a.cols(); }
    Vector apply_impl(const Vector& x) const override {
      return a.apply(x) - b.apply(x);
    }
    Vector apply_adjoint_impl(const Vector& u) const override {
      return a.apply_adjoint(u) - b.apply_adjoint(u);
    }
  } diff(N, ya, yb);
  double truth = opnorm_estimate(diff, 300);
  CHECK(std::abs(est - truth) <= 1e-6);
}

TEST_CASE("symmetric-approx estimate is within a factor two for mild anisotropy") {
  const int N = 16;
  PsfParams ya{2.0, 2.8, 0.6}, yb{2.6, 2.2, 0.4};
  double est = error_norm_estimate(ya, yb, N, true);
  struct Diff : LinearOperator {
    BlurOperator a, b;
    Diff(int n, PsfParams pa, PsfParams pb)
        : a(gaussian_psf(pa, n)), b(gaussian_psf(pb, n)) {}
    Eigen::Index rows() const override { return a.rows(); }
    Eigen::Index cols() const override { return a.cols(); }
    Vector apply_impl(const Vector& x) const override {
      return a.apply(x) - b.apply(x);
    }
    Vector apply_adjoint_impl(const Vector& u) const override {
      return a.apply_adjoint(u) - b.apply_adjoint(u);
    }
  } diff(N, ya, yb);
  double truth = opnorm_estimate(diff, 60);
  CHECK(est <= 2.0 * truth);
  CHECK(est >= 0.5 * truth);
}

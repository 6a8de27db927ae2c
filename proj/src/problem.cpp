#include "ikr/problem.hpp"

#include "ikr/image_io.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ikr {

namespace {

// Box-Muller over mt19937_64 draws: identical streams on every platform.
class GaussianStream {
public:
  explicit GaussianStream(unsigned seed) : gen_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

private:
  double uniform() {
    return (gen_() >> 11) * (1.0 / 9007199254740992.0);  // 53-bit mantissa
  }
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

void stamp_gaussian(Matrix& x, double ci, double cj, double amp,
                    double spread) {
  const int N = static_cast<int>(x.rows());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double r2 = (i - ci) * (i - ci) + (j - cj) * (j - cj);
      x(i, j) = std::max(x(i, j), amp * std::exp(-r2 / (2.0 * spread * spread)));
    }
}

}  // namespace

Matrix bundled_starfield(int N, unsigned seed) {
  std::mt19937_64 gen(seed);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * ((gen() >> 11) * (1.0 / 9007199254740992.0));
  };
  Matrix x = Matrix::Zero(N, N);
  const int nstars = std::max(8, (N * N) / 164);  // 24 at N = 64
  for (int s = 0; s < nstars; ++s) {
    double ci = uniform(4.0, N - 4.0);
    double cj = uniform(4.0, N - 4.0);
    double amp = uniform(0.5, 1.0);
    double spread = uniform(2.2, 4.0);
    stamp_gaussian(x, ci, cj, amp, spread);
  }
  // Bright cross-shaped "satellite" with a compact body, softened so its
  // energy stays in recoverable scales.
  Matrix body = Matrix::Zero(N, N);
  int c = N / 2, arm = std::max(3, N / 5), half = std::max(1, N / 32);
  int bodyr = std::max(2, N / 13);
  for (int i = c - half; i <= c + half; ++i)
    for (int j = c - arm; j <= c + arm; ++j) body(i, j) = 0.9;
  for (int i = c - arm; i <= c + arm; ++i)
    for (int j = c - half; j <= c + half; ++j)
      body(i, j) = std::max(body(i, j), 0.85);
  for (int i = c - bodyr; i <= c + bodyr; ++i)
    for (int j = c - bodyr; j <= c + bodyr; ++j) body(i, j) = 1.0;
  BlurOperator soften(gaussian_psf({2.0, 2.0, 0.0}, N));
  body = soften.apply_image(body);
  x = x.cwiseMax(1.25 * body);
  double peak = x.maxCoeff();
  if (peak > 0.0) x /= peak;
  return x.cwiseMin(1.0).cwiseMax(0.0);
}

Matrix bundled_phantom(int N, unsigned seed) {
  std::mt19937_64 gen(seed);
  Matrix x = Matrix::Constant(N, N, 0.08);
  double c1 = 0.38 * N, c2 = 0.44 * N, r = 0.22 * N;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if ((i - c1) * (i - c1) + (j - c2) * (j - c2) < r * r) x(i, j) = 0.72;
  int a0 = static_cast<int>(0.62 * N), a1 = static_cast<int>(0.88 * N);
  int b0 = static_cast<int>(0.55 * N), b1 = static_cast<int>(0.92 * N);
  for (int i = a0; i < a1; ++i)
    for (int j = b0; j < b1; ++j) x(i, j) = 0.45;
  int s0 = static_cast<int>(0.12 * N), s1 = static_cast<int>(0.26 * N);
  int t0 = static_cast<int>(0.66 * N), t1 = static_cast<int>(0.80 * N);
  for (int i = s0; i < s1; ++i)
    for (int j = t0; j < t1; ++j) x(i, j) = 0.95;
  // One soft diagonal stripe for oriented detail.
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (std::abs(i - j) < std::max(1, N / 32) && i > 0.68 * N)
        x(i, j) = 0.9;
  BlurOperator soften(gaussian_psf({1.0, 1.0, 0.0}, N));
  x = soften.apply_image(x);
  static_cast<void>(gen);
  double peak = x.maxCoeff();
  if (peak > 0.0) x /= peak;
  return x.cwiseMin(1.0).cwiseMax(0.0);
}

GeneratedProblem generate_problem(const ProblemSpec& spec) {
  if (spec.N < 8) throw std::invalid_argument("generate_problem: N >= 8");
  if (spec.noise_level < 0.0)
    throw std::invalid_argument("generate_problem: noise_level >= 0");
  if (!psf_params_valid(spec.y_true))
    throw std::invalid_argument("generate_problem: invalid y_true");

  Matrix xt;
  switch (spec.source) {
    case ImageSource::bundled_starfield:
      xt = bundled_starfield(spec.N, spec.seed);
      break;
    case ImageSource::bundled_phantom:
      xt = bundled_phantom(spec.N, spec.seed);
      break;
    case ImageSource::file: {
      xt = read_pgm(spec.path);
      if (xt.rows() != spec.N || xt.cols() != spec.N)
        throw std::invalid_argument(
            "generate_problem: image size does not match N");
      break;
    }
  }

  GeneratedProblem out;
  out.N = spec.N;
  out.y_true = spec.y_true;
  out.x_true = Eigen::Map<Vector>(xt.data(), xt.size());

  BlurOperator op(gaussian_psf(spec.y_true, spec.N));
  out.b_true = op.apply(out.x_true);

  out.e = Vector::Zero(out.b_true.size());
  if (spec.noise_level > 0.0) {
    GaussianStream noise(spec.seed ^ 0x9e3779b9u);
    for (Eigen::Index i = 0; i < out.e.size(); ++i) out.e[i] = noise.next();
    double target = spec.noise_level * out.b_true.norm();
    double nrm = out.e.norm();
    if (nrm > 0.0) out.e *= target / nrm;
  }
  out.b = out.b_true + out.e;
  return out;
}

double rre(const Vector& x, const Vector& x_true) {
  double denom = x_true.norm();
  if (denom == 0.0) throw std::invalid_argument("rre: zero ground truth");
  return (x - x_true).norm() / denom;
}

DeblurProblem to_deblur_problem(const GeneratedProblem& gen) {
  DeblurProblem p;
  p.N = gen.N;
  p.b = gen.b;
  p.x_true = gen.x_true;
  p.y_true = gen.y_true;
  p.have_truth = true;
  return p;
}

}  // namespace ikr

#include "ikr/ikrylov.h"

#include <doctest.h>

#include <cstring>
#include <vector>

TEST_CASE("C API: problem lifecycle and data access") {
  ikr_problem_spec spec{};
  spec.source = IKR_IMG_STARFIELD;
  spec.n = 32;
  spec.sigma1 = 2.0;
  spec.sigma2 = 2.0;
  spec.rho = 0.0;
  spec.noise_level = 1e-2;
  spec.seed = 7;

  ikr_problem* p = nullptr;
  REQUIRE(ikr_problem_create(&spec, &p) == IKR_OK);
  int n = 0;
  CHECK(ikr_problem_size(p, &n) == IKR_OK);
  CHECK(n == 32);

  std::vector<double> b(1024), xt(1024);
  CHECK(ikr_problem_image(p, IKR_DATA_B, b.data(), b.size()) == IKR_OK);
  CHECK(ikr_problem_image(p, IKR_DATA_X_TRUE, xt.data(), xt.size()) == IKR_OK);
  double bmax = 0;
  for (double v : b) bmax = std::max(bmax, v);
  CHECK(bmax > 0.1);

  // too-small buffer is rejected with a message
  std::vector<double> tiny(8);
  CHECK(ikr_problem_image(p, IKR_DATA_B, tiny.data(), tiny.size()) ==
        IKR_ERR_BOUNDS);
  CHECK(std::strlen(ikr_last_error()) > 0);

  ikr_problem_destroy(p);
}

TEST_CASE("C API: invalid spec is rejected") {
  ikr_problem_spec spec{};
  spec.source = IKR_IMG_STARFIELD;
  spec.n = 2;  // below the minimum
  spec.sigma1 = spec.sigma2 = 2.0;
  ikr_problem* p = nullptr;
  CHECK(ikr_problem_create(&spec, &p) == IKR_ERR_INVALID);
  CHECK(ikr_problem_create(nullptr, &p) == IKR_ERR_INVALID);
}

TEST_CASE("C API: linear solve produces a monotone-residual history") {
  ikr_problem_spec spec{};
  spec.source = IKR_IMG_PHANTOM;
  spec.n = 24;
  spec.sigma1 = spec.sigma2 = 1.5;
  spec.noise_level = 1e-2;
  spec.seed = 11;
  ikr_problem* p = nullptr;
  REQUIRE(ikr_problem_create(&spec, &p) == IKR_OK);

  ikr_solve_opts o;
  ikr_solve_opts_defaults(&o);
  o.method = IKR_METHOD_LSQR;
  o.iterations = 10;
  ikr_run* run = nullptr;
  REQUIRE(ikr_solve_linear(p, &o, &run) == IKR_OK);
  size_t len = ikr_run_length(run);
  CHECK(len == 10);
  double prev = 1e300;
  for (size_t i = 0; i < len; ++i) {
    ikr_record rec{};
    REQUIRE(ikr_run_record(run, i, &rec) == IKR_OK);
    CHECK(rec.inexact_residual_norm <= prev * (1 + 1e-12));
    prev = rec.inexact_residual_norm;
    CHECK(rec.total_iter == int(i) + 1);
  }
  ikr_record oob{};
  CHECK(ikr_run_record(run, len, &oob) == IKR_ERR_BOUNDS);

  std::vector<double> x(576);
  CHECK(ikr_run_solution(run, x.data(), x.size()) == IKR_OK);
  ikr_run_destroy(run);
  ikr_problem_destroy(p);
}

TEST_CASE("C API: deblur smoke through the shared surface") {
  ikr_problem_spec spec{};
  spec.source = IKR_IMG_STARFIELD;
  spec.n = 32;
  spec.sigma1 = spec.sigma2 = 2.0;
  spec.noise_level = 1e-2;
  spec.seed = 5;
  ikr_problem* p = nullptr;
  REQUIRE(ikr_problem_create(&spec, &p) == IKR_OK);

  ikr_deblur_opts o;
  ikr_deblur_opts_defaults(&o);
  o.sigma1_0 = o.sigma2_0 = 4.0;
  o.isotropic = 1;
  o.max_outer = 40;
  ikr_run* run = nullptr;
  REQUIRE(ikr_deblur(p, &o, 1, &run) == IKR_OK);
  CHECK(ikr_run_length(run) >= 3);
  double s1 = 0, s2 = 0, rho = 1;
  CHECK(ikr_run_params(run, &s1, &s2, &rho) == IKR_OK);
  CHECK(s1 == s2);
  CHECK(rho == 0.0);
  char reason[32];
  CHECK(ikr_run_stop_reason(run, reason, sizeof(reason)) == IKR_OK);
  CHECK(std::strlen(reason) > 0);
  ikr_run_destroy(run);
  ikr_problem_destroy(p);
}

TEST_CASE("C API: psf image helper") {
  std::vector<double> psf(64 * 64);
  REQUIRE(ikr_psf_image(2.5, 2.5, 0.0, 64, psf.data(), psf.size()) == IKR_OK);
  double sum = 0;
  for (double v : psf) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ikr_psf_image(1.0, 1.0, 2.0, 8, psf.data(), psf.size()) ==
        IKR_ERR_INVALID);
}

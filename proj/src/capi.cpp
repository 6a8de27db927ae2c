#include "ikr/ikrylov.h"

#include "ikr/gk.hpp"
#include "ikr/igk.hpp"
#include "ikr/image_io.hpp"
#include "ikr/problem.hpp"
#include "ikr/varpro.hpp"

#include <cstdio>
#include <cstring>
#include <limits>
#include <string>

namespace {

thread_local std::string g_last_error;

int fail(int code, const char* what) {
  g_last_error = what;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    return fail(IKR_ERR_INVALID, e.what());
  } catch (const std::exception& e) {
    return fail(IKR_ERR_RUNTIME, e.what());
  }
}

}  // namespace

struct ikr_problem {
  ikr::GeneratedProblem gen;
};

struct ikr_run {
  ikr::SolveHistory history;
  ikr::Vector x;
  ikr::PsfParams y;
  int restarts = 0;
};

extern "C" {

const char* ikr_last_error(void) { return g_last_error.c_str(); }

int ikr_problem_create(const ikr_problem_spec* spec, ikr_problem** out) {
  if (!spec || !out) return fail(IKR_ERR_INVALID, "null argument");
  return guarded([&] {
    ikr::ProblemSpec s;
    switch (spec->source) {
      case IKR_IMG_STARFIELD:
        s.source = ikr::ImageSource::bundled_starfield;
        break;
      case IKR_IMG_PHANTOM:
        s.source = ikr::ImageSource::bundled_phantom;
        break;
      case IKR_IMG_FILE:
        s.source = ikr::ImageSource::file;
        s.path = spec->path ? spec->path : "";
        break;
      default:
        return fail(IKR_ERR_INVALID, "unknown image source");
    }
    s.N = spec->n;
    s.y_true = {spec->sigma1, spec->sigma2, spec->rho};
    s.noise_level = spec->noise_level;
    s.seed = spec->seed;
    auto* p = new ikr_problem{ikr::generate_problem(s)};
    *out = p;
    return int(IKR_OK);
  });
}

void ikr_problem_destroy(ikr_problem* p) { delete p; }

int ikr_problem_size(const ikr_problem* p, int* n_side) {
  if (!p || !n_side) return fail(IKR_ERR_INVALID, "null argument");
  *n_side = p->gen.N;
  return IKR_OK;
}

int ikr_problem_image(const ikr_problem* p, int kind, double* buf,
                      size_t len) {
  if (!p || !buf) return fail(IKR_ERR_INVALID, "null argument");
  return guarded([&] {
    const ikr::Vector* src = nullptr;
    ikr::Vector psf;
    switch (kind) {
      case IKR_DATA_B: src = &p->gen.b; break;
      case IKR_DATA_B_TRUE: src = &p->gen.b_true; break;
      case IKR_DATA_X_TRUE: src = &p->gen.x_true; break;
      case IKR_DATA_NOISE: src = &p->gen.e; break;
      case IKR_DATA_PSF_TRUE: {
        ikr::PsfGrid g = ikr::gaussian_psf(p->gen.y_true, p->gen.N);
        psf = Eigen::Map<ikr::Vector>(g.values.data(), g.values.size());
        src = &psf;
        break;
      }
      default:
        return fail(IKR_ERR_INVALID, "unknown image kind");
    }
    if (len < static_cast<size_t>(src->size()))
      return fail(IKR_ERR_BOUNDS, "buffer too small");
    std::memcpy(buf, src->data(), sizeof(double) * src->size());
    return int(IKR_OK);
  });
}

void ikr_solve_opts_defaults(ikr_solve_opts* o) {
  if (!o) return;
  o->method = IKR_METHOD_HYBRID_ILSQR;
  o->iterations = 30;
  o->lambda = 0.5;
  o->lambda_policy = IKR_LAMBDA_FIXED;
  o->tau = 1.01;
  o->omega = 1.0;
}

void ikr_deblur_opts_defaults(ikr_deblur_opts* o) {
  if (!o) return;
  o->sigma1_0 = 7.0;
  o->sigma2_0 = 7.0;
  o->rho_0 = 0.0;
  o->isotropic = 1;
  o->lambda = 0.5;
  o->lambda_policy = IKR_LAMBDA_FIXED;
  o->tau = 1.01;
  o->omega = 1.0;
  o->epsilon = 1.0;
  o->bound = 0;
  o->max_inner = 50;
  o->max_outer = 500;
  o->theta1 = 1e-3;
  o->theta2 = 1e-3;
  o->theta3 = 1e-3;
  o->grad_tol = 1e-8;
}

namespace {

ikr::LambdaPolicy make_policy(int kind, double lambda, double tau,
                              double omega, double noise_norm) {
  ikr::LambdaPolicy pol;
  switch (kind) {
    case IKR_LAMBDA_DISCREPANCY:
      pol.kind = ikr::LambdaKind::discrepancy;
      break;
    case IKR_LAMBDA_WGCV:
      pol.kind = ikr::LambdaKind::wgcv;
      break;
    default:
      pol.kind = ikr::LambdaKind::fixed;
  }
  pol.fixed_value = lambda;
  pol.tau = tau;
  pol.omega = omega;
  pol.noise_norm = noise_norm;
  return pol;
}

}  // namespace

int ikr_solve_linear(const ikr_problem* p, const ikr_solve_opts* o,
                     ikr_run** out) {
  if (!p || !o || !out) return fail(IKR_ERR_INVALID, "null argument");
  return guarded([&] {
    const ikr::GeneratedProblem& gen = p->gen;
    ikr::BlurOperator op(ikr::gaussian_psf(gen.y_true, gen.N));
    ikr::LambdaPolicy policy = make_policy(o->lambda_policy, o->lambda, o->tau,
                                           o->omega, gen.e.norm());
    auto* run = new ikr_run;
    run->y = gen.y_true;
    const int iters = o->iterations > 0 ? o->iterations : 30;
    const bool inexact_family = o->method >= IKR_METHOD_ILSQR;
    double lambda = o->lambda;

    if (!inexact_family) {
      ikr::GkOptions gopts;
      gopts.op_norm = 1.0;
      ikr::GkFactorization f = ikr::gk_init(op, gen.b, gopts);
      for (int k = 1; k <= iters && !f.breakdown; ++k) {
        ikr::gk_step(f, op);
        ikr::Vector s;
        if (o->method == IKR_METHOD_LSQR) {
          auto sol = ikr::lsqr_solve(f);
          s = sol.s;
        } else if (o->method == IKR_METHOD_CGLS) {
          s = ikr::cgls_solve(f);
        } else {
          if (policy.kind == ikr::LambdaKind::discrepancy)
            lambda = ikr::discrepancy_lambda(f.bbar(), f.beta0, policy).lambda;
          else if (policy.kind == ikr::LambdaKind::wgcv)
            lambda = ikr::wgcv_lambda(f.bbar(), f.beta0, policy).lambda;
          s = ikr::hybrid_solve(f, lambda);
        }
        run->x = ikr::assemble_solution(f, ikr::Vector::Zero(gen.b.size()), s);
        ikr::IterationRecord rec;
        rec.total_iter = k;
        rec.inner_iter = k;
        rec.outer_iter = 1;
        rec.lambda = o->method == IKR_METHOD_HYBRID ? lambda : 0.0;
        rec.inexact_residual_norm =
            (f.bbar() * s - ikr::Vector::Unit(f.k + 1, 0) * f.beta0).norm();
        rec.rre_x = ikr::rre(run->x, gen.x_true);
        rec.sigma1 = gen.y_true.sigma1;
        rec.sigma2 = gen.y_true.sigma2;
        rec.rho = gen.y_true.rho;
        run->history.records.push_back(rec);
      }
    } else {
      ikr::IgkOptions iopts;
      iopts.op_norm = 1.0;
      ikr::ErrorSequence errs;  // zero errors
      ikr::IgkFactorization f = ikr::igk_init(op, errs, gen.b, iopts);
      for (int k = 1; k <= iters && !f.breakdown; ++k) {
        ikr::igk_step(f, op, errs);
        ikr::Vector s;
        ikr::Matrix M = f.M.topLeftCorner(f.k + 1, f.k);
        if (o->method == IKR_METHOD_ILSQR) {
          s = ikr::ilsqr_solve(f).s;
        } else if (o->method == IKR_METHOD_ICGLS) {
          s = ikr::icgls_solve(f);
        } else {
          if (policy.kind == ikr::LambdaKind::discrepancy)
            lambda = ikr::discrepancy_lambda(M, f.beta0, policy).lambda;
          else if (policy.kind == ikr::LambdaKind::wgcv)
            lambda = ikr::wgcv_lambda(M, f.beta0, policy).lambda;
          s = o->method == IKR_METHOD_HYBRID_ILSQR
                  ? ikr::hybrid_ilsqr_solve(f, lambda)
                  : ikr::hybrid_icgls_solve(f, lambda);
        }
        run->x = ikr::assemble_solution(f, ikr::Vector::Zero(gen.b.size()), s);
        ikr::IterationRecord rec;
        rec.total_iter = k;
        rec.inner_iter = k;
        rec.outer_iter = 1;
        rec.lambda = o->method >= IKR_METHOD_HYBRID_ILSQR ? lambda : 0.0;
        rec.inexact_residual_norm =
            (M * s - ikr::Vector::Unit(f.k + 1, 0) * f.beta0).norm();
        rec.rre_x = ikr::rre(run->x, gen.x_true);
        rec.sigma1 = gen.y_true.sigma1;
        rec.sigma2 = gen.y_true.sigma2;
        rec.rho = gen.y_true.rho;
        run->history.records.push_back(rec);
      }
    }
    run->history.stop_reason = "iterations";
    *out = run;
    return int(IKR_OK);
  });
}

int ikr_deblur(const ikr_problem* p, const ikr_deblur_opts* o, int inexact,
               ikr_run** out) {
  if (!p || !o || !out) return fail(IKR_ERR_INVALID, "null argument");
  return guarded([&] {
    ikr::DeblurProblem prob = ikr::to_deblur_problem(p->gen);
    ikr::DeblurOptions opts;
    opts.y0 = {o->sigma1_0, o->sigma2_0, o->rho_0};
    opts.isotropic = o->isotropic != 0;
    opts.lambda_policy = make_policy(o->lambda_policy, o->lambda, o->tau,
                                     o->omega, p->gen.e.norm());
    opts.stopping.theta1 = o->theta1;
    opts.stopping.theta2 = o->theta2;
    opts.stopping.theta3 = o->theta3;
    opts.stopping.grad_tol = o->grad_tol;
    opts.stopping.max_inner = o->max_inner;
    opts.stopping.max_outer = o->max_outer;
    opts.epsilon =
        o->epsilon > 0 ? o->epsilon : std::numeric_limits<double>::infinity();
    opts.active_bound = o->bound == 1 ? ikr::ControlBound::per_iteration_caps
                                      : ikr::ControlBound::accumulated_gap;
    opts.symmetric_approx_spectra = !opts.isotropic;

    ikr::DeblurResult res = inexact ? ikr::run_algorithm2(prob, opts)
                                    : ikr::run_algorithm1(prob, opts);
    auto* run = new ikr_run;
    run->history = std::move(res.history);
    run->x = std::move(res.x);
    run->y = res.y;
    run->restarts = run->history.restart_count;
    *out = run;
    return int(IKR_OK);
  });
}

void ikr_run_destroy(ikr_run* r) { delete r; }

size_t ikr_run_length(const ikr_run* r) {
  return r ? r->history.records.size() : 0;
}

int ikr_run_record(const ikr_run* r, size_t index, ikr_record* out) {
  if (!r || !out) return fail(IKR_ERR_INVALID, "null argument");
  if (index >= r->history.records.size())
    return fail(IKR_ERR_BOUNDS, "record index out of range");
  const ikr::IterationRecord& rec = r->history.records[index];
  out->total_iter = rec.total_iter;
  out->outer_iter = rec.outer_iter;
  out->inner_iter = rec.inner_iter;
  out->lambda = rec.lambda;
  out->inexact_residual_norm = rec.inexact_residual_norm;
  out->gap_bound = rec.gap_bound;
  out->accumulated_budget = rec.accumulated_budget;
  out->rre_x = rec.rre_x;
  out->rre_y = rec.rre_y;
  out->sigma1 = rec.sigma1;
  out->sigma2 = rec.sigma2;
  out->rho = rec.rho;
  out->gamma = rec.gamma;
  out->restarted = rec.restarted ? 1 : 0;
  out->objective_exact = rec.objective_exact;
  out->objective_inexact = rec.objective_inexact;
  out->x_rel_change = rec.x_rel_change;
  return IKR_OK;
}

int ikr_run_solution(const ikr_run* r, double* buf, size_t len) {
  if (!r || !buf) return fail(IKR_ERR_INVALID, "null argument");
  if (len < static_cast<size_t>(r->x.size()))
    return fail(IKR_ERR_BOUNDS, "buffer too small");
  std::memcpy(buf, r->x.data(), sizeof(double) * r->x.size());
  return IKR_OK;
}

int ikr_run_params(const ikr_run* r, double* sigma1, double* sigma2,
                   double* rho) {
  if (!r) return fail(IKR_ERR_INVALID, "null argument");
  if (sigma1) *sigma1 = r->y.sigma1;
  if (sigma2) *sigma2 = r->y.sigma2;
  if (rho) *rho = r->y.rho;
  return IKR_OK;
}

int ikr_run_restarts(const ikr_run* r, int* restarts) {
  if (!r || !restarts) return fail(IKR_ERR_INVALID, "null argument");
  *restarts = r->restarts;
  return IKR_OK;
}

int ikr_run_stop_reason(const ikr_run* r, char* buf, size_t len) {
  if (!r || !buf || len == 0) return fail(IKR_ERR_INVALID, "null argument");
  std::snprintf(buf, len, "%s", r->history.stop_reason.c_str());
  return IKR_OK;
}

int ikr_run_write_csv(const ikr_run* r, const char* path) {
  if (!r || !path) return fail(IKR_ERR_INVALID, "null argument");
  return guarded([&] {
    ikr::write_history_csv(path, r->history);
    return int(IKR_OK);
  });
}

int ikr_write_image_pgm(const char* path, const double* buf, int n) {
  if (!path || !buf || n <= 0) return fail(IKR_ERR_INVALID, "null argument");
  return guarded([&] {
    Eigen::Map<const ikr::Matrix> img(buf, n, n);
    ikr::write_pgm(path, img);
    return int(IKR_OK);
  });
}

int ikr_write_image_png(const char* path, const double* buf, int n) {
  if (!path || !buf || n <= 0) return fail(IKR_ERR_INVALID, "null argument");
  return guarded([&] {
    Eigen::Map<const ikr::Matrix> img(buf, n, n);
    ikr::write_png(path, img);
    return int(IKR_OK);
  });
}

int ikr_psf_image(double sigma1, double sigma2, double rho, int n, double* buf,
                  size_t len) {
  if (!buf) return fail(IKR_ERR_INVALID, "null argument");
  return guarded([&] {
    ikr::PsfGrid g = ikr::gaussian_psf({sigma1, sigma2, rho}, n);
    if (len < static_cast<size_t>(g.values.size()))
      return fail(IKR_ERR_BOUNDS, "buffer too small");
    std::memcpy(buf, g.values.data(), sizeof(double) * g.values.size());
    return int(IKR_OK);
  });
}

}  // extern "C"

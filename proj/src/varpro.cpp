#include "ikr/varpro.hpp"

#include "ikr/gk.hpp"
#include "ikr/igk.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

namespace ikr {

namespace {

struct BlurCache {
  int N;
  bool symmetric_approx;
  std::map<std::array<double, 3>, std::shared_ptr<const BlurOperator>> ops;
  std::map<std::array<double, 3>, DctSpectrum> spectra;

  static std::array<double, 3> key(const PsfParams& y) {
    return {y.sigma1, y.sigma2, y.rho};
  }

  const BlurOperator& op(const PsfParams& y) {
    auto k = key(y);
    auto it = ops.find(k);
    if (it == ops.end())
      it = ops.emplace(k, std::make_shared<BlurOperator>(gaussian_psf(y, N)))
               .first;
    return *it->second;
  }

  const DctSpectrum& spectrum(const PsfParams& y) {
    auto k = key(y);
    auto it = spectra.find(k);
    if (it == spectra.end())
      it = spectra.emplace(k, dct_spectrum(gaussian_psf(y, N), symmetric_approx))
               .first;
    return it->second;
  }
};

double rre(const Vector& x, const Vector& x_true) {
  double denom = x_true.norm();
  return denom > 0.0 ? (x - x_true).norm() / denom : 0.0;
}

double rre_params(const PsfParams& y, const PsfParams& yt) {
  Eigen::Vector3d a(y.sigma1, y.sigma2, y.rho);
  Eigen::Vector3d t(yt.sigma1, yt.sigma2, yt.rho);
  double denom = t.norm();
  return denom > 0.0 ? (a - t).norm() / denom : 0.0;
}

double pick_lambda(const Matrix& M, double beta, const LambdaPolicy& policy,
                   double previous) {
  switch (policy.kind) {
    case LambdaKind::fixed:
      return policy.fixed_value;
    case LambdaKind::discrepancy: {
      LambdaResult r = discrepancy_lambda(M, beta, policy);
      if (r.status == LambdaStatus::unbracketable) return previous;
      return r.lambda;
    }
    case LambdaKind::wgcv:
      return wgcv_lambda(M, beta, policy).lambda;
  }
  return previous;
}

// Gradient of g with respect to y at fixed z: 2 jac^T (A(y) z - r0).
double gradient_norm(const Matrix& jac, const Vector& misfit) {
  return 2.0 * (jac.transpose() * misfit).norm();
}

}  // namespace

double evaluate_objective(const Vector& z, const PsfParams& y, double lambda,
                          const Vector& r0, int N) {
  if (!psf_params_valid(y))
    throw std::invalid_argument("evaluate_objective: invalid parameters");
  BlurOperator op(gaussian_psf(y, N));
  double misfit = (op.apply(z) - r0).squaredNorm();
  return misfit + lambda * lambda * z.squaredNorm();
}

GnDirection gauss_newton_direction(const Vector& residual, const Matrix& jac) {
  GnDirection out;
  Eigen::ColPivHouseholderQR<Matrix> qr(jac);
  qr.setThreshold(1e-12);
  if (qr.rank() < jac.cols()) {
    out.d = Vector::Zero(jac.cols());
    out.rank_deficient = true;
    return out;
  }
  out.d = qr.solve(residual);
  return out;
}

PsfParams apply_step(const PsfParams& y, const Vector& d, double gamma,
                     bool isotropic) {
  PsfParams out = y;
  if (isotropic) {
    out.sigma1 += gamma * d[0];
    out.sigma2 = out.sigma1;
    out.rho = 0.0;
  } else {
    out.sigma1 += gamma * d[0];
    out.sigma2 += gamma * d[1];
    out.rho += gamma * d[2];
  }
  return out;
}

double line_search_gamma(const PsfParams& y, const Vector& d,
                         const Vector& z_fixed, double lambda,
                         const Vector& r0, int N, bool isotropic,
                         double relcap) {
  double dnorm = d.norm();
  if (dnorm == 0.0) return 0.0;

  // Largest feasible gamma in (0, 2]: the valid set along the ray is an
  // interval containing 0.
  double feas = 2.0;
  if (!psf_params_valid(apply_step(y, d, feas, isotropic))) {
    double lo = 0.0, hi = feas;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      if (psf_params_valid(apply_step(y, d, mid, isotropic)))
        lo = mid;
      else
        hi = mid;
    }
    feas = lo;
  }
  Eigen::Vector3d yv(y.sigma1, y.sigma2, y.rho);
  double ub = std::min({2.0, 0.999 * feas, relcap * yv.norm() / dnorm});
  if (ub <= 0.0) return 0.0;

  auto objective = [&](double gamma) {
    PsfParams yt = apply_step(y, d, gamma, isotropic);
    if (!psf_params_valid(yt)) return std::numeric_limits<double>::infinity();
    return evaluate_objective(z_fixed, yt, lambda, r0, N);
  };

  const double f0 = objective(0.0);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = ub;
  double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
  double f1 = objective(c1), f2 = objective(c2);
  for (int it = 0; it < 21; ++it) {
    if (f1 <= f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - phi * (b - a);
      f1 = objective(c1);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + phi * (b - a);
      f2 = objective(c2);
    }
  }
  double best = 0.5 * (a + b);
  return objective(best) < f0 ? best : 0.0;
}

namespace {

struct GnOutcome {
  PsfParams y_new;
  double gamma = 0.0;
  double grad_norm = 0.0;
};

// One Gauss-Newton parameter update evaluated at the full reconstruction:
// residual b - A(y) x, Jacobian of A(y)x in y, step-length search on the
// fixed-x objective.
GnOutcome gauss_newton_update(BlurCache& cache, const Vector& b,
                              const PsfParams& y, const Vector& x,
                              double lambda, const DeblurOptions& opts) {
  GnOutcome out;
  out.y_new = y;
  Vector misfit = cache.op(y).apply(x) - b;
  Matrix jac = jacobian_apply(x, y, cache.N, opts.isotropic);
  out.grad_norm = gradient_norm(jac, misfit);
  if (!opts.gauss_newton) return out;
  GnDirection dir = gauss_newton_direction(-misfit, jac);
  if (dir.rank_deficient) return out;
  out.gamma = line_search_gamma(y, dir.d, x, lambda, b, cache.N,
                                opts.isotropic, opts.step_relcap);
  if (out.gamma > 0.0)
    out.y_new = apply_step(y, dir.d, out.gamma, opts.isotropic);
  return out;
}

IterationRecord make_record(const DeblurProblem& problem, const Vector& x,
                            const PsfParams& y, double lambda) {
  IterationRecord rec;
  rec.lambda = lambda;
  rec.sigma1 = y.sigma1;
  rec.sigma2 = y.sigma2;
  rec.rho = y.rho;
  if (problem.have_truth) {
    rec.rre_x = rre(x, problem.x_true);
    rec.rre_y = rre_params(y, problem.y_true);
  }
  return rec;
}

}  // namespace

DeblurResult run_algorithm1(const DeblurProblem& problem,
                            const DeblurOptions& opts) {
  const int N = problem.N;
  BlurCache cache{N, opts.symmetric_approx_spectra, {}, {}};
  DeblurResult result;
  PsfParams y = opts.y0;
  Vector x = Vector::Zero(problem.b.size());
  Vector x_prev_rec = x;

  int total = 0;
  double grad0 = -1.0;
  SolveHistory outer_history;
  Vector x_prev_outer;

  for (int outer = 1;; ++outer) {
    // Cold restart: x0 = 0, r0 = b.
    const BlurOperator& op = cache.op(y);
    GkOptions gopts;
    gopts.reorthogonalize = opts.inner_reorth;
    gopts.op_norm = 1.0;  // unit-sum PSF
    GkFactorization f = gk_init(op, problem.b, gopts);

    double lambda = opts.lambda_policy.fixed_value;
    double lambda_prev = lambda;
    Vector x_inner_prev;
    int inner = 0;
    while (inner < opts.stopping.max_inner && !f.breakdown &&
           total < opts.stopping.max_outer) {
      gk_step(f, op);
      if (f.k < 1) break;  // immediate breakdown: nothing to solve
      ++inner;
      ++total;
      lambda = pick_lambda(f.bbar(), f.beta0, opts.lambda_policy, lambda);
      Vector s = hybrid_solve(f, lambda);
      x = assemble_solution(f, Vector::Zero(problem.b.size()), s);

      IterationRecord rec = make_record(problem, x, y, lambda);
      rec.total_iter = total;
      rec.outer_iter = outer;
      rec.inner_iter = inner;
      rec.inexact_residual_norm =
          (f.bbar() * s - Vector::Unit(inner + 1, 0) * f.beta0).norm();
      double obj = rec.inexact_residual_norm * rec.inexact_residual_norm +
                   lambda * lambda * s.squaredNorm();
      rec.objective_inexact = obj;
      rec.objective_exact = obj;  // the inner operator is fixed
      rec.x_rel_change = x_prev_rec.norm() > 0.0
                             ? (x - x_prev_rec).norm() / x_prev_rec.norm()
                             : 1.0;
      result.history.records.push_back(rec);
      x_prev_rec = x;

      bool lambda_settled =
          opts.lambda_policy.kind == LambdaKind::fixed ||
          (lambda_prev > 0.0 &&
           std::abs(lambda - lambda_prev) / lambda_prev <=
               opts.stopping.theta1);
      bool x_settled = x_inner_prev.size() > 0 && x_inner_prev.norm() > 0.0 &&
                       (x - x_inner_prev).norm() <=
                           opts.inner_tol * x_inner_prev.norm();
      lambda_prev = lambda;
      x_inner_prev = x;
      if (lambda_settled && x_settled) break;
    }
    if (inner == 0) {
      result.history.stop_reason = "breakdown";
      break;
    }

    GnOutcome gn = gauss_newton_update(cache, problem.b, y, x, lambda, opts);
    if (!result.history.records.empty())
      result.history.records.back().gamma = gn.gamma;
    if (grad0 < 0.0) grad0 = gn.grad_norm > 0.0 ? gn.grad_norm : 1.0;

    IterationRecord orec = make_record(problem, x, gn.y_new, lambda);
    orec.total_iter = total;
    orec.outer_iter = outer;
    orec.inner_iter = inner;
    orec.gamma = gn.gamma;
    orec.x_rel_change = x_prev_outer.size() > 0 && x_prev_outer.norm() > 0.0
                            ? (x - x_prev_outer).norm() / x_prev_outer.norm()
                            : 1.0;
    x_prev_outer = x;
    outer_history.records.push_back(orec);

    y = gn.y_new;

    // The per-cycle cap only ends the inner loop (cold restart follows),
    // so the run-level decision ignores the inner-cap clause.
    StoppingConfig run_cfg = opts.stopping;
    run_cfg.max_inner = 0;
    StopDecision dec =
        stopping_check(outer_history, run_cfg, gn.grad_norm, grad0);
    if (total >= opts.stopping.max_outer) {
      result.history.stop_reason = "budget";
      break;
    }
    if (dec.stop) {
      result.history.stop_reason = dec.reason == StopReason::stationary
                                       ? "stationary"
                                       : (dec.reason == StopReason::budget
                                              ? "budget"
                                              : "stabilized");
      break;
    }
  }

  result.x = x;
  result.y = y;
  result.total_iterations = total;
  return result;
}

DeblurResult run_algorithm2(const DeblurProblem& problem,
                            const DeblurOptions& opts) {
  const int N = problem.N;
  BlurCache cache{N, opts.symmetric_approx_spectra, {}, {}};
  DeblurResult result;
  PsfParams y = opts.y0;
  Vector x0 = opts.x0.size() ? opts.x0 : Vector::Zero(problem.b.size());
  Vector x = x0;
  Vector x_prev_rec = x0;

  int total = 0;
  int cycle = 0;
  double grad0 = -1.0;
  bool done = false;

  while (!done && total < opts.stopping.max_outer) {
    // Start or restart a cycle (warm: x0 is the latest reconstruction).
    ++cycle;
    Vector ax0 = cache.op(y).apply(x0);
    Vector r0 = problem.b - ax0;
    IgkOptions iopts;
    iopts.op_norm = 1.0;
    IgkFactorization f =
        igk_init_with([&](const Vector& u) { return cache.op(y).apply_adjoint(u); },
                      problem.b.size(), problem.b.size(), r0, iopts);

    std::vector<PsfParams> y_applied;  // y_{i-1} used at inner iteration i
    InexactnessBudget budget;
    budget.epsilon = opts.epsilon;
    double lambda = opts.lambda_policy.fixed_value;
    double raug_prev = f.beta0;  // previous augmented residual for the caps
    Vector s;
    bool first_record_of_cycle = true;
    bool restart_now = false;

    int inner = 0;
    while (inner < opts.stopping.max_inner && !f.breakdown && !done) {
      if (inner >= 1 && std::isfinite(opts.epsilon)) {
        // Iteration-relative errors against the newest parameters.
        const DctSpectrum& ref = cache.spectrum(y);
        std::vector<double> norms(y_applied.size());
        for (std::size_t i = 0; i < y_applied.size(); ++i)
          norms[i] = error_norm_estimate(cache.spectrum(y_applied[i]), ref);
        budget.e0_term = x0.norm() > 0.0
                             ? (ax0 - cache.op(y).apply(x0)).norm()
                             : 0.0;
        if (opts.active_bound == ControlBound::per_iteration_caps) {
          while (budget.per_iter_caps.size() < norms.size())
            budget.per_iter_caps.push_back(
                std::numeric_limits<double>::infinity());
        }
        budget.update(norms, s, opts.active_bound);
        if (budget.exceeded) {
          restart_now = true;
          ++result.history.restart_count;
          break;
        }
      }

      const BlurOperator& op_i = cache.op(y);
      y_applied.push_back(y);
      igk_step_with(
          f, [&](const Vector& v) { return op_i.apply(v); },
          [&](const Vector& u) { return op_i.apply_adjoint(u); });
      if (f.k < 1) break;  // immediate breakdown: nothing to solve
      ++inner;
      ++total;

      Matrix M = f.M.topLeftCorner(f.k + 1, f.k);
      lambda = pick_lambda(M, f.beta0, opts.lambda_policy, lambda);
      s = hybrid_ilsqr_solve(f, lambda);
      Vector z = f.basis() * s;
      x = x0 + z;

      if (opts.active_bound == ControlBound::per_iteration_caps &&
          std::isfinite(opts.epsilon)) {
        // Cap on ||E_j|| for the product just taken, from the current
        // sigma_min estimate and the previous augmented residual.
        budget.per_iter_caps.push_back(
            allowable_error(f.k, projected_sigma_min(f), raug_prev, lambda,
                            opts.epsilon, true));
        raug_prev = std::sqrt(
            (M * s - Vector::Unit(f.k + 1, 0) * f.beta0).squaredNorm() +
            lambda * lambda * s.squaredNorm());
      }

      GnOutcome gn = gauss_newton_update(cache, problem.b, y, x, lambda, opts);
      if (grad0 < 0.0) grad0 = gn.grad_norm > 0.0 ? gn.grad_norm : 1.0;

      IterationRecord rec = make_record(problem, x, gn.y_new, lambda);
      rec.total_iter = total;
      rec.outer_iter = cycle;
      rec.inner_iter = inner;
      rec.gamma = gn.gamma;
      rec.restarted = first_record_of_cycle && total > 1;
      rec.inexact_residual_norm =
          (M * s - Vector::Unit(f.k + 1, 0) * f.beta0).norm();
      rec.objective_inexact =
          rec.inexact_residual_norm * rec.inexact_residual_norm +
          lambda * lambda * s.squaredNorm();
      rec.objective_exact = evaluate_objective(z, y, lambda, r0, N);
      rec.accumulated_budget = budget.accumulated;
      {
        std::vector<double> norms(y_applied.size());
        for (std::size_t i = 0; i < y_applied.size(); ++i)
          norms[i] =
              error_norm_estimate(cache.spectrum(y_applied[i]), cache.spectrum(y));
        double acc_sq = budget.e0_term * budget.e0_term;
        for (Eigen::Index l = 0; l < s.size(); ++l) {
          double t = norms[l] * std::abs(s[l]);
          acc_sq += t * t;
        }
        rec.gap_bound = std::sqrt(acc_sq);
      }
      rec.x_rel_change = x_prev_rec.norm() > 0.0
                             ? (x - x_prev_rec).norm() / x_prev_rec.norm()
                             : 1.0;
      result.history.records.push_back(rec);
      x_prev_rec = x;
      first_record_of_cycle = false;

      y = gn.y_new;

      if (result.history.records.size() >= 2 && total > 5) {
        StoppingConfig run_cfg = opts.stopping;
        run_cfg.max_inner = 0;  // cycle caps roll warm, they do not stop
        StopDecision dec = stopping_check(result.history, run_cfg,
                                          gn.grad_norm, grad0);
        if (dec.stop) {
          result.history.stop_reason = dec.reason == StopReason::stationary
                                           ? "stationary"
                                           : (dec.reason == StopReason::budget
                                                  ? "budget"
                                                  : "stabilized");
          done = true;
        }
      }
      if (total >= opts.stopping.max_outer) {
        result.history.stop_reason = "budget";
        done = true;
      }
    }
    if (!done && !restart_now && f.breakdown) {
      result.history.stop_reason = "breakdown";
      done = true;
    }
    x0 = x;  // warm restart
  }

  result.x = x;
  result.y = y;
  result.total_iterations = total;
  return result;
}

}  // namespace ikr

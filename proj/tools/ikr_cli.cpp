// Command-line frontend for the ikrylov shared library. Talks to the
// library exclusively through the C API in ikr/ikrylov.h.

#include "ikr/ikrylov.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct CommonArgs {
  int n = 64;
  std::vector<double> ytrue = {2.5, 2.5, 0.0};
  double noise = 1e-2;
  unsigned seed = 7;
  std::string image = "starfield";  // starfield|phantom|path to .pgm
  std::string out_dir = ".";
};

struct SolverArgs {
  double lambda = 0.5;
  std::string lambda_policy = "fixed";  // fixed|dp|wgcv
  double tau = 1.01;
  double omega = 1.0;
  double epsilon = 1.0;
  std::string bound = "eq323";
  bool isotropic = false;
  std::vector<double> y0 = {7.0, 7.0, 0.0};
  int max_inner = 50;
  int max_outer = 500;
  double theta1 = 1e-3, theta2 = 1e-3, theta3 = 1e-3;
  double grad_tol = 1e-8;
};

// Plain key=value configuration, applied as defaults before flag parsing
// so explicit flags win. Lines starting with '#' are comments.
bool load_config(const std::string& path, CommonArgs& a, SolverArgs& s,
                 std::string& method, int& iterations, std::string& err) {
  std::ifstream in(path);
  if (!in) {
    err = "cannot open config file: " + path;
    return false;
  }
  auto parse_triple = [](const std::string& v, std::vector<double>& out) {
    std::stringstream ss(v);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() == 3) out = vals;
  };
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string t) {
      t.erase(0, t.find_first_not_of(" \t\r"));
      auto e = t.find_last_not_of(" \t\r");
      t.erase(e == std::string::npos ? 0 : e + 1);
      return t;
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) continue;
    try {
      if (key == "n") a.n = std::stoi(val);
      else if (key == "ytrue") parse_triple(val, a.ytrue);
      else if (key == "noise") a.noise = std::stod(val);
      else if (key == "seed") a.seed = unsigned(std::stoul(val));
      else if (key == "image") a.image = val;
      else if (key == "out") a.out_dir = val;
      else if (key == "lambda") s.lambda = std::stod(val);
      else if (key == "lambda-policy") s.lambda_policy = val;
      else if (key == "tau") s.tau = std::stod(val);
      else if (key == "omega") s.omega = std::stod(val);
      else if (key == "epsilon") s.epsilon = std::stod(val);
      else if (key == "bound") s.bound = val;
      else if (key == "isotropic") s.isotropic = (val == "1" || val == "true");
      else if (key == "y0") parse_triple(val, s.y0);
      else if (key == "max-inner") s.max_inner = std::stoi(val);
      else if (key == "max-outer") s.max_outer = std::stoi(val);
      else if (key == "theta1") s.theta1 = std::stod(val);
      else if (key == "theta2") s.theta2 = std::stod(val);
      else if (key == "theta3") s.theta3 = std::stod(val);
      else if (key == "grad-tol") s.grad_tol = std::stod(val);
      else if (key == "method") method = val;
      else if (key == "iterations") iterations = std::stoi(val);
      else {
        err = "unknown config key: " + key;
        return false;
      }
    } catch (const std::exception&) {
      err = "bad value for config key " + key + ": " + val;
      return false;
    }
  }
  return true;
}

void add_common(CLI::App* cmd, CommonArgs& a, std::string& config_path) {
  cmd->add_option("--config", config_path,
                  "plain key=value configuration file");
  cmd->add_option("--n", a.n, "image side length");
  cmd->add_option("--ytrue", a.ytrue, "true blur parameters s1,s2,rho")
      ->expected(3)
      ->delimiter(',');
  cmd->add_option("--noise", a.noise, "noise level ||e||/||b_true||");
  cmd->add_option("--seed", a.seed, "generator seed");
  cmd->add_option("--image", a.image, "starfield|phantom|file.pgm");
  cmd->add_option("--out", a.out_dir, "output directory");
}

void add_solver(CLI::App* cmd, SolverArgs& s, bool deblur) {
  cmd->add_option("--lambda", s.lambda, "fixed regularization parameter");
  cmd->add_option("--lambda-policy", s.lambda_policy, "fixed|dp|wgcv");
  cmd->add_option("--tau", s.tau, "discrepancy safety threshold");
  cmd->add_option("--omega", s.omega, "wGCV weight");
  if (deblur) {
    cmd->add_option("--epsilon", s.epsilon,
                    "inexactness budget (<=0: unbounded)");
    cmd->add_option("--bound", s.bound,
                    "restart trigger: eq323 (accumulated gap) or eq329 "
                    "(per-iteration caps)");
    cmd->add_flag("--isotropic", s.isotropic,
                  "single-parameter blur (sigma1=sigma2, rho=0)");
    cmd->add_option("--y0", s.y0, "initial blur parameters s1,s2,rho")
        ->expected(3)
        ->delimiter(',');
    cmd->add_option("--max-inner", s.max_inner, "inner iteration cap");
    cmd->add_option("--max-outer", s.max_outer, "total iteration cap");
    cmd->add_option("--theta1", s.theta1, "lambda stabilization threshold");
    cmd->add_option("--theta2", s.theta2, "x stabilization threshold");
    cmd->add_option("--theta3", s.theta3, "y stabilization threshold");
    cmd->add_option("--grad-tol", s.grad_tol, "relative gradient threshold");
  }
}

int die(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return 1;
}

int api_die(const char* what) {
  std::cerr << "error: " << what << ": " << ikr_last_error() << "\n";
  return 1;
}

int make_problem(const CommonArgs& a, ikr_problem** out) {
  ikr_problem_spec spec{};
  if (a.image == "starfield")
    spec.source = IKR_IMG_STARFIELD;
  else if (a.image == "phantom")
    spec.source = IKR_IMG_PHANTOM;
  else {
    spec.source = IKR_IMG_FILE;
    spec.path = a.image.c_str();
  }
  spec.n = a.n;
  spec.sigma1 = a.ytrue[0];
  spec.sigma2 = a.ytrue[1];
  spec.rho = a.ytrue[2];
  spec.noise_level = a.noise;
  spec.seed = a.seed;
  return ikr_problem_create(&spec, out);
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

int write_problem_images(const CommonArgs& a, const ikr_problem* p) {
  std::filesystem::create_directories(a.out_dir);
  int n = 0;
  ikr_problem_size(p, &n);
  std::vector<double> buf(static_cast<size_t>(n) * n);
  struct Item {
    int kind;
    const char* name;
  } items[] = {{IKR_DATA_B, "b"},
               {IKR_DATA_X_TRUE, "xtrue"},
               {IKR_DATA_PSF_TRUE, "psf_true"}};
  for (const auto& it : items) {
    if (ikr_problem_image(p, it.kind, buf.data(), buf.size()) != IKR_OK)
      return api_die("problem image");
    double peak = 0.0;
    for (double v : buf) peak = std::max(peak, v);
    std::vector<double> scaled = buf;
    if (it.kind == IKR_DATA_PSF_TRUE && peak > 0)
      for (double& v : scaled) v /= peak;  // PSFs are tiny-valued; rescale
    std::string base = join(a.out_dir, it.name);
    if (ikr_write_image_pgm((base + ".pgm").c_str(), scaled.data(), n) !=
            IKR_OK ||
        ikr_write_image_png((base + ".png").c_str(), scaled.data(), n) !=
            IKR_OK)
      return api_die("write image");
  }
  return 0;
}

int write_run_outputs(const CommonArgs& a, const ikr_problem* p,
                      const ikr_run* run, const std::string& label) {
  std::filesystem::create_directories(a.out_dir);
  if (ikr_run_write_csv(run, join(a.out_dir, label + "_history.csv").c_str()) !=
      IKR_OK)
    return api_die("write csv");

  int n = 0;
  ikr_problem_size(p, &n);
  std::vector<double> x(static_cast<size_t>(n) * n);
  if (ikr_run_solution(run, x.data(), x.size()) != IKR_OK)
    return api_die("solution");
  if (ikr_write_image_pgm(join(a.out_dir, label + "_xrec.pgm").c_str(),
                          x.data(), n) != IKR_OK ||
      ikr_write_image_png(join(a.out_dir, label + "_xrec.png").c_str(),
                          x.data(), n) != IKR_OK)
    return api_die("write reconstruction");

  double s1 = 0, s2 = 0, rho = 0;
  ikr_run_params(run, &s1, &s2, &rho);
  std::vector<double> psf(static_cast<size_t>(n) * n);
  if (ikr_psf_image(s1, s2, rho, n, psf.data(), psf.size()) == IKR_OK) {
    double peak = 0.0;
    for (double v : psf) peak = std::max(peak, v);
    if (peak > 0)
      for (double& v : psf) v /= peak;
    ikr_write_image_pgm(join(a.out_dir, label + "_psfrec.pgm").c_str(),
                        psf.data(), n);
    ikr_write_image_png(join(a.out_dir, label + "_psfrec.png").c_str(),
                        psf.data(), n);
  }

  size_t len = ikr_run_length(run);
  ikr_record last{};
  if (len > 0) ikr_run_record(run, len - 1, &last);
  int restarts = 0;
  ikr_run_restarts(run, &restarts);
  char reason[64] = {0};
  ikr_run_stop_reason(run, reason, sizeof(reason));

  std::ofstream summary(join(a.out_dir, label + "_summary.txt"));
  summary << "run: " << label << "\n"
          << "total_iterations: " << (len ? last.total_iter : 0) << "\n"
          << "restarts: " << restarts << "\n"
          << "stop_reason: " << reason << "\n"
          << "final_rre_x: " << last.rre_x << "\n"
          << "final_rre_y: " << last.rre_y << "\n"
          << "final_sigma1: " << s1 << "\n"
          << "final_sigma2: " << s2 << "\n"
          << "final_rho: " << rho << "\n";
  std::cout << label << ": iters=" << (len ? last.total_iter : 0)
            << " restarts=" << restarts << " rre_x=" << last.rre_x
            << " sigma=(" << s1 << "," << s2 << "," << rho << ")"
            << " stop=" << reason << "\n";
  return 0;
}

ikr_deblur_opts to_deblur_opts(const SolverArgs& s) {
  ikr_deblur_opts o;
  ikr_deblur_opts_defaults(&o);
  o.sigma1_0 = s.y0[0];
  o.sigma2_0 = s.y0[1];
  o.rho_0 = s.y0[2];
  o.isotropic = s.isotropic ? 1 : 0;
  o.lambda = s.lambda;
  o.lambda_policy = s.lambda_policy == "dp"     ? IKR_LAMBDA_DISCREPANCY
                    : s.lambda_policy == "wgcv" ? IKR_LAMBDA_WGCV
                                                : IKR_LAMBDA_FIXED;
  o.tau = s.tau;
  o.omega = s.omega;
  o.epsilon = s.epsilon;
  o.bound = s.bound == "eq329" ? 1 : 0;
  o.max_inner = s.max_inner;
  o.max_outer = s.max_outer;
  o.theta1 = s.theta1;
  o.theta2 = s.theta2;
  o.theta3 = s.theta3;
  o.grad_tol = s.grad_tol;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inexact Golub-Kahan Krylov solvers and blind deblurring"};
  app.require_subcommand(1);

  CommonArgs common;
  SolverArgs solver;
  std::string preset;
  std::string method = "hybrid-ilsqr";
  int iterations = 30;

  // Config values act as defaults, so apply them before the flag parse.
  std::string config_path;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  if (!config_path.empty()) {
    std::string err;
    if (!load_config(config_path, common, solver, method, iterations, err)) {
      std::cerr << "error: " << err << "\n";
      return 1;
    }
  }

  CLI::App* generate = app.add_subcommand("generate", "write a test problem");
  add_common(generate, common, config_path);
  generate->add_option("--preset", preset,
                       "satellite-analogue|cameraman-analogue");

  CLI::App* solve =
      app.add_subcommand("solve", "linear solvers at the true parameters");
  add_common(solve, common, config_path);
  add_solver(solve, solver, false);
  solve->add_option("--method", method,
                    "lsqr|cgls|hybrid|ilsqr|icgls|hybrid-ilsqr|hybrid-icgls");
  solve->add_option("--iterations", iterations, "subspace dimension");

  CLI::App* deblur_exact = app.add_subcommand(
      "deblur-exact", "variable projection with the exact inner solver");
  add_common(deblur_exact, common, config_path);
  add_solver(deblur_exact, solver, true);

  CLI::App* deblur_inexact = app.add_subcommand(
      "deblur-inexact", "variable projection with the inexact solver");
  add_common(deblur_inexact, common, config_path);
  add_solver(deblur_inexact, solver, true);

  CLI::App* repro =
      app.add_subcommand("repro", "bundled experiment reproductions");
  add_common(repro, common, config_path);
  repro->add_option("--preset", preset,
                    "satellite-analogue|cameraman-analogue");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  bool seed_given = false;
  for (CLI::App* sub : {generate, solve, deblur_exact, deblur_inexact, repro})
    if (sub->count("--seed") > 0) seed_given = true;

  auto apply_preset = [&](const std::string& name) -> bool {
    if (name.empty()) return true;
    if (name == "satellite-analogue") {
      common.image = "starfield";
      common.n = 64;
      common.ytrue = {2.5, 2.5, 0.0};
      common.noise = 1e-2;
      if (!seed_given) common.seed = 9;  // the canonical bundled instance
      solver.isotropic = true;
      solver.y0 = {7.0, 7.0, 0.0};
      solver.lambda = 0.5;
      return true;
    }
    if (name == "cameraman-analogue") {
      common.image = "phantom";
      common.n = 64;
      common.ytrue = {3.0, 4.0, 0.5};
      common.noise = 1e-2;
      if (!seed_given) common.seed = 9;
      solver.isotropic = false;
      solver.y0 = {4.0, 5.0, 0.9};
      solver.lambda_policy = "dp";
      return true;
    }
    return false;
  };

  if (generate->parsed() || repro->parsed()) {
    if (!apply_preset(preset)) return die("unknown preset: " + preset);
  }

  ikr_problem* problem = nullptr;
  if (make_problem(common, &problem) != IKR_OK) return api_die("generate");

  int rc = 0;
  if (generate->parsed()) {
    rc = write_problem_images(common, problem);
    if (rc == 0) {
      std::ofstream meta(join(common.out_dir, "meta.txt"));
      meta << "image: " << common.image << "\nn: " << common.n
           << "\nytrue: " << common.ytrue[0] << "," << common.ytrue[1] << ","
           << common.ytrue[2] << "\nnoise: " << common.noise
           << "\nseed: " << common.seed << "\n";
      std::cout << "wrote problem files to " << common.out_dir << "\n";
    }
  } else if (solve->parsed()) {
    ikr_solve_opts o;
    ikr_solve_opts_defaults(&o);
    if (method == "lsqr")
      o.method = IKR_METHOD_LSQR;
    else if (method == "cgls")
      o.method = IKR_METHOD_CGLS;
    else if (method == "hybrid")
      o.method = IKR_METHOD_HYBRID;
    else if (method == "ilsqr")
      o.method = IKR_METHOD_ILSQR;
    else if (method == "icgls")
      o.method = IKR_METHOD_ICGLS;
    else if (method == "hybrid-ilsqr")
      o.method = IKR_METHOD_HYBRID_ILSQR;
    else if (method == "hybrid-icgls")
      o.method = IKR_METHOD_HYBRID_ICGLS;
    else {
      ikr_problem_destroy(problem);
      return die("unknown method: " + method);
    }
    o.iterations = iterations;
    o.lambda = solver.lambda;
    o.lambda_policy = solver.lambda_policy == "dp" ? IKR_LAMBDA_DISCREPANCY
                      : solver.lambda_policy == "wgcv" ? IKR_LAMBDA_WGCV
                                                       : IKR_LAMBDA_FIXED;
    o.tau = solver.tau;
    o.omega = solver.omega;
    ikr_run* run = nullptr;
    if (ikr_solve_linear(problem, &o, &run) != IKR_OK) {
      ikr_problem_destroy(problem);
      return api_die("solve");
    }
    rc = write_run_outputs(common, problem, run, "solve");
    ikr_run_destroy(run);
  } else if (deblur_exact->parsed() || deblur_inexact->parsed()) {
    ikr_deblur_opts o = to_deblur_opts(solver);
    ikr_run* run = nullptr;
    int inexact = deblur_inexact->parsed() ? 1 : 0;
    if (ikr_deblur(problem, &o, inexact, &run) != IKR_OK) {
      ikr_problem_destroy(problem);
      return api_die("deblur");
    }
    rc = write_run_outputs(common, problem, run,
                           inexact ? "deblur_inexact" : "deblur_exact");
    ikr_run_destroy(run);
  } else if (repro->parsed()) {
    rc = write_problem_images(common, problem);
    if (rc == 0) {
      ikr_deblur_opts o = to_deblur_opts(solver);
      struct Case {
        const char* label;
        int inexact;
        double epsilon;
      } cases[] = {{"alg1", 0, o.epsilon},
                   {"alg2", 1, o.epsilon},
                   {"alg2_nocontrol", 1, -1.0}};
      for (const auto& c : cases) {
        ikr_deblur_opts oc = o;
        oc.epsilon = c.epsilon;
        ikr_run* run = nullptr;
        if (ikr_deblur(problem, &oc, c.inexact, &run) != IKR_OK) {
          rc = api_die("repro");
          break;
        }
        rc = write_run_outputs(common, problem, run, c.label);
        ikr_run_destroy(run);
        if (rc != 0) break;
      }
    }
  }

  ikr_problem_destroy(problem);
  return rc;
}

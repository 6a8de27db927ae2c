#pragma once

#include <string>
#include <vector>

namespace ikr {

/// One row of a solver run. Field set matches the history.csv schema.
struct IterationRecord {
  int total_iter = 0;
  int outer_iter = 0;
  int inner_iter = 0;
  double lambda = 0.0;
  double inexact_residual_norm = 0.0;  // ||M_k s - beta e1||
  double gap_bound = 0.0;
  double accumulated_budget = 0.0;
  double rre_x = 0.0;
  double rre_y = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double rho = 0.0;
  double gamma = 0.0;
  bool restarted = false;
  double objective_exact = 0.0;
  double objective_inexact = 0.0;
  double x_rel_change = 0.0;
};

struct SolveHistory {
  std::vector<IterationRecord> records;
  int restart_count = 0;
  std::string stop_reason;
};

}  // namespace ikr

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "h2blend/nlp.hpp"

namespace h2blend {

struct SolverOptions {
  double kkt_tolerance = 1e-8;
  int max_iterations = 500;
  double mu_init = 0.1;
  double mu_reduction = 0.2;
  double tau_min = 0.995;
  double delta_init = 1e-8;
  double binding_threshold = 1e-6;
  int seed_count = 5;
  double warm_mu_init = 1e-4;
  double bound_push = 1e-2;
  /// Receives one line per iteration when non-null.
  std::ostream* log = nullptr;

  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
  bool operator==(const SolverOptions& o) const {
    return kkt_tolerance == o.kkt_tolerance && max_iterations == o.max_iterations &&
           mu_init == o.mu_init && mu_reduction == o.mu_reduction && tau_min == o.tau_min &&
           delta_init == o.delta_init && binding_threshold == o.binding_threshold &&
           seed_count == o.seed_count && warm_mu_init == o.warm_mu_init &&
           bound_push == o.bound_push;
  }
};

enum class SolveStatus { Optimal, MaxIterations, Infeasible, NumericalFailure };

const char* to_string(SolveStatus status);

struct IterationRecord {
  int iteration;
  double mu;
  double objective;
  double primal_infeasibility;
  double dual_infeasibility;
  double complementarity;
  double step_primal;
  double step_dual;
  double regularization;
};

struct ShadowPrices {
  double ng = 0.0;     // [$/kg]
  double h2 = 0.0;     // [$/kg]
  double blend = 0.0;  // [$/kg]
};

struct Solution {
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  int seed = 0;  // -1 for a warm-started run
  double objective = 0.0;  // J_EV [$/s]

  Eigen::VectorXd x;          // scaled primal
  Eigen::VectorXd slacks;     // scaled inequality slacks
  Eigen::VectorXd eq_duals;   // scaled equality multipliers (L = f + y'h)
  Eigen::VectorXd ineq_duals; // scaled inequality multipliers, >= 0 (L = f - mu'g)
  Eigen::VectorXd bound_lower_duals;
  Eigen::VectorXd bound_upper_duals;

  PhysicalPrimal primal;
  /// Row label ("kind:id") -> multiplier in $/s per unit of the row's physical quantity.
  std::map<std::string, double> duals;

  double kkt_residual = 0.0;    // max of scaled primal, dual and complementarity residuals
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;  // max_i |mu_i g_i(x)| and bound analogues

  std::vector<std::string> binding_set;  // sorted labels
  std::map<std::string, ShadowPrices> shadow_prices;  // per junction; filled when Optimal
  std::vector<IterationRecord> log;
};

/// Interior starting point (scaled). `seed` 0 is the plain rule; other seeds give
/// deterministic random perturbations used by multi-start.
Eigen::VectorXd initialize(const AssembledProblem& problem, int seed = 0);

/// Single interior-point run from `x0`. Dual estimates in `warm` (if given) seed the
/// multipliers and the barrier starts at options.warm_mu_init.
Solution solve_from(const AssembledProblem& problem, const SolverOptions& options,
                    const Eigen::VectorXd& x0, const Solution* warm = nullptr);

/// options.seed_count deterministic starts plus, when `warm_start` is given, a
/// warm-started run (seed -1); the best Optimal objective wins, ties going to the
/// warm run and then to the lowest seed.
Solution solve(const AssembledProblem& problem, const SolverOptions& options,
               const std::optional<Solution>& warm_start = std::nullopt);

/// Per-junction NG, H2 and blend prices [$/kg]. Throws std::logic_error on a
/// non-Optimal solution.
std::map<std::string, ShadowPrices> extract_shadow_prices(const Solution& solution,
                                                         const AssembledProblem& problem);

}  // namespace h2blend

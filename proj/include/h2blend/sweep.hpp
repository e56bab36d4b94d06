#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "h2blend/problem_file.hpp"
#include "h2blend/solver.hpp"

namespace h2blend {

enum class SweepTarget { DemandMax, GammaMin, CarbonPrice };

struct SweepSpec {
  SweepTarget target = SweepTarget::DemandMax;
  std::vector<std::string> ids;  // all move together along the parameter
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;
  bool warm_start = true;
  int jobs = 1;  // worker threads for cold sweeps

  /// "demand_max:D1", "demand_max:D1,D2", "gamma_min:J3", "carbon_price:D1".
  static SweepSpec parse_target(const std::string& text);
  std::string target_label() const;
  /// Throws NetworkError("validation_error") if the range is invalid or an id
  /// does not reference a suitable component of `network`.
  void validate(const Network& network) const;
};

/// start, start + step, ... up to stop inclusive (within 1e-9 of a step).
std::vector<double> sweep_grid(double start, double stop, double step);

/// Copy of `base` with the sweep parameter set to `value`.
ProblemSpec apply_parameter(const ProblemSpec& base, const SweepSpec& spec, double value);

struct SweepRow {
  double parameter = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  double objective = 0.0;
  std::map<std::string, double> energy;      // per demand gNode [MJ/s]
  std::map<std::string, double> withdrawal;  // per demand gNode [kg/s]
  std::map<std::string, double> gamma;       // at each demand gNode's junction
  std::map<std::string, double> alpha;       // per compressor
  std::map<std::string, ShadowPrices> shadow_prices;  // per demand junction
  std::vector<std::string> binding_set;
};

struct SweepResult {
  std::string target;
  std::vector<std::string> demand_ids;
  std::vector<std::string> demand_junctions;
  std::vector<std::string> compressor_ids;
  std::vector<SweepRow> rows;
  std::vector<double> transitions;
};

SweepResult run_sweep(const ProblemSpec& base, const SweepSpec& spec);

/// Midpoints between consecutive Optimal rows whose binding sets differ.
std::vector<double> detect_transitions(const std::vector<SweepRow>& rows);

/// Summary row of one solution.
SweepRow summarize(double parameter, const Solution& solution, const AssembledProblem& problem);

void write_csv(const SweepResult& result, std::ostream& out);
void write_json(const SweepResult& result, std::ostream& out);
void export_csv(const SweepResult& result, const std::string& path);
void export_json(const SweepResult& result, const std::string& path);

}  // namespace h2blend

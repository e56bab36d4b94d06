#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "h2blend/nlp.hpp"
#include "h2blend/solver.hpp"

namespace h2blend {

/// Fixed controls: supplies and withdrawals [kg/s] per gNode, boost ratio per
/// compressor. Missing entries default to zero flow and alpha = 1.
struct ControlAssignment {
  std::map<std::string, double> supply_ng;
  std::map<std::string, double> supply_h2;
  std::map<std::string, double> demand;
  std::map<std::string, double> alpha;

  /// Controls taken from an optimizer solution.
  static ControlAssignment from_primal(const PhysicalPrimal& primal);
};

struct SimulationState {
  std::map<std::string, double> pressure;    // [Pa]
  std::map<std::string, double> gamma_node;  // [-]
  std::map<std::string, double> flow;        // [kg/s], pipes and compressors
  std::map<std::string, double> gamma_edge;  // [-], pipes
  std::map<std::string, double> makeup;      // [kg/s] injected at each slack junction
  double residual = 0.0;                     // scaled max-norm at return
  int iterations = 0;
};

class SimulationError : public std::runtime_error {
 public:
  enum class Code { NonConvergence, NegativePressure, InvalidControls };
  SimulationError(Code code, const std::string& message, std::string element = {})
      : std::runtime_error(message), code_(code), element_(std::move(element)) {}
  Code code() const noexcept { return code_; }
  const std::string& element() const noexcept { return element_; }
  const char* code_name() const noexcept;

 private:
  Code code_;
  std::string element_;
};

/// Damped Newton solve of the square steady-state system with all controls
/// fixed; slack junctions absorb any mass imbalance at their own composition.
SimulationState simulate(const Network& network, const ControlAssignment& controls,
                         const GasConstants& gc, const ScalingConfig& scaling);

/// Scaled total-mass and H2-mass imbalance of a state:
/// injections + makeup - withdrawals, per species, divided by phi0.
struct ConservationResiduals {
  double total_mass = 0.0;
  double h2_mass = 0.0;
};
ConservationResiduals conservation_residuals(const Network& network,
                                             const ControlAssignment& controls,
                                             const std::map<std::string, double>& gamma_node,
                                             const std::map<std::string, double>& makeup,
                                             double phi0);

struct CrosscheckReport {
  std::map<std::string, double> deviation;  // "pressure:J1", "flow:P1", "gamma:J2", ...
  std::string worst;
  double max_deviation = 0.0;
  bool pass = false;
};

inline constexpr double kCrosscheckTolerance = 1e-6;

/// Re-simulates the solution's controls and compares states. Deviation is
/// |a - b| / max(|a|, |b|, ref) with ref = p0 for pressures, phi0 for flows and 1
/// for concentrations; concentrations at junctions and pipes without throughput
/// are skipped. Throws std::logic_error on a non-Optimal solution.
CrosscheckReport crosscheck(const Solution& solution, const AssembledProblem& problem);
CrosscheckReport crosscheck(const PhysicalPrimal& primal, const AssembledProblem& problem);

}  // namespace h2blend

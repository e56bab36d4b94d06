#pragma once

#include <Eigen/Dense>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "h2blend/network.hpp"
#include "h2blend/physics.hpp"

namespace h2blend {

/// Reference quantities for the non-dimensional form. Pressures are divided by
/// p0, flows by phi0, lengths by l0, areas by area0, wave speeds by a0.
struct ScalingConfig {
  double p0 = 5.0e6;  // [Pa]
  double l0 = 5000.0;  // [m]
  double a0 = 0.0;     // [m/s]
  double area0 = 1.0;  // [m^2]
  double rho0 = 0.0;   // [kg/m^3]
  double u0 = 0.0;     // [m/s]
  double phi0 = 0.0;   // [kg/s]
  double objective_scale = 1e-2;

  /// a0 = sqrt(a_ng a_h2), u0 = ceil(a0)/300, rho0 = p0/a0^2, phi0 = rho0 u0 area0.
  static ScalingConfig defaults(const GasConstants& gc, double p0 = 5.0e6, double l0 = 5000.0,
                                double area0 = 1.0);
  /// Recomputes rho0 and phi0 from p0, a0, u0, area0.
  ScalingConfig& derive();
  double a0_sq() const { return a0 * a0; }
  /// Throws std::invalid_argument on non-positive fields or inconsistent rho0/phi0.
  void validate() const;
  bool operator==(const ScalingConfig&) const = default;
};

enum class VarKind { SupplyH2, SupplyNG, Demand, Alpha, Flow, GammaEdge, GammaNode, Pressure };

const char* to_string(VarKind kind);

class VariableLayout {
 public:
  struct Entry {
    VarKind kind;
    std::string id;
  };

  explicit VariableLayout(const Network& net);

  std::size_t size() const { return entries_.size(); }
  const Entry& operator[](std::size_t k) const { return entries_[k]; }
  const std::vector<Entry>& entries() const { return entries_; }
  /// Throws NetworkError("unknown_id") if no such variable exists.
  std::size_t index(VarKind kind, const std::string& id) const;
  bool contains(VarKind kind, const std::string& id) const;

 private:
  std::vector<Entry> entries_;
  std::map<std::pair<VarKind, std::string>, std::size_t> lookup_;
};

/// Metadata of one constraint row. `scale` converts a scaled multiplier into a
/// physical sensitivity: d(J_EV)/d(rhs_phys) = multiplier / (objective_scale * scale).
struct RowInfo {
  std::string kind;
  std::string id;
  double scale = 1.0;

  std::string label() const { return kind + ":" + id; }
};

/// Polynomial in the decision variables: constant + sum of coef * prod x_k^e_k.
struct Monomial {
  double coef = 0.0;
  std::vector<std::pair<std::size_t, int>> factors;
};

struct Polynomial {
  double constant = 0.0;
  std::vector<Monomial> terms;

  double value(const Eigen::VectorXd& x) const;
  void add_gradient(const Eigen::VectorXd& x, double weight, Eigen::Ref<Eigen::VectorXd> g) const;
  void add_hessian(const Eigen::VectorXd& x, double weight, Eigen::MatrixXd& h) const;
};

/// Physical-unit primal values keyed by component id.
struct PhysicalPrimal {
  std::map<std::string, double> supply_h2;   // [kg/s]
  std::map<std::string, double> supply_ng;   // [kg/s]
  std::map<std::string, double> demand;      // [kg/s]
  std::map<std::string, double> alpha;       // [-]
  std::map<std::string, double> flow;        // [kg/s]
  std::map<std::string, double> gamma_edge;  // [-]
  std::map<std::string, double> gamma_node;  // [-]
  std::map<std::string, double> pressure;    // [Pa]
};

/// Scaled instance of the allocation problem: maximize J_EV, implemented as
/// minimize f = -objective_scale * J_EV subject to h(x) = 0, g(x) >= 0 and bounds.
class AssembledProblem {
 public:
  const Network& network() const { return network_; }
  const GasConstants& gas() const { return gc_; }
  const ScalingConfig& scaling() const { return scaling_; }
  const VariableLayout& layout() const { return layout_; }

  std::size_t num_variables() const { return layout_.size(); }
  std::size_t num_equalities() const { return eq_rows_.size(); }
  std::size_t num_inequalities() const { return ineq_rows_.size(); }

  const Eigen::VectorXd& lower_bounds() const { return lower_; }
  const Eigen::VectorXd& upper_bounds() const { return upper_; }
  const std::vector<RowInfo>& equality_info() const { return eq_info_; }
  const std::vector<RowInfo>& inequality_info() const { return ineq_info_; }
  std::size_t equality_row(const std::string& kind, const std::string& id) const;
  std::size_t inequality_row(const std::string& kind, const std::string& id) const;

  /// Economic value J_EV [$/s] at a scaled point.
  double economic_value(const Eigen::VectorXd& x) const;

  double objective(const Eigen::VectorXd& x) const;
  Eigen::VectorXd objective_gradient(const Eigen::VectorXd& x) const;
  Eigen::VectorXd equality_residuals(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd equality_jacobian(const Eigen::VectorXd& x) const;
  Eigen::VectorXd inequality_residuals(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd inequality_jacobian(const Eigen::VectorXd& x) const;
  /// obj_factor * Hess f + sum lambda_i Hess h_i - sum mu_i Hess g_i (symmetric).
  Eigen::MatrixXd lagrangian_hessian(const Eigen::VectorXd& x, const Eigen::VectorXd& lambda,
                                     const Eigen::VectorXd& mu, double obj_factor = 1.0) const;

  PhysicalPrimal rescale_solution(const Eigen::VectorXd& x) const;
  /// Inverse of rescale_solution; entries missing from `p` are left at zero.
  Eigen::VectorXd scale_solution(const PhysicalPrimal& p) const;

  /// Scaled value of a physical quantity of the given kind.
  double scale_factor(VarKind kind) const;
  /// True when no H2 supply reaches `junction` along the edge directions and its
  /// gamma_min is 0. The mixing rows then force gamma = 0 and its gamma bounds
  /// are left out of the problem.
  bool gamma_forced_zero(const std::string& junction) const {
    return forced_zero_.count(junction) != 0;
  }
  /// Labels of bounds omitted because they hold by construction; reported as
  /// binding in every solution.
  const std::vector<std::string>& implied_binding() const { return implied_binding_; }

 private:
  friend AssembledProblem assemble(const Network&, const GasConstants&, const ScalingConfig&);
  AssembledProblem(Network net, GasConstants gc, ScalingConfig sc);

  struct CompressorTerm {
    std::size_t alpha, gamma, phi;
    double coef;  // multiplies phi * (W/phi)(alpha, gamma)
  };

  Network network_;
  GasConstants gc_;
  ScalingConfig scaling_;
  VariableLayout layout_;
  Eigen::VectorXd lower_, upper_;
  Polynomial objective_poly_;
  std::vector<CompressorTerm> compressor_terms_;
  std::vector<Polynomial> eq_rows_, ineq_rows_;
  std::vector<RowInfo> eq_info_, ineq_info_;
  std::map<std::string, std::size_t> eq_lookup_, ineq_lookup_;
  std::set<std::string> forced_zero_;
  std::vector<std::string> implied_binding_;
};

/// Builds the scaled problem. Throws NetworkError("assembly_error") when a gNode
/// lacks a price or bound required by its kind.
AssembledProblem assemble(const Network& network, const GasConstants& gc,
                          const ScalingConfig& scaling);

}  // namespace h2blend

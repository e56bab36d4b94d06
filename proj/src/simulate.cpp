#include "h2blend/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace h2blend {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPiFloor = 1e-12;
constexpr double kTargetResidual = 1e-12;
constexpr double kAcceptResidual = 1e-10;

double lookup(const std::map<std::string, double>& m, const std::string& id, double fallback) {
  auto it = m.find(id);
  return it == m.end() ? fallback : it->second;
}

struct System {
  const Network& net;
  const GasConstants& gc;
  const ScalingConfig& sc;
  std::size_t nv, ne, np, ns;
  std::vector<EdgeRef> edges;          // pipes then compressors
  std::vector<std::size_t> slack_junctions;
  std::vector<double> beta;            // per pipe
  std::vector<double> inj_ng, inj_h2, withdraw;  // scaled, per junction
  std::vector<double> alpha;           // per compressor

  std::size_t pi(std::size_t j) const { return j; }
  std::size_t gam(std::size_t j) const { return nv + j; }
  std::size_t phi(std::size_t e) const { return 2 * nv + e; }
  std::size_t gpipe(std::size_t p) const { return 2 * nv + ne + p; }
  std::size_t mk(std::size_t k) const { return 2 * nv + ne + np + k; }
  std::size_t size() const { return 2 * nv + ne + np + ns; }

  // Index of the variable holding an edge's concentration.
  std::size_t edge_gamma(std::size_t e) const {
    const EdgeRef r = edges[e];
    return r.kind == EdgeKind::Pipe ? gpipe(r.index) : gam(net.junction_index(net.edge_from(r)));
  }

  void evaluate(const VectorXd& u, VectorXd& f, MatrixXd* jac) const {
    const std::size_t n = size();
    f = VectorXd::Zero(n);
    if (jac) *jac = MatrixXd::Zero(n, n);
    const double a0sq = sc.a0_sq();
    const double v0 = gc.a_ng * gc.a_ng / a0sq;
    const double dv = (gc.a_h2 * gc.a_h2 - gc.a_ng * gc.a_ng) / a0sq;
    std::size_t row = 0;
    // Balances: rows 2j (NG) and 2j+1 (H2).
    for (std::size_t e = 0; e < ne; ++e) {
      const EdgeRef r = edges[e];
      const std::size_t from = net.junction_index(net.edge_from(r));
      const std::size_t to = net.junction_index(net.edge_to(r));
      const double fl = u[phi(e)];
      const std::size_t gi = edge_gamma(e);
      const double g = u[gi];
      for (int side = 0; side < 2; ++side) {
        const std::size_t j = side == 0 ? from : to;
        const double sgn = side == 0 ? 1.0 : -1.0;
        f[2 * j] += sgn * (1.0 - g) * fl;
        f[2 * j + 1] += sgn * g * fl;
        if (jac) {
          (*jac)(2 * j, phi(e)) += sgn * (1.0 - g);
          (*jac)(2 * j, gi) -= sgn * fl;
          (*jac)(2 * j + 1, phi(e)) += sgn * g;
          (*jac)(2 * j + 1, gi) += sgn * fl;
        }
      }
    }
    for (std::size_t j = 0; j < nv; ++j) {
      const double g = u[gam(j)];
      f[2 * j] += -inj_ng[j] + (1.0 - g) * withdraw[j];
      f[2 * j + 1] += -inj_h2[j] + g * withdraw[j];
      if (jac) {
        (*jac)(2 * j, gam(j)) -= withdraw[j];
        (*jac)(2 * j + 1, gam(j)) += withdraw[j];
      }
    }
    for (std::size_t k = 0; k < ns; ++k) {
      const std::size_t j = slack_junctions[k];
      const double g = u[gam(j)];
      const double m = u[mk(k)];
      f[2 * j] -= (1.0 - g) * m;
      f[2 * j + 1] -= g * m;
      if (jac) {
        (*jac)(2 * j, mk(k)) -= (1.0 - g);
        (*jac)(2 * j, gam(j)) += m;
        (*jac)(2 * j + 1, mk(k)) -= g;
        (*jac)(2 * j + 1, gam(j)) -= m;
      }
    }
    row = 2 * nv;
    for (std::size_t p = 0; p < np; ++p, ++row) {
      const auto& pipe = net.pipes()[p];
      const std::size_t i = net.junction_index(pipe.from), j = net.junction_index(pipe.to);
      const std::size_t e = p;  // pipes come first in `edges`
      const double fl = u[phi(e)];
      const double g = u[gpipe(p)];
      const double v = v0 + dv * g;
      f[row] = u[pi(i)] - u[pi(j)] - beta[p] * v * fl * std::abs(fl);
      if (jac) {
        (*jac)(row, pi(i)) = 1.0;
        (*jac)(row, pi(j)) = -1.0;
        (*jac)(row, phi(e)) = -beta[p] * v * 2.0 * std::abs(fl);
        (*jac)(row, gpipe(p)) = -beta[p] * dv * fl * std::abs(fl);
      }
    }
    for (std::size_t c = 0; c < net.compressors().size(); ++c, ++row) {
      const auto& comp = net.compressors()[c];
      const std::size_t i = net.junction_index(comp.from), j = net.junction_index(comp.to);
      const double a2 = alpha[c] * alpha[c];
      f[row] = u[pi(j)] - a2 * u[pi(i)];
      if (jac) {
        (*jac)(row, pi(j)) = 1.0;
        (*jac)(row, pi(i)) = -a2;
      }
    }
    for (std::size_t p = 0; p < np; ++p, ++row) {
      const std::size_t i = net.junction_index(net.pipes()[p].from);
      f[row] = u[gam(i)] - u[gpipe(p)];
      if (jac) {
        (*jac)(row, gam(i)) = 1.0;
        (*jac)(row, gpipe(p)) = -1.0;
      }
    }
    for (std::size_t k = 0; k < ns; ++k, ++row) {
      const std::size_t j = slack_junctions[k];
      const double sig = *net.junctions()[j].slack_pressure / sc.p0;
      f[row] = u[pi(j)] - sig * sig;
      if (jac) (*jac)(row, pi(j)) = 1.0;
    }
  }
};

}  // namespace

const char* SimulationError::code_name() const noexcept {
  switch (code_) {
    case Code::NonConvergence: return "non_convergence";
    case Code::NegativePressure: return "negative_pressure";
    case Code::InvalidControls: return "invalid_controls";
  }
  return "unknown";
}

ControlAssignment ControlAssignment::from_primal(const PhysicalPrimal& primal) {
  // Interior-point iterates satisfy s >= 0 and alpha >= 1 only to tolerance.
  ControlAssignment c;
  for (const auto& [id, v] : primal.supply_ng) c.supply_ng[id] = std::max(0.0, v);
  for (const auto& [id, v] : primal.supply_h2) c.supply_h2[id] = std::max(0.0, v);
  for (const auto& [id, v] : primal.demand) c.demand[id] = std::max(0.0, v);
  for (const auto& [id, v] : primal.alpha) c.alpha[id] = std::max(1.0, v);
  return c;
}

SimulationState simulate(const Network& net, const ControlAssignment& controls,
                         const GasConstants& gc, const ScalingConfig& sc) {
  sc.validate();
  auto check_ids = [&](const std::map<std::string, double>& m, bool want_supply,
                       std::optional<GNodeKind> kind) {
    for (const auto& [id, v] : m) {
      if (!net.has_gnode(id))
        throw SimulationError(SimulationError::Code::InvalidControls, "unknown gnode", id);
      const auto& g = net.gnode(id);
      if (g.is_supply() != want_supply || (kind && g.kind != *kind))
        throw SimulationError(SimulationError::Code::InvalidControls, "control does not match gnode kind", id);
      if (!(v >= 0.0) || !std::isfinite(v))
        throw SimulationError(SimulationError::Code::InvalidControls, "controls must be nonnegative", id);
    }
  };
  check_ids(controls.supply_ng, true, GNodeKind::NGSupply);
  check_ids(controls.supply_h2, true, GNodeKind::H2Supply);
  check_ids(controls.demand, false, std::nullopt);
  for (const auto& [id, a] : controls.alpha) {
    bool found = false;
    for (const auto& c : net.compressors()) found = found || c.id == id;
    if (!found) throw SimulationError(SimulationError::Code::InvalidControls, "unknown compressor", id);
    if (!(a >= 1.0) || !std::isfinite(a))
      throw SimulationError(SimulationError::Code::InvalidControls, "boost ratio must be >= 1", id);
  }

  System sys{net, gc, sc, net.junctions().size(), net.pipes().size() + net.compressors().size(),
             net.pipes().size(), 0, {}, {}, {}, {}, {}, {}, {}};
  for (std::size_t p = 0; p < net.pipes().size(); ++p) sys.edges.push_back({EdgeKind::Pipe, p});
  for (std::size_t c = 0; c < net.compressors().size(); ++c) sys.edges.push_back({EdgeKind::Compressor, c});
  for (std::size_t j = 0; j < net.junctions().size(); ++j)
    if (net.junctions()[j].is_slack()) sys.slack_junctions.push_back(j);
  sys.ns = sys.slack_junctions.size();
  for (const auto& p : net.pipes()) {
    const double lbar = p.length / sc.l0, dbar = p.diameter / sc.l0, abar = p.area / sc.area0;
    sys.beta.push_back(p.friction * lbar / (dbar * abar * abar) * sc.u0 * sc.u0 / sc.a0_sq());
  }
  for (const auto& c : net.compressors()) sys.alpha.push_back(lookup(controls.alpha, c.id, 1.0));
  sys.inj_ng.assign(sys.nv, 0.0);
  sys.inj_h2.assign(sys.nv, 0.0);
  sys.withdraw.assign(sys.nv, 0.0);
  double total_in = 0.0, total_h2 = 0.0;
  for (const auto& g : net.gnodes()) {
    const std::size_t j = net.junction_index(g.junction);
    if (g.kind == GNodeKind::NGSupply) {
      const double v = lookup(controls.supply_ng, g.id, 0.0) / sc.phi0;
      sys.inj_ng[j] += v;
      total_in += v;
    } else if (g.kind == GNodeKind::H2Supply) {
      const double v = lookup(controls.supply_h2, g.id, 0.0) / sc.phi0;
      sys.inj_h2[j] += v;
      total_in += v;
      total_h2 += v;
    } else {
      sys.withdraw[j] += lookup(controls.demand, g.id, 0.0) / sc.phi0;
    }
  }

  const std::size_t n = sys.size();
  VectorXd u = VectorXd::Zero(n);

  // Pressures: propagate slack values through compressors, flat across pipes.
  {
    std::vector<double> p2(sys.nv, -1.0);
    std::vector<std::size_t> queue;
    for (std::size_t j : sys.slack_junctions) {
      const double s = *net.junctions()[j].slack_pressure / sc.p0;
      p2[j] = s * s;
      queue.push_back(j);
    }
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const std::size_t j = queue[q];
      const auto& inc = net.incidence(net.junctions()[j].id);
      auto visit = [&](EdgeRef r, bool forward) {
        const std::size_t k = net.junction_index(forward ? net.edge_to(r) : net.edge_from(r));
        if (p2[k] >= 0.0) return;
        double factor = 1.0;
        if (r.kind == EdgeKind::Compressor) {
          const double a2 = sys.alpha[r.index] * sys.alpha[r.index];
          factor = forward ? a2 : 1.0 / a2;
        }
        p2[k] = p2[j] * factor;
        queue.push_back(k);
      };
      for (auto r : inc.outgoing) visit(r, true);
      for (auto r : inc.incoming) visit(r, false);
    }
    for (std::size_t j = 0; j < sys.nv; ++j) u[sys.pi(j)] = p2[j];
  }
  // Flows and makeup: minimum-norm solution of the linear mass balance.
  {
    MatrixXd a = MatrixXd::Zero(sys.nv, sys.ne + sys.ns);
    VectorXd b(sys.nv);
    for (std::size_t e = 0; e < sys.ne; ++e) {
      a(net.junction_index(net.edge_from(sys.edges[e])), e) += 1.0;
      a(net.junction_index(net.edge_to(sys.edges[e])), e) -= 1.0;
    }
    for (std::size_t k = 0; k < sys.ns; ++k) a(sys.slack_junctions[k], sys.ne + k) = -1.0;
    for (std::size_t j = 0; j < sys.nv; ++j) b[j] = sys.inj_ng[j] + sys.inj_h2[j] - sys.withdraw[j];
    const VectorXd sol = a.completeOrthogonalDecomposition().solve(b);
    for (std::size_t e = 0; e < sys.ne; ++e) u[sys.phi(e)] = sol[e];
    for (std::size_t k = 0; k < sys.ns; ++k) u[sys.mk(k)] = sol[sys.ne + k];
  }
  const double gamma0 = total_in > 0.0 ? total_h2 / total_in : 0.0;
  for (std::size_t j = 0; j < sys.nv; ++j) u[sys.gam(j)] = gamma0;
  for (std::size_t p = 0; p < sys.np; ++p) u[sys.gpipe(p)] = gamma0;

  VectorXd f;
  MatrixXd jac;
  sys.evaluate(u, f, &jac);
  double norm = f.cwiseAbs().maxCoeff();
  int iter = 0;
  for (; iter < 200 && norm > kTargetResidual; ++iter) {
    const VectorXd du = jac.completeOrthogonalDecomposition().solve(-f);
    if (!du.allFinite()) break;
    double t = 1.0;
    bool accepted = false;
    const double f2 = f.squaredNorm();
    for (int k = 0; k < 50; ++k, t *= 0.5) {
      VectorXd ut = u + t * du;
      for (std::size_t j = 0; j < sys.nv; ++j) ut[sys.pi(j)] = std::max(ut[sys.pi(j)], kPiFloor);
      VectorXd ft;
      sys.evaluate(ut, ft, nullptr);
      if (ft.allFinite() && ft.squaredNorm() < (1.0 - 1e-4 * t) * f2) {
        u = ut;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    sys.evaluate(u, f, &jac);
    norm = f.cwiseAbs().maxCoeff();
  }

  bool floored = false;
  std::string floored_id;
  for (std::size_t j = 0; j < sys.nv; ++j)
    if (u[sys.pi(j)] <= kPiFloor) {
      floored = true;
      floored_id = net.junctions()[j].id;
    }
  if (floored)
    throw SimulationError(SimulationError::Code::NegativePressure,
                          "squared pressure left the positive domain", floored_id);
  if (!(norm <= kAcceptResidual))
    throw SimulationError(SimulationError::Code::NonConvergence,
                          "Newton iteration did not converge (residual " + std::to_string(norm) + ")");

  SimulationState st;
  st.residual = norm;
  st.iterations = iter;
  for (std::size_t j = 0; j < sys.nv; ++j) {
    const auto& id = net.junctions()[j].id;
    st.pressure[id] = std::sqrt(u[sys.pi(j)]) * sc.p0;
    st.gamma_node[id] = u[sys.gam(j)];
  }
  for (std::size_t e = 0; e < sys.ne; ++e) st.flow[net.edge_id(sys.edges[e])] = u[sys.phi(e)] * sc.phi0;
  for (std::size_t p = 0; p < sys.np; ++p) st.gamma_edge[net.pipes()[p].id] = u[sys.gpipe(p)];
  for (std::size_t k = 0; k < sys.ns; ++k)
    st.makeup[net.junctions()[sys.slack_junctions[k]].id] = u[sys.mk(k)] * sc.phi0;
  return st;
}

ConservationResiduals conservation_residuals(const Network& net, const ControlAssignment& controls,
                                             const std::map<std::string, double>& gamma_node,
                                             const std::map<std::string, double>& makeup,
                                             double phi0) {
  ConservationResiduals r;
  for (const auto& g : net.gnodes()) {
    const double gam = lookup(gamma_node, g.junction, 0.0);
    if (g.kind == GNodeKind::NGSupply) {
      r.total_mass += lookup(controls.supply_ng, g.id, 0.0);
    } else if (g.kind == GNodeKind::H2Supply) {
      const double v = lookup(controls.supply_h2, g.id, 0.0);
      r.total_mass += v;
      r.h2_mass += v;
    } else {
      const double d = lookup(controls.demand, g.id, 0.0);
      r.total_mass -= d;
      r.h2_mass -= gam * d;
    }
  }
  for (const auto& [id, m] : makeup) {
    r.total_mass += m;
    r.h2_mass += lookup(gamma_node, id, 0.0) * m;
  }
  r.total_mass /= phi0;
  r.h2_mass /= phi0;
  return r;
}

CrosscheckReport crosscheck(const Solution& solution, const AssembledProblem& problem) {
  if (solution.status != SolveStatus::Optimal)
    throw std::logic_error("crosscheck requires an optimal solution");
  return crosscheck(solution.primal, problem);
}

CrosscheckReport crosscheck(const PhysicalPrimal& primal, const AssembledProblem& problem) {
  const auto& net = problem.network();
  const auto& sc = problem.scaling();
  const SimulationState st =
      simulate(net, ControlAssignment::from_primal(primal), problem.gas(), sc);
  CrosscheckReport rep;
  auto record = [&](const std::string& label, double a, double b, double ref) {
    const double dev = std::abs(a - b) / std::max({std::abs(a), std::abs(b), ref});
    rep.deviation[label] = dev;
    if (rep.worst.empty() || dev > rep.max_deviation) {
      rep.max_deviation = dev;
      rep.worst = label;
    }
  };
  for (const auto& [id, p] : st.pressure) record("pressure:" + id, primal.pressure.at(id), p, sc.p0);
  for (const auto& [id, f] : st.flow) record("flow:" + id, primal.flow.at(id), f, sc.phi0);
  for (const auto& [id, m] : st.makeup) record("makeup:" + id, 0.0, m, sc.phi0);

  const double min_throughput = 1e-8 * sc.phi0;
  for (const auto& j : net.junctions()) {
    double through = 0.0;
    const auto& inc = net.incidence(j.id);
    for (auto r : inc.incoming) through += std::max(0.0, st.flow.at(net.edge_id(r)));
    for (auto r : inc.outgoing) through += std::max(0.0, -st.flow.at(net.edge_id(r)));
    for (std::size_t gi : inc.gnodes) {
      const auto& g = net.gnodes()[gi];
      if (g.kind == GNodeKind::NGSupply) through += lookup(primal.supply_ng, g.id, 0.0);
      if (g.kind == GNodeKind::H2Supply) through += lookup(primal.supply_h2, g.id, 0.0);
    }
    if (j.is_slack()) through += std::max(0.0, st.makeup.at(j.id));
    if (through > min_throughput)
      record("gamma:" + j.id, primal.gamma_node.at(j.id), st.gamma_node.at(j.id), 1.0);
  }
  for (const auto& p : net.pipes())
    if (std::abs(st.flow.at(p.id)) > min_throughput)
      record("gamma_edge:" + p.id, primal.gamma_edge.at(p.id), st.gamma_edge.at(p.id), 1.0);
  rep.pass = rep.max_deviation <= kCrosscheckTolerance;
  return rep;
}

}  // namespace h2blend

#include "h2blend/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace h2blend {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ipow(double x, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= x;
  return r;
}

Monomial mono(double coef, std::initializer_list<std::size_t> vars) {
  Monomial m;
  m.coef = coef;
  for (std::size_t v : vars) {
    bool merged = false;
    for (auto& f : m.factors)
      if (f.first == v) {
        ++f.second;
        merged = true;
      }
    if (!merged) m.factors.emplace_back(v, 1);
  }
  return m;
}

[[noreturn]] void assembly_error(const std::string& message, const std::string& id) {
  throw NetworkError("assembly_error", message, id);
}

}  // namespace

ScalingConfig ScalingConfig::defaults(const GasConstants& gc, double p0, double l0, double area0) {
  ScalingConfig s;
  s.p0 = p0;
  s.l0 = l0;
  s.area0 = area0;
  s.a0 = std::sqrt(gc.a_ng * gc.a_h2);
  s.u0 = std::ceil(s.a0) / 300.0;
  s.derive();
  return s;
}

ScalingConfig& ScalingConfig::derive() {
  rho0 = p0 / (a0 * a0);
  phi0 = rho0 * u0 * area0;
  return *this;
}

void ScalingConfig::validate() const {
  for (double v : {p0, l0, a0, area0, rho0, u0, phi0, objective_scale})
    if (!std::isfinite(v) || v <= 0.0) throw std::invalid_argument("scaling constants must be positive");
  if (std::abs(rho0 - p0 / (a0 * a0)) > 1e-12 * rho0)
    throw std::invalid_argument("rho0 must equal p0 / a0^2");
  if (std::abs(phi0 - rho0 * u0 * area0) > 1e-12 * phi0)
    throw std::invalid_argument("phi0 must equal rho0 * u0 * area0");
}

const char* to_string(VarKind kind) {
  switch (kind) {
    case VarKind::SupplyH2: return "s_h2";
    case VarKind::SupplyNG: return "s_ng";
    case VarKind::Demand: return "d";
    case VarKind::Alpha: return "alpha";
    case VarKind::Flow: return "phi";
    case VarKind::GammaEdge: return "gamma_edge";
    case VarKind::GammaNode: return "gamma";
    case VarKind::Pressure: return "p";
  }
  return "unknown";
}

VariableLayout::VariableLayout(const Network& net) {
  auto add = [&](VarKind kind, const std::string& id) {
    lookup_.emplace(std::make_pair(kind, id), entries_.size());
    entries_.push_back({kind, id});
  };
  for (const auto& g : net.gnodes())
    if (g.kind == GNodeKind::H2Supply) add(VarKind::SupplyH2, g.id);
  for (const auto& g : net.gnodes())
    if (g.kind == GNodeKind::NGSupply) add(VarKind::SupplyNG, g.id);
  for (const auto& g : net.gnodes())
    if (g.is_demand()) add(VarKind::Demand, g.id);
  for (const auto& c : net.compressors()) add(VarKind::Alpha, c.id);
  std::vector<std::string> edges;
  for (const auto& p : net.pipes()) edges.push_back(p.id);
  for (const auto& c : net.compressors()) edges.push_back(c.id);
  std::sort(edges.begin(), edges.end());
  for (const auto& e : edges) add(VarKind::Flow, e);
  for (const auto& p : net.pipes()) add(VarKind::GammaEdge, p.id);
  for (const auto& j : net.junctions()) add(VarKind::GammaNode, j.id);
  for (const auto& j : net.junctions()) add(VarKind::Pressure, j.id);
}

std::size_t VariableLayout::index(VarKind kind, const std::string& id) const {
  auto it = lookup_.find({kind, id});
  if (it == lookup_.end())
    throw NetworkError("unknown_id", std::string("no variable ") + to_string(kind), id);
  return it->second;
}

bool VariableLayout::contains(VarKind kind, const std::string& id) const {
  return lookup_.count({kind, id}) != 0;
}

double Polynomial::value(const Eigen::VectorXd& x) const {
  double v = constant;
  for (const auto& t : terms) {
    double p = t.coef;
    for (const auto& [k, e] : t.factors) p *= ipow(x[k], e);
    v += p;
  }
  return v;
}

void Polynomial::add_gradient(const Eigen::VectorXd& x, double weight,
                              Eigen::Ref<Eigen::VectorXd> g) const {
  for (const auto& t : terms) {
    const std::size_t nf = t.factors.size();
    for (std::size_t a = 0; a < nf; ++a) {
      const auto [ka, ea] = t.factors[a];
      double p = weight * t.coef * ea * ipow(x[ka], ea - 1);
      for (std::size_t b = 0; b < nf; ++b)
        if (b != a) p *= ipow(x[t.factors[b].first], t.factors[b].second);
      g[ka] += p;
    }
  }
}

void Polynomial::add_hessian(const Eigen::VectorXd& x, double weight, Eigen::MatrixXd& h) const {
  for (const auto& t : terms) {
    const std::size_t nf = t.factors.size();
    for (std::size_t a = 0; a < nf; ++a) {
      const auto [ka, ea] = t.factors[a];
      if (ea >= 2) {
        double p = weight * t.coef * ea * (ea - 1) * ipow(x[ka], ea - 2);
        for (std::size_t c = 0; c < nf; ++c)
          if (c != a) p *= ipow(x[t.factors[c].first], t.factors[c].second);
        h(ka, ka) += p;
      }
      for (std::size_t b = a + 1; b < nf; ++b) {
        const auto [kb, eb] = t.factors[b];
        double p = weight * t.coef * ea * ipow(x[ka], ea - 1) * eb * ipow(x[kb], eb - 1);
        for (std::size_t c = 0; c < nf; ++c)
          if (c != a && c != b) p *= ipow(x[t.factors[c].first], t.factors[c].second);
        h(ka, kb) += p;
        h(kb, ka) += p;
      }
    }
  }
}

AssembledProblem::AssembledProblem(Network net, GasConstants gc, ScalingConfig sc)
    : network_(std::move(net)), gc_(gc), scaling_(sc), layout_(network_) {}

std::size_t AssembledProblem::equality_row(const std::string& kind, const std::string& id) const {
  auto it = eq_lookup_.find(kind + ":" + id);
  if (it == eq_lookup_.end()) throw NetworkError("unknown_id", "no equality row " + kind, id);
  return it->second;
}

std::size_t AssembledProblem::inequality_row(const std::string& kind, const std::string& id) const {
  auto it = ineq_lookup_.find(kind + ":" + id);
  if (it == ineq_lookup_.end()) throw NetworkError("unknown_id", "no inequality row " + kind, id);
  return it->second;
}

double AssembledProblem::objective(const Eigen::VectorXd& x) const {
  double f = objective_poly_.value(x);
  for (const auto& t : compressor_terms_)
    f += t.coef * x[t.phi] * compressor_power_per_flow(x[t.alpha], x[t.gamma], gc_).w;
  return f;
}

double AssembledProblem::economic_value(const Eigen::VectorXd& x) const {
  return -objective(x) / scaling_.objective_scale;
}

Eigen::VectorXd AssembledProblem::objective_gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  objective_poly_.add_gradient(x, 1.0, g);
  for (const auto& t : compressor_terms_) {
    const auto d = compressor_power_per_flow(x[t.alpha], x[t.gamma], gc_);
    g[t.phi] += t.coef * d.w;
    g[t.alpha] += t.coef * x[t.phi] * d.w_a;
    g[t.gamma] += t.coef * x[t.phi] * d.w_g;
  }
  return g;
}

Eigen::VectorXd AssembledProblem::equality_residuals(const Eigen::VectorXd& x) const {
  Eigen::VectorXd r(eq_rows_.size());
  for (std::size_t i = 0; i < eq_rows_.size(); ++i) r[i] = eq_rows_[i].value(x);
  return r;
}

Eigen::VectorXd AssembledProblem::inequality_residuals(const Eigen::VectorXd& x) const {
  Eigen::VectorXd r(ineq_rows_.size());
  for (std::size_t i = 0; i < ineq_rows_.size(); ++i) r[i] = ineq_rows_[i].value(x);
  return r;
}

Eigen::MatrixXd AssembledProblem::equality_jacobian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(eq_rows_.size(), x.size());
  Eigen::VectorXd row(x.size());
  for (std::size_t i = 0; i < eq_rows_.size(); ++i) {
    row.setZero();
    eq_rows_[i].add_gradient(x, 1.0, row);
    j.row(i) = row.transpose();
  }
  return j;
}

Eigen::MatrixXd AssembledProblem::inequality_jacobian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(ineq_rows_.size(), x.size());
  Eigen::VectorXd row(x.size());
  for (std::size_t i = 0; i < ineq_rows_.size(); ++i) {
    row.setZero();
    ineq_rows_[i].add_gradient(x, 1.0, row);
    j.row(i) = row.transpose();
  }
  return j;
}

Eigen::MatrixXd AssembledProblem::lagrangian_hessian(const Eigen::VectorXd& x,
                                                     const Eigen::VectorXd& lambda,
                                                     const Eigen::VectorXd& mu,
                                                     double obj_factor) const {
  if (static_cast<std::size_t>(lambda.size()) != eq_rows_.size() ||
      static_cast<std::size_t>(mu.size()) != ineq_rows_.size())
    throw std::invalid_argument("multiplier dimensions do not match constraint counts");
  const Eigen::Index n = x.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  objective_poly_.add_hessian(x, obj_factor, h);
  for (const auto& t : compressor_terms_) {
    const auto d = compressor_power_per_flow(x[t.alpha], x[t.gamma], gc_);
    const double c = obj_factor * t.coef;
    const double phi = x[t.phi];
    h(t.phi, t.alpha) += c * d.w_a;
    h(t.alpha, t.phi) += c * d.w_a;
    h(t.phi, t.gamma) += c * d.w_g;
    h(t.gamma, t.phi) += c * d.w_g;
    h(t.alpha, t.alpha) += c * phi * d.w_aa;
    h(t.alpha, t.gamma) += c * phi * d.w_ag;
    h(t.gamma, t.alpha) += c * phi * d.w_ag;
    h(t.gamma, t.gamma) += c * phi * d.w_gg;
  }
  for (std::size_t i = 0; i < eq_rows_.size(); ++i)
    if (lambda[i] != 0.0) eq_rows_[i].add_hessian(x, lambda[i], h);
  for (std::size_t i = 0; i < ineq_rows_.size(); ++i)
    if (mu[i] != 0.0) ineq_rows_[i].add_hessian(x, -mu[i], h);
  return h;
}

double AssembledProblem::scale_factor(VarKind kind) const {
  switch (kind) {
    case VarKind::SupplyH2:
    case VarKind::SupplyNG:
    case VarKind::Demand:
    case VarKind::Flow: return scaling_.phi0;
    case VarKind::Pressure: return scaling_.p0;
    default: return 1.0;
  }
}

namespace {

template <class P>
auto& slot(P& p, VarKind kind) {
  switch (kind) {
    case VarKind::SupplyH2: return p.supply_h2;
    case VarKind::SupplyNG: return p.supply_ng;
    case VarKind::Demand: return p.demand;
    case VarKind::Alpha: return p.alpha;
    case VarKind::Flow: return p.flow;
    case VarKind::GammaEdge: return p.gamma_edge;
    case VarKind::GammaNode: return p.gamma_node;
    case VarKind::Pressure: return p.pressure;
  }
  return p.pressure;
}

}  // namespace

PhysicalPrimal AssembledProblem::rescale_solution(const Eigen::VectorXd& x) const {
  PhysicalPrimal p;
  for (std::size_t k = 0; k < layout_.size(); ++k) {
    const auto& e = layout_[k];
    slot(p, e.kind)[e.id] = x[k] * scale_factor(e.kind);
  }
  return p;
}

Eigen::VectorXd AssembledProblem::scale_solution(const PhysicalPrimal& p) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout_.size());
  for (std::size_t k = 0; k < layout_.size(); ++k) {
    const auto& e = layout_[k];
    const auto& m = slot(p, e.kind);
    auto it = m.find(e.id);
    if (it != m.end()) x[k] = it->second / scale_factor(e.kind);
  }
  return x;
}

AssembledProblem assemble(const Network& network, const GasConstants& gc,
                          const ScalingConfig& scaling) {
  gc.validate();
  scaling.validate();
  AssembledProblem pb(network, gc, scaling);
  const auto& net = pb.network_;
  const auto& lay = pb.layout_;
  const double phi0 = scaling.phi0;
  const double p0 = scaling.p0;
  const double w = scaling.objective_scale;
  const double e0 = phi0 * gc.r_ng;
  const double dr = gc.r_h2 - gc.r_ng;
  const double offset_ratio = gc.r_h2 / gc.r_ng * gc.zeta_ng;

  for (const auto& g : net.gnodes()) {
    if (g.is_supply() && !g.offer_price) assembly_error("supply gnode lacks offer_price", g.id);
    if (g.is_demand() && !g.energy_bid_price)
      assembly_error("demand gnode lacks energy_bid_price", g.id);
    if (g.kind == GNodeKind::DemandOptimized && !g.g_max)
      assembly_error("optimized demand gnode lacks g_max", g.id);
    if (g.kind == GNodeKind::DemandFixed && !g.g_fixed)
      assembly_error("fixed demand gnode lacks g_fixed", g.id);
  }

  const std::size_t n = lay.size();
  pb.lower_ = Eigen::VectorXd::Constant(n, -kInf);
  pb.upper_ = Eigen::VectorXd::Constant(n, kInf);
  // bounds that an equality row pins the variable onto are left out, the
  // barrier needs an interior
  auto pinned_to_zero = [&](const GNode& g) {
    return (g.g_max && *g.g_max == 0.0) || (g.g_fixed && *g.g_fixed == 0.0);
  };
  // junctions downstream of an H2 supply
  std::set<std::string> reached;
  std::vector<std::string> queue;
  for (const auto& g : net.gnodes())
    if (g.kind == GNodeKind::H2Supply && !(g.s_max && *g.s_max == 0.0) &&
        reached.insert(g.junction).second)
      queue.push_back(g.junction);
  while (!queue.empty()) {
    const std::string j = queue.back();
    queue.pop_back();
    for (auto e : net.incidence(j).outgoing)
      if (reached.insert(net.edge_to(e)).second) queue.push_back(net.edge_to(e));
  }
  for (const auto& j : net.junctions())
    if (!reached.count(j.id) && j.gamma_min == 0.0) {
      pb.forced_zero_.insert(j.id);
      pb.implied_binding_.push_back("gamma_min:" + j.id);
      if (j.gamma_max == 0.0) pb.implied_binding_.push_back("gamma_max:" + j.id);
    }
  auto gamma_pinned = [&](const std::string& junction) {
    const auto& j = net.junction(junction);
    if (pb.forced_zero_.count(junction)) return true;
    return j.gamma_min == j.gamma_max && (j.gamma_min == 0.0 || j.gamma_max == 1.0);
  };
  for (std::size_t k = 0; k < n; ++k) {
    switch (lay[k].kind) {
      case VarKind::Flow: pb.lower_[k] = 0.0; break;
      case VarKind::Demand:
        if (!pinned_to_zero(net.gnode(lay[k].id))) pb.lower_[k] = 0.0;
        break;
      case VarKind::GammaEdge:
        if (gamma_pinned(net.pipes()[net.pipe_index(lay[k].id)].from)) break;
        pb.lower_[k] = 0.0;
        pb.upper_[k] = 1.0;
        break;
      default: break;
    }
  }

  auto var = [&](VarKind kind, const std::string& id) { return lay.index(kind, id); };
  auto edge_gamma = [&](EdgeRef e) {
    return e.kind == EdgeKind::Pipe ? var(VarKind::GammaEdge, net.edge_id(e))
                                    : var(VarKind::GammaNode, net.edge_from(e));
  };
  auto add_eq = [&](std::string kind, const std::string& id, double scale, Polynomial poly) {
    pb.eq_lookup_.emplace(kind + ":" + id, pb.eq_rows_.size());
    pb.eq_info_.push_back({std::move(kind), id, scale});
    pb.eq_rows_.push_back(std::move(poly));
  };
  auto add_ineq = [&](std::string kind, const std::string& id, double scale, Polynomial poly) {
    pb.ineq_lookup_.emplace(kind + ":" + id, pb.ineq_rows_.size());
    pb.ineq_info_.push_back({std::move(kind), id, scale});
    pb.ineq_rows_.push_back(std::move(poly));
  };

  // Objective: f = -w * J_EV.
  for (const auto& g : net.gnodes()) {
    if (g.kind == GNodeKind::H2Supply) {
      pb.objective_poly_.terms.push_back(mono(w * *g.offer_price * phi0, {var(VarKind::SupplyH2, g.id)}));
    } else if (g.kind == GNodeKind::NGSupply) {
      pb.objective_poly_.terms.push_back(mono(w * *g.offer_price * phi0, {var(VarKind::SupplyNG, g.id)}));
    } else {
      const std::size_t d = var(VarKind::Demand, g.id);
      const std::size_t gam = var(VarKind::GammaNode, g.junction);
      const double cd = *g.energy_bid_price;
      pb.objective_poly_.terms.push_back(mono(-w * cd * phi0 * gc.r_ng, {d}));
      pb.objective_poly_.terms.push_back(
          mono(-w * phi0 * (cd * dr + g.carbon_price * offset_ratio), {d, gam}));
    }
  }
  for (const auto& c : net.compressors())
    pb.compressor_terms_.push_back({var(VarKind::Alpha, c.id), var(VarKind::GammaNode, c.from),
                                    var(VarKind::Flow, c.id), w * gc.eta * phi0});

  // Mass balances: outflow - inflow - injection + withdrawal = 0.
  for (const auto& j : net.junctions()) {
    const auto& inc = net.incidence(j.id);
    Polynomial ng, h2;
    for (const auto& e : inc.outgoing) {
      const std::size_t f = var(VarKind::Flow, net.edge_id(e));
      const std::size_t ge = edge_gamma(e);
      ng.terms.push_back(mono(1.0, {f}));
      ng.terms.push_back(mono(-1.0, {ge, f}));
      h2.terms.push_back(mono(1.0, {ge, f}));
    }
    for (const auto& e : inc.incoming) {
      const std::size_t f = var(VarKind::Flow, net.edge_id(e));
      const std::size_t ge = edge_gamma(e);
      ng.terms.push_back(mono(-1.0, {f}));
      ng.terms.push_back(mono(1.0, {ge, f}));
      h2.terms.push_back(mono(-1.0, {ge, f}));
    }
    const std::size_t gam = var(VarKind::GammaNode, j.id);
    for (std::size_t gi : inc.gnodes) {
      const auto& g = net.gnodes()[gi];
      if (g.kind == GNodeKind::NGSupply) {
        ng.terms.push_back(mono(-1.0, {var(VarKind::SupplyNG, g.id)}));
      } else if (g.kind == GNodeKind::H2Supply) {
        h2.terms.push_back(mono(-1.0, {var(VarKind::SupplyH2, g.id)}));
      } else {
        const std::size_t d = var(VarKind::Demand, g.id);
        ng.terms.push_back(mono(1.0, {d}));
        ng.terms.push_back(mono(-1.0, {gam, d}));
        h2.terms.push_back(mono(1.0, {gam, d}));
      }
    }
    add_eq("ng_balance", j.id, phi0, std::move(ng));
    add_eq("h2_balance", j.id, phi0, std::move(h2));
  }

  const double a0sq = scaling.a0_sq();
  const double vbar_ng = gc.a_ng * gc.a_ng / a0sq;
  const double vbar_dh = (gc.a_h2 * gc.a_h2 - gc.a_ng * gc.a_ng) / a0sq;
  for (const auto& p : net.pipes()) {
    const double lbar = p.length / scaling.l0;
    const double dbar = p.diameter / scaling.l0;
    const double abar = p.area / scaling.area0;
    const double beta = p.friction * lbar / (dbar * abar * abar) * scaling.u0 * scaling.u0 / a0sq;
    const std::size_t pi = var(VarKind::Pressure, p.from);
    const std::size_t pj = var(VarKind::Pressure, p.to);
    const std::size_t f = var(VarKind::Flow, p.id);
    const std::size_t ge = var(VarKind::GammaEdge, p.id);
    Polynomial row;
    row.terms.push_back(mono(1.0, {pi, pi}));
    row.terms.push_back(mono(-1.0, {pj, pj}));
    row.terms.push_back(mono(-beta * vbar_ng, {f, f}));
    row.terms.push_back(mono(-beta * vbar_dh, {ge, f, f}));
    add_eq("weymouth", p.id, p0 * p0, std::move(row));
  }
  for (const auto& c : net.compressors()) {
    const std::size_t pi = var(VarKind::Pressure, c.from);
    const std::size_t pj = var(VarKind::Pressure, c.to);
    const std::size_t a = var(VarKind::Alpha, c.id);
    Polynomial row;
    row.terms.push_back(mono(1.0, {pj, pj}));
    row.terms.push_back(mono(-1.0, {a, a, pi, pi}));
    add_eq("boost", c.id, p0 * p0, std::move(row));
  }
  for (const auto& p : net.pipes()) {
    Polynomial row;
    row.terms.push_back(mono(1.0, {var(VarKind::GammaNode, p.from)}));
    row.terms.push_back(mono(-1.0, {var(VarKind::GammaEdge, p.id)}));
    add_eq("continuity", p.id, 1.0, std::move(row));
  }
  for (const auto& j : net.junctions()) {
    if (!j.is_slack()) continue;
    Polynomial row;
    row.constant = -*j.slack_pressure / p0;
    row.terms.push_back(mono(1.0, {var(VarKind::Pressure, j.id)}));
    add_eq("slack", j.id, p0, std::move(row));
  }
  for (const auto& g : net.gnodes()) {
    if (g.kind != GNodeKind::DemandFixed) continue;
    const std::size_t d = var(VarKind::Demand, g.id);
    const std::size_t gam = var(VarKind::GammaNode, g.junction);
    Polynomial row;
    row.constant = -*g.g_fixed / e0;
    row.terms.push_back(mono(1.0, {d}));
    row.terms.push_back(mono(dr / gc.r_ng, {d, gam}));
    add_eq("fixed_demand", g.id, e0, std::move(row));
  }

  for (const auto& j : net.junctions()) {
    const std::size_t pv = var(VarKind::Pressure, j.id);
    const std::size_t gam = var(VarKind::GammaNode, j.id);
    Polynomial pmin, gmin, gmax;
    pmin.constant = -j.p_min / p0;
    pmin.terms.push_back(mono(1.0, {pv}));
    gmin.constant = -j.gamma_min;
    gmin.terms.push_back(mono(1.0, {gam}));
    gmax.constant = j.gamma_max;
    gmax.terms.push_back(mono(-1.0, {gam}));
    add_ineq("min_pressure", j.id, p0, std::move(pmin));
    if (pb.forced_zero_.count(j.id)) continue;
    if (j.gamma_min == j.gamma_max) {
      add_eq("gamma_fixed", j.id, 1.0, std::move(gmin));
      continue;
    }
    add_ineq("gamma_min", j.id, 1.0, std::move(gmin));
    add_ineq("gamma_max", j.id, 1.0, std::move(gmax));
  }
  for (const auto& c : net.compressors()) {
    const std::size_t a = var(VarKind::Alpha, c.id);
    Polynomial pmax, amin, amax;
    pmax.constant = c.p_discharge_max / p0;
    pmax.terms.push_back(mono(-1.0, {a, var(VarKind::Pressure, c.from)}));
    amin.constant = -1.0;
    amin.terms.push_back(mono(1.0, {a}));
    amax.constant = c.alpha_max;
    amax.terms.push_back(mono(-1.0, {a}));
    add_ineq("discharge_max", c.id, p0, std::move(pmax));
    if (c.alpha_max == 1.0) {
      add_eq("boost_fixed", c.id, 1.0, std::move(amin));
      continue;
    }
    add_ineq("boost_min", c.id, 1.0, std::move(amin));
    add_ineq("boost_max", c.id, 1.0, std::move(amax));
  }
  for (const auto& g : net.gnodes()) {
    if (!g.is_supply()) continue;
    const std::size_t s =
        var(g.kind == GNodeKind::H2Supply ? VarKind::SupplyH2 : VarKind::SupplyNG, g.id);
    Polynomial smin;
    smin.terms.push_back(mono(1.0, {s}));
    if (g.s_max && *g.s_max == 0.0) {
      add_eq("supply_fixed", g.id, phi0, std::move(smin));
      continue;
    }
    add_ineq("supply_min", g.id, phi0, std::move(smin));
    if (g.s_max) {
      Polynomial smax;
      smax.constant = *g.s_max / phi0;
      smax.terms.push_back(mono(-1.0, {s}));
      add_ineq("supply_max", g.id, phi0, std::move(smax));
    }
  }
  for (const auto& g : net.gnodes()) {
    if (g.kind != GNodeKind::DemandOptimized) continue;
    const std::size_t d = var(VarKind::Demand, g.id);
    const std::size_t gam = var(VarKind::GammaNode, g.junction);
    Polynomial row;
    if (*g.g_max == 0.0) {
      row.terms.push_back(mono(1.0, {d}));
      add_eq("demand_fixed", g.id, phi0, std::move(row));
      continue;
    }
    row.constant = *g.g_max / e0;
    row.terms.push_back(mono(-1.0, {d}));
    row.terms.push_back(mono(-dr / gc.r_ng, {d, gam}));
    add_ineq("demand_max", g.id, e0, std::move(row));
  }
  return pb;
}

}  // namespace h2blend

#include "h2blend/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace h2blend {

namespace {

[[noreturn]] void invalid(const std::string& message, const std::string& element) {
  throw NetworkError("validation_error", message, element);
}

void require_finite_positive(double v, const char* what, const std::string& id) {
  if (!std::isfinite(v) || v <= 0.0) invalid(std::string(what) + " must be positive", id);
}

void require_nonnegative(const std::optional<double>& v, const char* what, const std::string& id) {
  if (v && (!std::isfinite(*v) || *v < 0.0)) invalid(std::string(what) + " must be nonnegative", id);
}

template <class T>
void sort_and_index(std::vector<T>& items, std::map<std::string, std::size_t>& lookup,
                    const char* what) {
  std::sort(items.begin(), items.end(), [](const T& a, const T& b) { return a.id < b.id; });
  lookup.clear();
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (items[k].id.empty()) invalid(std::string(what) + " with empty id", "");
    if (!lookup.emplace(items[k].id, k).second)
      invalid(std::string("duplicate ") + what + " id", items[k].id);
  }
}

std::size_t find_or_throw(const std::map<std::string, std::size_t>& lookup, const std::string& id,
                          const char* what) {
  auto it = lookup.find(id);
  if (it == lookup.end()) throw NetworkError("unknown_id", std::string("unknown ") + what, id);
  return it->second;
}

}  // namespace

const char* to_string(GNodeKind kind) {
  switch (kind) {
    case GNodeKind::H2Supply: return "h2_supply";
    case GNodeKind::NGSupply: return "ng_supply";
    case GNodeKind::DemandOptimized: return "demand_optimized";
    case GNodeKind::DemandFixed: return "demand_fixed";
  }
  return "unknown";
}

GNodeKind gnode_kind_from_string(const std::string& text) {
  if (text == "h2_supply") return GNodeKind::H2Supply;
  if (text == "ng_supply") return GNodeKind::NGSupply;
  if (text == "demand_optimized") return GNodeKind::DemandOptimized;
  if (text == "demand_fixed") return GNodeKind::DemandFixed;
  throw NetworkError("parse_error", "unknown gnode kind '" + text + "'");
}

Network Network::create(std::vector<Junction> junctions, std::vector<Pipe> pipes,
                        std::vector<Compressor> compressors, std::vector<GNode> gnodes) {
  Network net;
  net.junctions_ = std::move(junctions);
  net.pipes_ = std::move(pipes);
  net.compressors_ = std::move(compressors);
  net.gnodes_ = std::move(gnodes);
  net.validate_and_index();
  return net;
}

void Network::validate_and_index() {
  sort_and_index(junctions_, junction_lookup_, "junction");
  sort_and_index(pipes_, pipe_lookup_, "pipe");
  sort_and_index(compressors_, compressor_lookup_, "compressor");
  sort_and_index(gnodes_, gnode_lookup_, "gnode");

  if (junctions_.empty()) invalid("network has no junctions", "");

  bool any_slack = false;
  for (const auto& j : junctions_) {
    require_finite_positive(j.p_min, "p_min", j.id);
    if (!(j.gamma_min >= 0.0 && j.gamma_min <= j.gamma_max && j.gamma_max <= 1.0))
      invalid("gamma bounds must satisfy 0 <= gamma_min <= gamma_max <= 1", j.id);
    if (j.slack_pressure) {
      if (!std::isfinite(*j.slack_pressure) || *j.slack_pressure < j.p_min)
        invalid("slack pressure must be at least p_min", j.id);
      any_slack = true;
    }
  }
  if (!any_slack) invalid("network has no slack junction", "");

  auto check_endpoints = [&](const std::string& id, const std::string& from, const std::string& to) {
    if (!has_junction(from)) invalid("edge start '" + from + "' does not exist", id);
    if (!has_junction(to)) invalid("edge end '" + to + "' does not exist", id);
    if (from == to) invalid("edge endpoints must differ", id);
  };
  for (const auto& p : pipes_) {
    if (compressor_lookup_.count(p.id)) invalid("edge id shared by pipe and compressor", p.id);
    check_endpoints(p.id, p.from, p.to);
    require_finite_positive(p.length, "length", p.id);
    require_finite_positive(p.diameter, "diameter", p.id);
    require_finite_positive(p.area, "area", p.id);
    require_finite_positive(p.friction, "friction", p.id);
  }
  for (const auto& c : compressors_) {
    check_endpoints(c.id, c.from, c.to);
    if (!std::isfinite(c.alpha_max) || c.alpha_max < 1.0) invalid("alpha_max must be >= 1", c.id);
    require_finite_positive(c.p_discharge_max, "p_discharge_max", c.id);
  }

  std::map<std::string, int> junction_role;  // +1 supply, -1 demand
  for (const auto& g : gnodes_) {
    if (!has_junction(g.junction)) invalid("gnode junction '" + g.junction + "' does not exist", g.id);
    require_nonnegative(g.offer_price, "offer_price", g.id);
    require_nonnegative(g.energy_bid_price, "energy_bid_price", g.id);
    require_nonnegative(g.carbon_price, "carbon_price", g.id);
    require_nonnegative(g.s_max, "s_max", g.id);
    require_nonnegative(g.g_max, "g_max", g.id);
    require_nonnegative(g.g_fixed, "g_fixed", g.id);
    int role = g.is_supply() ? 1 : -1;
    auto [it, inserted] = junction_role.emplace(g.junction, role);
    if (!inserted && it->second != role)
      invalid("junction '" + g.junction + "' mixes supply and demand gnodes", g.id);
  }

  // Connectivity over the undirected edge graph.
  std::vector<std::size_t> parent(junctions_.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  auto unite = [&](const std::string& a, const std::string& b) {
    parent[find(junction_index(a))] = find(junction_index(b));
  };
  for (const auto& p : pipes_) unite(p.from, p.to);
  for (const auto& c : compressors_) unite(c.from, c.to);
  for (std::size_t k = 1; k < junctions_.size(); ++k)
    if (find(k) != find(0)) invalid("network is not connected", junctions_[k].id);

  incidence_.assign(junctions_.size(), Incidence{});
  for (std::size_t k = 0; k < pipes_.size(); ++k) {
    incidence_[junction_index(pipes_[k].to)].incoming.push_back({EdgeKind::Pipe, k});
    incidence_[junction_index(pipes_[k].from)].outgoing.push_back({EdgeKind::Pipe, k});
  }
  for (std::size_t k = 0; k < compressors_.size(); ++k) {
    incidence_[junction_index(compressors_[k].to)].incoming.push_back({EdgeKind::Compressor, k});
    incidence_[junction_index(compressors_[k].from)].outgoing.push_back({EdgeKind::Compressor, k});
  }
  for (std::size_t k = 0; k < gnodes_.size(); ++k)
    incidence_[junction_index(gnodes_[k].junction)].gnodes.push_back(k);
}

std::size_t Network::junction_index(const std::string& id) const {
  return find_or_throw(junction_lookup_, id, "junction");
}
std::size_t Network::pipe_index(const std::string& id) const {
  return find_or_throw(pipe_lookup_, id, "pipe");
}
std::size_t Network::compressor_index(const std::string& id) const {
  return find_or_throw(compressor_lookup_, id, "compressor");
}
std::size_t Network::gnode_index(const std::string& id) const {
  return find_or_throw(gnode_lookup_, id, "gnode");
}

const std::string& Network::edge_id(EdgeRef e) const {
  return e.kind == EdgeKind::Pipe ? pipes_[e.index].id : compressors_[e.index].id;
}
const std::string& Network::edge_from(EdgeRef e) const {
  return e.kind == EdgeKind::Pipe ? pipes_[e.index].from : compressors_[e.index].from;
}
const std::string& Network::edge_to(EdgeRef e) const {
  return e.kind == EdgeKind::Pipe ? pipes_[e.index].to : compressors_[e.index].to;
}

const Incidence& Network::incidence(const std::string& junction_id) const {
  return incidence_[junction_index(junction_id)];
}

Network Network::with_junction(const Junction& junction) const {
  auto js = junctions_;
  js[junction_index(junction.id)] = junction;
  return create(std::move(js), pipes_, compressors_, gnodes_);
}

Network Network::with_gnode(const GNode& gnode) const {
  auto gs = gnodes_;
  gs[gnode_index(gnode.id)] = gnode;
  return create(junctions_, pipes_, compressors_, std::move(gs));
}

}  // namespace h2blend

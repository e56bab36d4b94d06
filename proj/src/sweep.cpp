#include "h2blend/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace h2blend {

namespace {

[[noreturn]] void invalid(const std::string& message, const std::string& element = {}) {
  throw NetworkError("validation_error", message, element);
}

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& items, char sep) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k) out += sep;
    out += items[k];
  }
  return out;
}

}  // namespace

SweepSpec SweepSpec::parse_target(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) invalid("sweep target must look like kind:id", text);
  const std::string kind = text.substr(0, colon);
  SweepSpec s;
  if (kind == "demand_max") s.target = SweepTarget::DemandMax;
  else if (kind == "gamma_min") s.target = SweepTarget::GammaMin;
  else if (kind == "carbon_price") s.target = SweepTarget::CarbonPrice;
  else invalid("unknown sweep target '" + kind + "'", text);
  std::stringstream ids(text.substr(colon + 1));
  std::string id;
  while (std::getline(ids, id, ','))
    if (!id.empty()) s.ids.push_back(id);
  if (s.ids.empty()) invalid("sweep target names no component", text);
  return s;
}

std::string SweepSpec::target_label() const {
  const char* kind = target == SweepTarget::DemandMax ? "demand_max"
                     : target == SweepTarget::GammaMin ? "gamma_min"
                                                       : "carbon_price";
  return std::string(kind) + ":" + join(ids, ',');
}

void SweepSpec::validate(const Network& network) const {
  if (!(step > 0.0) || !std::isfinite(step)) invalid("sweep step must be positive");
  if (!(start <= stop) || !std::isfinite(start) || !std::isfinite(stop))
    invalid("sweep start must not exceed stop");
  if (ids.empty()) invalid("sweep target names no component");
  if (jobs < 1) invalid("jobs must be at least 1");
  for (const auto& id : ids) {
    if (target == SweepTarget::GammaMin) {
      if (!network.has_junction(id)) invalid("unknown junction", id);
    } else {
      if (!network.has_gnode(id)) invalid("unknown gnode", id);
      const auto& g = network.gnode(id);
      if (target == SweepTarget::DemandMax && g.kind != GNodeKind::DemandOptimized)
        invalid("demand_max requires an optimized demand gnode", id);
      if (target == SweepTarget::CarbonPrice && !g.is_demand())
        invalid("carbon_price requires a demand gnode", id);
    }
  }
}

std::vector<double> sweep_grid(double start, double stop, double step) {
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (long k = 0; k < count; ++k) grid.push_back(start + static_cast<double>(k) * step);
  return grid;
}

ProblemSpec apply_parameter(const ProblemSpec& base, const SweepSpec& spec, double value) {
  Network net = base.network;
  for (const auto& id : spec.ids) {
    if (spec.target == SweepTarget::GammaMin) {
      Junction j = net.junction(id);
      j.gamma_min = value;
      net = net.with_junction(j);
    } else {
      GNode g = net.gnode(id);
      if (spec.target == SweepTarget::DemandMax) g.g_max = value;
      else g.carbon_price = value;
      net = net.with_gnode(g);
    }
  }
  return ProblemSpec{std::move(net), base.gas, base.scaling, base.options};
}

SweepRow summarize(double parameter, const Solution& sol, const AssembledProblem& pb) {
  SweepRow row;
  row.parameter = parameter;
  row.status = sol.status;
  row.iterations = sol.iterations;
  row.objective = sol.objective;
  row.binding_set = sol.binding_set;
  const auto& net = pb.network();
  for (const auto& g : net.gnodes()) {
    if (!g.is_demand()) continue;
    const double d = sol.primal.demand.count(g.id) ? sol.primal.demand.at(g.id) : 0.0;
    const double gam = sol.primal.gamma_node.count(g.junction) ? sol.primal.gamma_node.at(g.junction) : 0.0;
    row.withdrawal[g.id] = d;
    row.gamma[g.id] = gam;
    row.energy[g.id] = d * blend_calorific(std::clamp(gam, 0.0, 1.0), pb.gas());
    auto it = sol.shadow_prices.find(g.junction);
    if (it != sol.shadow_prices.end()) row.shadow_prices[g.junction] = it->second;
  }
  for (const auto& [id, a] : sol.primal.alpha) row.alpha[id] = a;
  return row;
}

std::vector<double> detect_transitions(const std::vector<SweepRow>& rows) {
  std::vector<double> out;
  const SweepRow* prev = nullptr;
  for (const auto& r : rows) {
    if (r.status != SolveStatus::Optimal) continue;
    if (prev && prev->binding_set != r.binding_set) out.push_back(0.5 * (prev->parameter + r.parameter));
    prev = &r;
  }
  return out;
}

SweepResult run_sweep(const ProblemSpec& base, const SweepSpec& spec) {
  spec.validate(base.network);
  const auto grid = sweep_grid(spec.start, spec.stop, spec.step);
  SweepResult res;
  res.target = spec.target_label();
  std::set<std::string> junctions;
  for (const auto& g : base.network.gnodes())
    if (g.is_demand()) {
      res.demand_ids.push_back(g.id);
      junctions.insert(g.junction);
    }
  res.demand_junctions.assign(junctions.begin(), junctions.end());
  for (const auto& c : base.network.compressors()) res.compressor_ids.push_back(c.id);
  res.rows.resize(grid.size());

  auto solve_point = [&](std::size_t k, const std::optional<Solution>& warm) {
    const ProblemSpec ps = apply_parameter(base, spec, grid[k]);
    const AssembledProblem pb = assemble(ps);
    Solution sol = solve(pb, ps.options, warm);
    res.rows[k] = summarize(grid[k], sol, pb);
    return sol;
  };

  if (spec.warm_start) {
    std::optional<Solution> warm;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      Solution sol = solve_point(k, warm);
      if (sol.status == SolveStatus::Optimal) warm = std::move(sol);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k = next++; k < grid.size(); k = next++) solve_point(k, std::nullopt);
    };
    const int nthreads = std::max(1, std::min<int>(spec.jobs, static_cast<int>(grid.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  }
  res.transitions = detect_transitions(res.rows);
  return res;
}

void write_csv(const SweepResult& res, std::ostream& out) {
  std::vector<std::string> header{"parameter", "status", "iterations", "objective"};
  for (const auto& d : res.demand_ids) {
    header.push_back("energy_" + d);
    header.push_back("withdrawal_" + d);
    header.push_back("gamma_" + d);
  }
  for (const auto& j : res.demand_junctions) {
    header.push_back("shadow_price_ng_" + j);
    header.push_back("shadow_price_h2_" + j);
    header.push_back("shadow_price_blend_" + j);
  }
  for (const auto& c : res.compressor_ids) header.push_back("alpha_" + c);
  header.push_back("binding_set");
  out << join(header, ',') << '\n';

  const double nan = std::nan("");
  auto get = [&](const std::map<std::string, double>& m, const std::string& id) {
    auto it = m.find(id);
    return it == m.end() ? nan : it->second;
  };
  for (const auto& r : res.rows) {
    std::vector<std::string> cells{sci(r.parameter), to_string(r.status), std::to_string(r.iterations),
                                   sci(r.objective)};
    for (const auto& d : res.demand_ids) {
      cells.push_back(sci(get(r.energy, d)));
      cells.push_back(sci(get(r.withdrawal, d)));
      cells.push_back(sci(get(r.gamma, d)));
    }
    for (const auto& j : res.demand_junctions) {
      auto it = r.shadow_prices.find(j);
      const bool have = it != r.shadow_prices.end();
      cells.push_back(sci(have ? it->second.ng : nan));
      cells.push_back(sci(have ? it->second.h2 : nan));
      cells.push_back(sci(have ? it->second.blend : nan));
    }
    for (const auto& c : res.compressor_ids) cells.push_back(sci(get(r.alpha, c)));
    cells.push_back(join(r.binding_set, ';'));
    out << join(cells, ',') << '\n';
  }
}

void write_json(const SweepResult& res, std::ostream& out) {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json root;
  root["target"] = res.target;
  json rows = json::array();
  for (const auto& r : res.rows) {
    json o;
    o["parameter"] = num(r.parameter);
    o["status"] = to_string(r.status);
    o["iterations"] = r.iterations;
    o["objective"] = num(r.objective);
    for (const char* key : {"energy", "withdrawal", "gamma", "alpha"}) {
      const auto& m = std::string(key) == "energy"       ? r.energy
                      : std::string(key) == "withdrawal" ? r.withdrawal
                      : std::string(key) == "gamma"      ? r.gamma
                                                         : r.alpha;
      json sub = json::object();
      for (const auto& [id, v] : m) sub[id] = num(v);
      o[key] = sub;
    }
    json sp = json::object();
    for (const auto& [j, p] : r.shadow_prices)
      sp[j] = {{"ng", num(p.ng)}, {"h2", num(p.h2)}, {"blend", num(p.blend)}};
    o["shadow_prices"] = sp;
    o["binding_set"] = r.binding_set;
    rows.push_back(o);
  }
  root["rows"] = rows;
  root["transitions"] = res.transitions;
  out << root.dump(2) << '\n';
}

void export_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw NetworkError("io_error", "cannot write '" + path + "'", path);
  write_csv(result, out);
}

void export_json(const SweepResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw NetworkError("io_error", "cannot write '" + path + "'", path);
  write_json(result, out);
}

}  // namespace h2blend

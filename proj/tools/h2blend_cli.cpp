#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "h2blend/problem_file.hpp"
#include "h2blend/simulate.hpp"
#include "h2blend/sweep.hpp"

using namespace h2blend;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kDomain = 1, kUsage = 2 };

struct Shared {
  std::string network;
  std::string output;
  std::string format = "table";
  double tol = 0.0;
  int seed_count = 0;
  std::string log_level = "warn";
};

struct Failure {
  int exit_code;
  std::string code;
  std::string message;
  std::string element;
};

void report(const Failure& f) {
  json err = {{"code", f.code}, {"message", f.message}, {"element", f.element}};
  std::cerr << json{{"error", err}}.dump() << '\n';
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// accepts "networks/single_pipe" for networks/single_pipe.json
std::string resolve_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path) && fs::exists(path + ".json")) return path + ".json";
  return path;
}

ProblemSpec load(const Shared& sh) {
  ProblemSpec ps = load_problem(resolve_path(sh.network));
  if (sh.tol > 0.0) ps.options.kkt_tolerance = sh.tol;
  if (sh.seed_count > 0) ps.options.seed_count = sh.seed_count;
  if (sh.log_level == "debug") ps.options.log = &std::cerr;
  try {
    ps.options.validate();
  } catch (const std::invalid_argument& e) {
    throw Failure{kUsage, "usage_error", e.what(), ""};
  }
  return ps;
}

void info(const Shared& sh, const std::string& line) {
  if (sh.log_level == "info" || sh.log_level == "debug") std::cerr << line << '\n';
}

void emit(const Shared& sh, const std::string& text) {
  if (sh.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(sh.output);
  if (!out) throw Failure{kDomain, "io_error", "cannot write '" + sh.output + "'", sh.output};
  out << text;
}

template <class Row>
std::string table(const std::vector<Row>& rows) {
  std::size_t w0 = 0, w1 = 0;
  for (const auto& r : rows) {
    w0 = std::max(w0, r[0].size());
    w1 = std::max(w1, r[1].size());
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    out << r[0] << std::string(w0 - r[0].size() + 2, ' ') << r[1]
        << std::string(w1 - r[1].size() + 2, ' ') << r[2] << '\n';
  }
  return out.str();
}

using Rows = std::vector<std::array<std::string, 3>>;

void add_map(Rows& rows, const std::string& section, const std::map<std::string, double>& m) {
  for (const auto& [id, v] : m) rows.push_back({section, id, fmt(v)});
}

std::string csv_of(const Rows& rows) {
  std::string out = "section,id,value\n";
  for (const auto& r : rows) out += r[0] + "," + r[1] + "," + r[2] + "\n";
  return out;
}

// validate ------------------------------------------------------------------

int run_validate(const Shared& sh) {
  const ProblemSpec ps = load(sh);
  const AssembledProblem pb = assemble(ps);
  const auto& n = ps.network;
  Rows rows{{"network", "junctions", std::to_string(n.junctions().size())},
            {"network", "pipes", std::to_string(n.pipes().size())},
            {"network", "compressors", std::to_string(n.compressors().size())},
            {"network", "gnodes", std::to_string(n.gnodes().size())},
            {"problem", "variables", std::to_string(pb.num_variables())},
            {"problem", "equalities", std::to_string(pb.num_equalities())},
            {"problem", "inequalities", std::to_string(pb.num_inequalities())}};
  if (sh.format == "json") {
    json o;
    for (const auto& r : rows) o[r[0]][r[1]] = std::stoi(r[2]);
    o["valid"] = true;
    emit(sh, o.dump(2) + "\n");
  } else if (sh.format == "csv") {
    emit(sh, csv_of(rows));
  } else {
    emit(sh, "valid\n" + table(rows));
  }
  return kOk;
}

// simulate ------------------------------------------------------------------

ControlAssignment read_controls(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kUsage, "io_error", "cannot read '" + path + "'", path};
  ControlAssignment c;
  try {
    const json j = json::parse(in);
    for (const auto& [key, obj] : j.items()) {
      std::map<std::string, double>* dst = key == "supply_ng"   ? &c.supply_ng
                                           : key == "supply_h2" ? &c.supply_h2
                                           : key == "demand"    ? &c.demand
                                           : key == "alpha"     ? &c.alpha
                                                                : nullptr;
      if (!dst) throw Failure{kUsage, "parse_error", "unknown controls key '" + key + "'", path};
      for (const auto& [id, v] : obj.items()) (*dst)[id] = v.get<double>();
    }
  } catch (const json::exception& e) {
    throw Failure{kUsage, "parse_error", e.what(), path};
  }
  return c;
}

int run_simulate(const Shared& sh, const std::string& controls_path) {
  const ProblemSpec ps = load(sh);
  const ControlAssignment ctl = read_controls(controls_path);
  SimulationState st;
  try {
    st = simulate(ps.network, ctl, ps.gas, ps.scaling);
  } catch (const SimulationError& e) {
    throw Failure{kDomain, e.code_name(), e.what(), e.element()};
  }
  info(sh, "simulate: converged in " + std::to_string(st.iterations) + " iterations");
  Rows rows;
  add_map(rows, "pressure", st.pressure);
  add_map(rows, "gamma_node", st.gamma_node);
  add_map(rows, "flow", st.flow);
  add_map(rows, "gamma_edge", st.gamma_edge);
  add_map(rows, "makeup", st.makeup);
  if (sh.format == "json") {
    json o;
    o["pressure"] = st.pressure;
    o["gamma_node"] = st.gamma_node;
    o["flow"] = st.flow;
    o["gamma_edge"] = st.gamma_edge;
    o["makeup"] = st.makeup;
    o["residual"] = num(st.residual);
    o["iterations"] = st.iterations;
    emit(sh, o.dump(2) + "\n");
  } else if (sh.format == "csv") {
    emit(sh, csv_of(rows));
  } else {
    emit(sh, "iterations " + std::to_string(st.iterations) + "\nresidual   " + fmt(st.residual) + "\n" +
                 table(rows));
  }
  return kOk;
}

// solve ---------------------------------------------------------------------

int run_solve(const Shared& sh) {
  const ProblemSpec ps = load(sh);
  const AssembledProblem pb = assemble(ps);
  const Solution sol = solve(pb, ps.options);
  info(sh, std::string("solve: ") + to_string(sol.status) + " after " + std::to_string(sol.iterations) +
               " iterations (seed " + std::to_string(sol.seed) + ")");

  const auto& p = sol.primal;
  Rows rows;
  add_map(rows, "supply_ng", p.supply_ng);
  add_map(rows, "supply_h2", p.supply_h2);
  add_map(rows, "demand", p.demand);
  add_map(rows, "alpha", p.alpha);
  add_map(rows, "flow", p.flow);
  add_map(rows, "pressure", p.pressure);
  add_map(rows, "gamma_node", p.gamma_node);
  for (const auto& [j, sp] : sol.shadow_prices) {
    rows.push_back({"price_ng", j, fmt(sp.ng)});
    rows.push_back({"price_h2", j, fmt(sp.h2)});
    rows.push_back({"price_blend", j, fmt(sp.blend)});
  }
  for (const auto& b : sol.binding_set) rows.push_back({"binding", b, "1"});

  if (sh.format == "json") {
    json o;
    o["status"] = to_string(sol.status);
    o["objective"] = num(sol.objective);
    o["iterations"] = sol.iterations;
    o["kkt_residual"] = num(sol.kkt_residual);
    o["supply_ng"] = p.supply_ng;
    o["supply_h2"] = p.supply_h2;
    o["demand"] = p.demand;
    o["alpha"] = p.alpha;
    o["flow"] = p.flow;
    o["pressure"] = p.pressure;
    o["gamma_node"] = p.gamma_node;
    json sp = json::object();
    for (const auto& [j, v] : sol.shadow_prices) sp[j] = {{"ng", num(v.ng)}, {"h2", num(v.h2)}, {"blend", num(v.blend)}};
    o["shadow_prices"] = sp;
    o["binding_set"] = sol.binding_set;
    emit(sh, o.dump(2) + "\n");
  } else if (sh.format == "csv") {
    Rows head{{"result", "status", to_string(sol.status)}, {"result", "objective", fmt(sol.objective)}};
    head.insert(head.end(), rows.begin(), rows.end());
    emit(sh, csv_of(head));
  } else {
    emit(sh, std::string("status     ") + to_string(sol.status) + "\nobjective  " + fmt(sol.objective) +
                 " $/s\niterations " + std::to_string(sol.iterations) + "\n" + table(rows));
  }
  if (sol.status != SolveStatus::Optimal)
    throw Failure{kDomain, to_string(sol.status), "solver did not reach an optimal point", ""};
  return kOk;
}

// sweep ---------------------------------------------------------------------

int run_sweep(const Shared& sh, const std::string& target, const std::string& range, bool cold, int jobs) {
  const ProblemSpec ps = load(sh);
  SweepSpec spec = SweepSpec::parse_target(target);
  double a = 0, b = 0, c = 0;
  char extra = 0;
  if (std::sscanf(range.c_str(), "%lf:%lf:%lf%c", &a, &b, &c, &extra) != 3)
    throw Failure{kUsage, "usage_error", "range must look like start:stop:step", range};
  spec.start = a;
  spec.stop = b;
  spec.step = c;
  spec.warm_start = !cold;
  spec.jobs = jobs;
  const SweepResult res = h2blend::run_sweep(ps, spec);
  int optimal = 0;
  for (const auto& r : res.rows) optimal += r.status == SolveStatus::Optimal;
  info(sh, "sweep: " + std::to_string(optimal) + "/" + std::to_string(res.rows.size()) + " optimal, " +
               std::to_string(res.transitions.size()) + " transitions");
  std::ostringstream out;
  if (sh.format == "json") {
    write_json(res, out);
  } else if (sh.format == "csv") {
    write_csv(res, out);
  } else {
    Rows rows;
    for (const auto& r : res.rows) {
      std::string e;
      for (const auto& [id, v] : r.energy) e += (e.empty() ? "" : " ") + id + "=" + fmt(v);
      rows.push_back({fmt(r.parameter), to_string(r.status), e});
    }
    for (double t : res.transitions) rows.push_back({"transition", fmt(t), ""});
    out << res.target << '\n' << table(rows);
  }
  emit(sh, out.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Economic optimization of hydrogen/natural-gas blend pipeline networks"};
  app.require_subcommand(1);
  Shared sv, ss, so, sw;
  std::string controls, target, range;
  bool cold = false;
  int jobs = 1;

  auto shared = [](CLI::App* sub, Shared& sh, const std::string& default_format) {
    sh.format = default_format;
    sub->add_option("network", sh.network, "Network description (.json may be omitted)")->required();
    sub->add_option("-o,--output", sh.output, "Write results to this file instead of stdout");
    sub->add_option("-f,--format", sh.format, "Output format")
        ->check(CLI::IsMember({"table", "csv", "json"}))
        ->capture_default_str();
    sub->add_option("--tol", sh.tol, "KKT tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--seed-count", sh.seed_count, "Number of solver starting points")->check(CLI::Range(1, 1000));
    sub->add_option("--log-level", sh.log_level, "quiet, warn, info or debug")
        ->check(CLI::IsMember({"quiet", "warn", "info", "debug"}))
        ->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Check a network description");
  auto* sim = app.add_subcommand("simulate", "Steady-state flow for fixed controls");
  auto* sol = app.add_subcommand("solve", "Optimal allocation and shadow prices");
  auto* swp = app.add_subcommand("sweep", "Parameter sweep over repeated solves");
  shared(validate, sv, "table");
  shared(sim, ss, "table");
  shared(sol, so, "table");
  shared(swp, sw, "csv");
  sim->add_option("-c,--controls", controls, "JSON file with supply_ng, supply_h2, demand and alpha maps")
      ->required();
  swp->add_option("-t,--target", target, "demand_max:ID[,ID..], gamma_min:ID or carbon_price:ID")->required();
  swp->add_option("-r,--range", range, "start:stop:step")->required();
  swp->add_flag("--cold", cold, "Solve every point from scratch instead of warm starting");
  swp->add_option("-j,--jobs", jobs, "Worker threads for cold sweeps")->check(CLI::Range(1, 256));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return run_validate(sv);
    if (*sim) return run_simulate(ss, controls);
    if (*sol) return run_solve(so);
    return run_sweep(sw, target, range, cold, jobs);
  } catch (const Failure& f) {
    if (f.exit_code != kOk) report(f);
    return f.exit_code;
  } catch (const NetworkError& e) {
    const bool input = e.code() == "parse_error" || e.code() == "validation_error" || e.code() == "io_error";
    report({input ? kUsage : kDomain, e.code(), e.what(), e.element()});
    return input ? kUsage : kDomain;
  } catch (const SimulationError& e) {
    report({kDomain, e.code_name(), e.what(), e.element()});
    return kDomain;
  } catch (const std::exception& e) {
    report({kDomain, "internal_error", e.what(), ""});
    return kDomain;
  }
}

#include "h2blend/problem_file.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace h2blend {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& message, const std::string& element = {}) {
  throw NetworkError("parse_error", message, element);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where,
                const std::string& element) {
  if (!obj.is_object()) parse_fail(where + " must be an object", element);
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) parse_fail("unknown key '" + key + "' in " + where, element);
}

double number(const json& obj, const char* key, const std::string& element) {
  if (!obj.contains(key)) parse_fail(std::string("missing field '") + key + "'", element);
  const auto& v = obj.at(key);
  if (!v.is_number()) parse_fail(std::string("field '") + key + "' must be a number", element);
  return v.get<double>();
}

std::optional<double> opt_number(const json& obj, const char* key, const std::string& element) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return number(obj, key, element);
}

std::string text(const json& obj, const char* key, const std::string& element) {
  if (!obj.contains(key)) parse_fail(std::string("missing field '") + key + "'", element);
  const auto& v = obj.at(key);
  if (!v.is_string()) parse_fail(std::string("field '") + key + "' must be a string", element);
  return v.get<std::string>();
}

const json& array_section(const json& root, const char* key, bool required) {
  static const json empty = json::array();
  if (!root.contains(key)) {
    if (required) parse_fail(std::string("missing section '") + key + "'");
    return empty;
  }
  const auto& v = root.at(key);
  if (!v.is_array()) parse_fail(std::string("section '") + key + "' must be an array");
  return v;
}

std::string id_of(const json& item) {
  if (item.is_object() && item.contains("id") && item.at("id").is_string())
    return item.at("id").get<std::string>();
  return {};
}

void put_optional(json& obj, const char* key, const std::optional<double>& v) {
  if (v) obj[key] = *v;
}

}  // namespace

ProblemSpec parse_problem(const std::string& content) {
  json root;
  try {
    root = json::parse(content);
  } catch (const json::parse_error& e) {
    parse_fail(std::string("malformed JSON: ") + e.what());
  }
  check_keys(root,
             {"format_version", "junctions", "pipes", "compressors", "gnodes", "gas_constants",
              "scaling", "solver"},
             "document", "");
  if (!root.contains("format_version") || !root.at("format_version").is_number_integer())
    parse_fail("missing integer format_version");
  if (root.at("format_version").get<int>() != kFormatVersion)
    parse_fail("unsupported format_version " + root.at("format_version").dump());

  std::vector<Junction> junctions;
  for (const auto& item : array_section(root, "junctions", true)) {
    const std::string id = id_of(item);
    check_keys(item, {"id", "p_min", "gamma_min", "gamma_max", "slack_pressure"}, "junction", id);
    Junction j;
    j.id = text(item, "id", id);
    j.p_min = number(item, "p_min", id);
    j.gamma_min = opt_number(item, "gamma_min", id).value_or(0.0);
    j.gamma_max = opt_number(item, "gamma_max", id).value_or(1.0);
    j.slack_pressure = opt_number(item, "slack_pressure", id);
    junctions.push_back(std::move(j));
  }

  std::vector<Pipe> pipes;
  for (const auto& item : array_section(root, "pipes", false)) {
    const std::string id = id_of(item);
    check_keys(item, {"id", "from", "to", "length", "diameter", "area", "friction"}, "pipe", id);
    Pipe p;
    p.id = text(item, "id", id);
    p.from = text(item, "from", id);
    p.to = text(item, "to", id);
    p.length = number(item, "length", id);
    p.diameter = number(item, "diameter", id);
    p.friction = number(item, "friction", id);
    p.area = opt_number(item, "area", id).value_or(M_PI * p.diameter * p.diameter / 4.0);
    pipes.push_back(std::move(p));
  }

  std::vector<Compressor> compressors;
  for (const auto& item : array_section(root, "compressors", false)) {
    const std::string id = id_of(item);
    check_keys(item, {"id", "from", "to", "alpha_max", "p_discharge_max"}, "compressor", id);
    Compressor c;
    c.id = text(item, "id", id);
    c.from = text(item, "from", id);
    c.to = text(item, "to", id);
    c.alpha_max = number(item, "alpha_max", id);
    c.p_discharge_max = number(item, "p_discharge_max", id);
    compressors.push_back(std::move(c));
  }

  std::vector<GNode> gnodes;
  for (const auto& item : array_section(root, "gnodes", false)) {
    const std::string id = id_of(item);
    check_keys(item,
               {"id", "junction", "kind", "offer_price", "energy_bid_price", "carbon_price", "s_max",
                "g_max", "g_fixed"},
               "gnode", id);
    GNode g;
    g.id = text(item, "id", id);
    g.junction = text(item, "junction", id);
    try {
      g.kind = gnode_kind_from_string(text(item, "kind", id));
    } catch (const NetworkError& e) {
      parse_fail(e.what(), id);
    }
    g.offer_price = opt_number(item, "offer_price", id);
    g.energy_bid_price = opt_number(item, "energy_bid_price", id);
    g.carbon_price = opt_number(item, "carbon_price", id).value_or(0.0);
    g.s_max = opt_number(item, "s_max", id);
    g.g_max = opt_number(item, "g_max", id);
    g.g_fixed = opt_number(item, "g_fixed", id);
    gnodes.push_back(std::move(g));
  }

  GasConstants gc;
  if (root.contains("gas_constants")) {
    const auto& o = root.at("gas_constants");
    check_keys(o,
               {"a_ng", "a_h2", "kappa_ng", "kappa_h2", "g_ng", "g_h2", "r_ng", "r_h2", "zeta_ng",
                "t_suction", "m_ng", "m_h2", "r_universal", "eta"},
               "gas_constants", "gas_constants");
    auto set = [&](const char* key, double& field) {
      if (o.contains(key)) field = number(o, key, "gas_constants");
    };
    set("a_ng", gc.a_ng);
    set("a_h2", gc.a_h2);
    set("kappa_ng", gc.kappa_ng);
    set("kappa_h2", gc.kappa_h2);
    set("g_ng", gc.g_ng);
    set("g_h2", gc.g_h2);
    set("r_ng", gc.r_ng);
    set("r_h2", gc.r_h2);
    set("zeta_ng", gc.zeta_ng);
    set("t_suction", gc.t_suction);
    set("m_ng", gc.m_ng);
    set("m_h2", gc.m_h2);
    set("r_universal", gc.r_universal);
    set("eta", gc.eta);
    try {
      gc.validate();
    } catch (const std::invalid_argument& e) {
      throw NetworkError("validation_error", e.what(), "gas_constants");
    }
  }

  ScalingConfig sc = ScalingConfig::defaults(gc);
  if (root.contains("scaling")) {
    const auto& o = root.at("scaling");
    check_keys(o, {"p0", "l0", "a0", "area0", "u0", "objective_scale"}, "scaling", "scaling");
    if (o.contains("p0")) sc.p0 = number(o, "p0", "scaling");
    if (o.contains("l0")) sc.l0 = number(o, "l0", "scaling");
    if (o.contains("a0")) {
      sc.a0 = number(o, "a0", "scaling");
      sc.u0 = std::ceil(sc.a0) / 300.0;
    }
    if (o.contains("u0")) sc.u0 = number(o, "u0", "scaling");
    if (o.contains("area0")) sc.area0 = number(o, "area0", "scaling");
    if (o.contains("objective_scale")) sc.objective_scale = number(o, "objective_scale", "scaling");
    sc.derive();
    try {
      sc.validate();
    } catch (const std::invalid_argument& e) {
      throw NetworkError("validation_error", e.what(), "scaling");
    }
  }

  SolverOptions opt;
  if (root.contains("solver")) {
    const auto& o = root.at("solver");
    check_keys(o,
               {"kkt_tolerance", "max_iterations", "mu_init", "mu_reduction", "tau_min", "delta_init",
                "binding_threshold", "seed_count", "warm_mu_init", "bound_push"},
               "solver", "solver");
    auto set = [&](const char* key, double& field) {
      if (o.contains(key)) field = number(o, key, "solver");
    };
    auto set_int = [&](const char* key, int& field) {
      if (!o.contains(key)) return;
      if (!o.at(key).is_number_integer())
        parse_fail(std::string("field '") + key + "' must be an integer", "solver");
      field = o.at(key).get<int>();
    };
    set("kkt_tolerance", opt.kkt_tolerance);
    set_int("max_iterations", opt.max_iterations);
    set("mu_init", opt.mu_init);
    set("mu_reduction", opt.mu_reduction);
    set("tau_min", opt.tau_min);
    set("delta_init", opt.delta_init);
    set("binding_threshold", opt.binding_threshold);
    set_int("seed_count", opt.seed_count);
    set("warm_mu_init", opt.warm_mu_init);
    set("bound_push", opt.bound_push);
    try {
      opt.validate();
    } catch (const std::invalid_argument& e) {
      throw NetworkError("validation_error", e.what(), "solver");
    }
  }

  return ProblemSpec{Network::create(std::move(junctions), std::move(pipes), std::move(compressors),
                                     std::move(gnodes)),
                     gc, sc, opt};
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NetworkError("io_error", "cannot open '" + path + "'", path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

Network load_network(const std::string& path) { return load_problem(path).network; }

std::string to_json(const ProblemSpec& p) {
  json root;
  root["format_version"] = kFormatVersion;
  json js = json::array();
  for (const auto& j : p.network.junctions()) {
    json o{{"id", j.id}, {"p_min", j.p_min}, {"gamma_min", j.gamma_min}, {"gamma_max", j.gamma_max}};
    put_optional(o, "slack_pressure", j.slack_pressure);
    js.push_back(o);
  }
  root["junctions"] = js;
  json ps = json::array();
  for (const auto& q : p.network.pipes())
    ps.push_back({{"id", q.id}, {"from", q.from}, {"to", q.to}, {"length", q.length},
                  {"diameter", q.diameter}, {"area", q.area}, {"friction", q.friction}});
  root["pipes"] = ps;
  json cs = json::array();
  for (const auto& c : p.network.compressors())
    cs.push_back({{"id", c.id}, {"from", c.from}, {"to", c.to}, {"alpha_max", c.alpha_max},
                  {"p_discharge_max", c.p_discharge_max}});
  root["compressors"] = cs;
  json gs = json::array();
  for (const auto& g : p.network.gnodes()) {
    json o{{"id", g.id}, {"junction", g.junction}, {"kind", to_string(g.kind)}};
    put_optional(o, "offer_price", g.offer_price);
    put_optional(o, "energy_bid_price", g.energy_bid_price);
    if (g.is_demand()) o["carbon_price"] = g.carbon_price;
    put_optional(o, "s_max", g.s_max);
    put_optional(o, "g_max", g.g_max);
    put_optional(o, "g_fixed", g.g_fixed);
    gs.push_back(o);
  }
  root["gnodes"] = gs;
  const auto& gc = p.gas;
  root["gas_constants"] = {{"a_ng", gc.a_ng},         {"a_h2", gc.a_h2},   {"kappa_ng", gc.kappa_ng},
                           {"kappa_h2", gc.kappa_h2}, {"g_ng", gc.g_ng},   {"g_h2", gc.g_h2},
                           {"r_ng", gc.r_ng},         {"r_h2", gc.r_h2},   {"zeta_ng", gc.zeta_ng},
                           {"t_suction", gc.t_suction}, {"m_ng", gc.m_ng}, {"m_h2", gc.m_h2},
                           {"r_universal", gc.r_universal}, {"eta", gc.eta}};
  const auto& sc = p.scaling;
  root["scaling"] = {{"p0", sc.p0}, {"l0", sc.l0}, {"a0", sc.a0}, {"u0", sc.u0},
                     {"area0", sc.area0}, {"objective_scale", sc.objective_scale}};
  const auto& o = p.options;
  root["solver"] = {{"kkt_tolerance", o.kkt_tolerance},   {"max_iterations", o.max_iterations},
                    {"mu_init", o.mu_init},               {"mu_reduction", o.mu_reduction},
                    {"tau_min", o.tau_min},               {"delta_init", o.delta_init},
                    {"binding_threshold", o.binding_threshold}, {"seed_count", o.seed_count},
                    {"warm_mu_init", o.warm_mu_init},     {"bound_push", o.bound_push}};
  return root.dump(2) + "\n";
}

void save_problem(const ProblemSpec& problem, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw NetworkError("io_error", "cannot write '" + path + "'", path);
  out << to_json(problem);
}

}  // namespace h2blend

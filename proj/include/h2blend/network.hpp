#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace h2blend {

/// Error raised while reading or validating a network description. `code()` is a
/// stable machine-readable tag ("parse_error", "validation_error", ...), and
/// `element()` names the offending component id when there is one.
class NetworkError : public std::runtime_error {
 public:
  NetworkError(std::string code, const std::string& message, std::string element = {})
      : std::runtime_error(message), code_(std::move(code)), element_(std::move(element)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& element() const noexcept { return element_; }

 private:
  std::string code_;
  std::string element_;
};

struct Junction {
  std::string id;
  double p_min = 0.0;      // [Pa]
  double gamma_min = 0.0;  // H2 mass fraction
  double gamma_max = 1.0;
  std::optional<double> slack_pressure;  // [Pa]; present iff slack node

  bool is_slack() const { return slack_pressure.has_value(); }
  bool operator==(const Junction&) const = default;
};

struct Pipe {
  std::string id;
  std::string from;
  std::string to;
  double length = 0.0;    // [m]
  double diameter = 0.0;  // [m]
  double area = 0.0;      // [m^2]
  double friction = 0.0;  // Darcy-type factor, dimensionless

  bool operator==(const Pipe&) const = default;
};

struct Compressor {
  std::string id;
  std::string from;
  std::string to;
  double alpha_max = 1.0;
  double p_discharge_max = 0.0;  // [Pa]

  bool operator==(const Compressor&) const = default;
};

enum class GNodeKind { H2Supply, NGSupply, DemandOptimized, DemandFixed };

const char* to_string(GNodeKind kind);
GNodeKind gnode_kind_from_string(const std::string& text);

/// Market participant attached to a physical junction. Price and bound fields
/// that a kind does not use are left empty; the assembler rejects a participant
/// whose kind-specific fields are missing.
struct GNode {
  std::string id;
  std::string junction;
  GNodeKind kind = GNodeKind::NGSupply;
  std::optional<double> offer_price;       // [$/kg], supply kinds
  std::optional<double> energy_bid_price;  // [$/MJ], demand kinds
  double carbon_price = 0.0;               // [$/kg CO2], demand kinds
  std::optional<double> s_max;             // [kg/s], supply kinds; empty = unlimited
  std::optional<double> g_max;             // [MJ/s], DemandOptimized
  std::optional<double> g_fixed;           // [MJ/s], DemandFixed

  bool is_supply() const { return kind == GNodeKind::H2Supply || kind == GNodeKind::NGSupply; }
  bool is_demand() const { return !is_supply(); }
  bool operator==(const GNode&) const = default;
};

enum class EdgeKind { Pipe, Compressor };

struct EdgeRef {
  EdgeKind kind;
  std::size_t index;  // into Network::pipes() or Network::compressors()

  bool operator==(const EdgeRef&) const = default;
};

struct Incidence {
  std::vector<EdgeRef> incoming;   // edges whose `to` is the junction
  std::vector<EdgeRef> outgoing;   // edges whose `from` is the junction
  std::vector<std::size_t> gnodes; // indices into Network::gnodes()
};

/// Immutable validated network. Component vectors are sorted by id, which fixes
/// every downstream ordering (variables, constraint rows, output columns).
class Network {
 public:
  /// Validates all invariants and throws NetworkError("validation_error", ...) on
  /// the first violation.
  static Network create(std::vector<Junction> junctions, std::vector<Pipe> pipes,
                        std::vector<Compressor> compressors, std::vector<GNode> gnodes);

  const std::vector<Junction>& junctions() const { return junctions_; }
  const std::vector<Pipe>& pipes() const { return pipes_; }
  const std::vector<Compressor>& compressors() const { return compressors_; }
  const std::vector<GNode>& gnodes() const { return gnodes_; }

  std::size_t junction_index(const std::string& id) const;
  std::size_t pipe_index(const std::string& id) const;
  std::size_t compressor_index(const std::string& id) const;
  std::size_t gnode_index(const std::string& id) const;
  bool has_junction(const std::string& id) const { return junction_lookup_.count(id) != 0; }
  bool has_gnode(const std::string& id) const { return gnode_lookup_.count(id) != 0; }

  const Junction& junction(const std::string& id) const { return junctions_[junction_index(id)]; }
  const GNode& gnode(const std::string& id) const { return gnodes_[gnode_index(id)]; }

  const std::string& edge_id(EdgeRef e) const;
  const std::string& edge_from(EdgeRef e) const;
  const std::string& edge_to(EdgeRef e) const;

  /// Edges entering/leaving `junction_id` and the gNodes attached to it. Pipes come
  /// before compressors, each group in id order.
  const Incidence& incidence(const std::string& junction_id) const;

  /// Copies with one component replaced (same id); the result is revalidated.
  Network with_junction(const Junction& junction) const;
  Network with_gnode(const GNode& gnode) const;

  bool operator==(const Network& other) const {
    return junctions_ == other.junctions_ && pipes_ == other.pipes_ &&
           compressors_ == other.compressors_ && gnodes_ == other.gnodes_;
  }

 private:
  Network() = default;
  void validate_and_index();

  std::vector<Junction> junctions_;
  std::vector<Pipe> pipes_;
  std::vector<Compressor> compressors_;
  std::vector<GNode> gnodes_;

  std::map<std::string, std::size_t> junction_lookup_;
  std::map<std::string, std::size_t> pipe_lookup_;
  std::map<std::string, std::size_t> compressor_lookup_;
  std::map<std::string, std::size_t> gnode_lookup_;
  std::vector<Incidence> incidence_;
};

/// Free-function form of Network::incidence.
inline const Incidence& incidence(const Network& network, const std::string& junction_id) {
  return network.incidence(junction_id);
}

/// Reads only the network part of a description file (see problem_file.hpp for the
/// full case including constants, scaling and solver options).
Network load_network(const std::string& path);

}  // namespace h2blend

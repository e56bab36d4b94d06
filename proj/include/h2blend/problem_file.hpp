#pragma once

#include <string>

#include "h2blend/network.hpp"
#include "h2blend/nlp.hpp"
#include "h2blend/physics.hpp"
#include "h2blend/solver.hpp"

namespace h2blend {

/// Everything a description file can carry.
struct ProblemSpec {
  Network network;
  GasConstants gas;
  ScalingConfig scaling;
  SolverOptions options;
};

inline constexpr int kFormatVersion = 1;

/// Parses a JSON description. Syntax errors, wrong types, unknown keys and an
/// unsupported format_version raise NetworkError("parse_error"); invariant
/// violations raise NetworkError("validation_error").
ProblemSpec parse_problem(const std::string& text);
ProblemSpec load_problem(const std::string& path);

/// Serializes with full round-trip precision; parse_problem(to_json(p)) == p.
std::string to_json(const ProblemSpec& problem);
void save_problem(const ProblemSpec& problem, const std::string& path);

inline AssembledProblem assemble(const ProblemSpec& spec) {
  return assemble(spec.network, spec.gas, spec.scaling);
}

}  // namespace h2blend

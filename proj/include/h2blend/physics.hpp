#pragma once

#include "h2blend/network.hpp"

namespace h2blend {

/// Species-level constants. Compressor power is expressed in kW with mass flow in
/// kg/s; `eta` converts kW to $/s.
struct GasConstants {
  double a_ng = 370.0;       // [m/s]
  double a_h2 = 1090.0;      // [m/s]
  double kappa_ng = 1.304;
  double kappa_h2 = 1.405;
  double g_ng = 0.5537;      // specific gravity
  double g_h2 = 0.0696;
  double r_ng = 44.2;        // [MJ/kg]
  double r_h2 = 141.8;       // [MJ/kg]
  double zeta_ng = 44.0 / 18.0;
  double t_suction = 288.7;  // [K]
  double m_ng = 0.01737;     // [kg/mol]
  double m_h2 = 0.002016;    // [kg/mol]
  double r_universal = 8.314;
  double eta = 0.13 / 3600.0;  // [$/kW-s]

  /// Throws std::invalid_argument when a field is non-positive or the species
  /// ordering (a_h2 > a_ng, r_h2 > r_ng) is violated.
  void validate() const;
  bool operator==(const GasConstants&) const = default;
};

inline constexpr double kCompressorCoefficient = 286.76;

// All gamma arguments must lie in [0, 1]; violations throw std::domain_error.
double sound_speed_sq(double gamma, const GasConstants& gc);
double blend_kappa(double gamma, const GasConstants& gc);
double blend_gravity(double gamma, const GasConstants& gc);
double blend_calorific(double gamma, const GasConstants& gc);

/// P_from^2 - P_to^2 - (lambda L / (D A^2)) V(gamma) phi |phi|   [Pa^2]
double weymouth_residual(double p_from, double p_to, double phi, double gamma, const Pipe& pipe,
                         const GasConstants& gc);

/// lambda L / (D A^2)
double pipe_resistance(const Pipe& pipe);

/// Power drawn by a compressor [kW]; requires alpha >= 1 and phi >= 0.
double compressor_power(double alpha, double phi, double gamma, const GasConstants& gc);

/// CO2 avoided by delivering `d` kg/s of blend at H2 fraction gamma [kg/s].
double carbon_offset(double d, double gamma, const GasConstants& gc);

/// W / phi and its partial derivatives in (alpha, gamma) up to second order.
/// Used by the optimizer so that analytic derivatives live next to the formula.
struct CompressorPowerDerivatives {
  double w;       // per unit flow
  double w_a, w_g;
  double w_aa, w_ag, w_gg;
};
CompressorPowerDerivatives compressor_power_per_flow(double alpha, double gamma,
                                                     const GasConstants& gc);

}  // namespace h2blend

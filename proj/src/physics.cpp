#include "h2blend/physics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace h2blend {

namespace {

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::domain_error("hydrogen fraction outside [0,1]: " + std::to_string(gamma));
}

}  // namespace

void GasConstants::validate() const {
  const double fields[] = {a_ng,  a_h2,  kappa_ng, kappa_h2,  g_ng, g_h2,        r_ng,
                           r_h2,  zeta_ng, t_suction, m_ng, m_h2, r_universal, eta};
  for (double f : fields)
    if (!std::isfinite(f) || f <= 0.0) throw std::invalid_argument("gas constants must be positive");
  if (!(a_h2 > a_ng)) throw std::invalid_argument("a_h2 must exceed a_ng");
  if (!(r_h2 > r_ng)) throw std::invalid_argument("r_h2 must exceed r_ng");
}

double sound_speed_sq(double gamma, const GasConstants& gc) {
  check_gamma(gamma);
  return gamma * gc.a_h2 * gc.a_h2 + (1.0 - gamma) * gc.a_ng * gc.a_ng;
}

double blend_kappa(double gamma, const GasConstants& gc) {
  check_gamma(gamma);
  return gc.kappa_h2 * gamma + gc.kappa_ng * (1.0 - gamma);
}

double blend_gravity(double gamma, const GasConstants& gc) {
  check_gamma(gamma);
  return gc.g_h2 * gamma + gc.g_ng * (1.0 - gamma);
}

double blend_calorific(double gamma, const GasConstants& gc) {
  check_gamma(gamma);
  return gc.r_h2 * gamma + gc.r_ng * (1.0 - gamma);
}

double pipe_resistance(const Pipe& pipe) {
  return pipe.friction * pipe.length / (pipe.diameter * pipe.area * pipe.area);
}

double weymouth_residual(double p_from, double p_to, double phi, double gamma, const Pipe& pipe,
                         const GasConstants& gc) {
  return p_from * p_from - p_to * p_to -
         pipe_resistance(pipe) * sound_speed_sq(gamma, gc) * phi * std::abs(phi);
}

double compressor_power(double alpha, double phi, double gamma, const GasConstants& gc) {
  if (!(alpha >= 1.0)) throw std::domain_error("boost ratio below 1");
  if (!(phi >= 0.0)) throw std::domain_error("negative compressor flow");
  const double kappa = blend_kappa(gamma, gc);
  const double grav = blend_gravity(gamma, gc);
  const double m = (kappa - 1.0) / kappa;
  return kCompressorCoefficient * (kappa - 1.0) * gc.t_suction / (grav * kappa) *
         (std::pow(alpha, m) - 1.0) * std::abs(phi);
}

double carbon_offset(double d, double gamma, const GasConstants& gc) {
  if (!(d >= 0.0)) throw std::domain_error("negative withdrawal");
  check_gamma(gamma);
  return d * gamma * (gc.r_h2 / gc.r_ng) * gc.zeta_ng;
}

CompressorPowerDerivatives compressor_power_per_flow(double alpha, double gamma,
                                                     const GasConstants& gc) {
  // W/phi = C(gamma) * Q(alpha, gamma), C = c0 m / G, Q = alpha^m - 1, m = 1 - 1/kappa.
  const double c0 = kCompressorCoefficient * gc.t_suction;
  const double kd = gc.kappa_h2 - gc.kappa_ng;
  const double gd = gc.g_h2 - gc.g_ng;
  const double kappa = gc.kappa_h2 * gamma + gc.kappa_ng * (1.0 - gamma);
  const double grav = gc.g_h2 * gamma + gc.g_ng * (1.0 - gamma);

  const double m = (kappa - 1.0) / kappa;
  const double m1 = kd / (kappa * kappa);
  const double m2 = -2.0 * kd * kd / (kappa * kappa * kappa);

  const double c = c0 * m / grav;
  const double c1 = c0 * (m1 / grav - m * gd / (grav * grav));
  const double c2 = c0 * (m2 / grav - 2.0 * m1 * gd / (grav * grav) +
                          2.0 * m * gd * gd / (grav * grav * grav));

  const double am = std::pow(alpha, m);
  const double ln_a = std::log(alpha);
  const double q = am - 1.0;
  const double q_a = m * am / alpha;
  const double q_aa = m * (m - 1.0) * am / (alpha * alpha);
  const double q_g = am * ln_a * m1;
  const double q_gg = am * (ln_a * ln_a * m1 * m1 + ln_a * m2);
  const double q_ag = m1 * am / alpha * (1.0 + m * ln_a);

  CompressorPowerDerivatives out;
  out.w = c * q;
  out.w_a = c * q_a;
  out.w_g = c1 * q + c * q_g;
  out.w_aa = c * q_aa;
  out.w_ag = c1 * q_a + c * q_ag;
  out.w_gg = c2 * q + 2.0 * c1 * q_g + c * q_gg;
  return out;
}

}  // namespace h2blend

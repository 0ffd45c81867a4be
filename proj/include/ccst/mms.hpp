#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "ccst/material.hpp"

namespace ccst::mms {

// Manufactured displacement on the unit square
//
//   u = (x - x^2)^2 (y - y^2)^2 * ( sin(6 pi x) cos(6 pi y),  cos(6 pi x) sin(6 pi y) )
//
// Each component is a product a(x) b(y) of 1D factors p(t) * trig(6 pi t), so
// every mixed partial derivative is a product of 1D derivatives.

inline constexpr double kWave = 6.0 * std::numbers::pi;

enum class Trig { sin, cos };

/// n-th derivative (n <= 4) of (t - t^2)^2 * trig(k t), by the Leibniz rule.
inline double factor_derivative(Trig trig, int n, double t) {
  const std::array<double, 5> p{t * t * (1.0 - t) * (1.0 - t), 2.0 * t - 6.0 * t * t + 4.0 * t * t * t,
                                2.0 - 12.0 * t + 12.0 * t * t, -12.0 + 24.0 * t, 24.0};
  constexpr std::array<std::array<double, 5>, 5> binom{{
      {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}}};
  const double phase = trig == Trig::sin ? 0.0 : 0.5 * std::numbers::pi;
  double out = 0.0;
  for (int j = 0; j <= n; ++j) {
    const int m = n - j;  // derivative order on the trigonometric factor
    const double g = std::pow(kWave, m) * std::sin(kWave * t + phase + 0.5 * std::numbers::pi * m);
    out += binom[n][j] * p[j] * g;
  }
  return out;
}

/// d^(i+j) u_c / dx^i dy^j of the manufactured field, component c in {0, 1}.
inline double displacement_derivative(int c, int i, int j, const Eigen::Vector2d& x) {
  if (c == 0) return factor_derivative(Trig::sin, i, x.x()) * factor_derivative(Trig::cos, j, x.y());
  return factor_derivative(Trig::cos, i, x.x()) * factor_derivative(Trig::sin, j, x.y());
}

inline Eigen::Vector2d displacement(const Eigen::Vector2d& x) {
  return {displacement_derivative(0, 0, 0, x), displacement_derivative(1, 0, 0, x)};
}

/// Exact rotation 1/2 curl u.
inline double rotation(const Eigen::Vector2d& x) {
  return 0.5 * (displacement_derivative(1, 1, 0, x) - displacement_derivative(0, 0, 1, x));
}

/**
 * Body force that makes the manufactured field a static solution:
 *
 *   f = -[ (lambda + 2 mu) grad div u - (mu - eta lap) curl curl u ]
 *
 * In the plane curl curl u = grad div u - lap u, which turns the bracket into
 *   (lambda + mu) grad div u + mu lap u + eta lap (grad div u - lap u).
 */
inline Eigen::Vector2d body_force(const Material& m, const Eigen::Vector2d& x) {
  auto d = [&](int c, int i, int j) { return displacement_derivative(c, i, j, x); };

  const double gdx = d(0, 2, 0) + d(1, 1, 1);  // d/dx div u
  const double gdy = d(0, 1, 1) + d(1, 0, 2);  // d/dy div u
  const double lap_x = d(0, 2, 0) + d(0, 0, 2);
  const double lap_y = d(1, 2, 0) + d(1, 0, 2);
  const double lap_gdx = d(0, 4, 0) + d(0, 2, 2) + d(1, 3, 1) + d(1, 1, 3);
  const double lap_gdy = d(0, 3, 1) + d(0, 1, 3) + d(1, 2, 2) + d(1, 0, 4);
  const double bilap_x = d(0, 4, 0) + 2.0 * d(0, 2, 2) + d(0, 0, 4);
  const double bilap_y = d(1, 4, 0) + 2.0 * d(1, 2, 2) + d(1, 0, 4);

  const double a = m.lambda + m.mu;
  return -Eigen::Vector2d{a * gdx + m.mu * lap_x + m.eta * (lap_gdx - bilap_x),
                          a * gdy + m.mu * lap_y + m.eta * (lap_gdy - bilap_y)};
}

}  // namespace ccst::mms

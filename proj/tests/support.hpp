#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ccst/dynamics.hpp"
#include "ccst/material.hpp"
#include "ccst/mms.hpp"

namespace ccst::oracle {

using ScalarFn = std::function<double(const Eigen::Vector2d&)>;

/// Fourth-order central difference along axis `dir`.
inline ScalarFn fd(const ScalarFn& f, int dir, double h) {
  return [f, dir, h](const Eigen::Vector2d& x) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e(dir) = h;
    return (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h);
  };
}

/**
 * Strong-form body force for the manufactured field evaluated only from
 * displacement values, with nested finite differences:
 *
 *   f = -[ (lambda + 2 mu) grad(div u) - mu rot(w) + eta lap(rot(w)) ],
 *
 * w = d(uy)/dx - d(ux)/dy and rot(w) = (dw/dy, -dw/dx).
 */
inline Eigen::Vector2d body_force_fd(const Material& m, const Eigen::Vector2d& x, double h = 1e-3) {
  const ScalarFn ux = [](const Eigen::Vector2d& p) { return mms::displacement(p).x(); };
  const ScalarFn uy = [](const Eigen::Vector2d& p) { return mms::displacement(p).y(); };
  const ScalarFn div = [=](const Eigen::Vector2d& p) { return fd(ux, 0, h)(p) + fd(uy, 1, h)(p); };
  const ScalarFn w = [=](const Eigen::Vector2d& p) { return fd(uy, 0, h)(p) - fd(ux, 1, h)(p); };
  const ScalarFn rx = fd(w, 1, h);
  const ScalarFn ry = [=](const Eigen::Vector2d& p) { return -fd(w, 0, h)(p); };
  auto lap = [h](const ScalarFn& g) {
    return [=](const Eigen::Vector2d& p) { return fd(fd(g, 0, h), 0, h)(p) + fd(fd(g, 1, h), 1, h)(p); };
  };
  const double a = m.lambda + 2 * m.mu;
  return -Eigen::Vector2d(a * fd(div, 0, h)(x) - m.mu * rx(x) + m.eta * lap(rx)(x),
                          a * fd(div, 1, h)(x) - m.mu * ry(x) + m.eta * lap(ry)(x));
}

/// Stacked relative error ||f - f_fd|| / ||f_fd|| over `count` seeded interior points.
inline double body_force_oracle_error(const Material& m, int count = 20, unsigned seed = 2024) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  double num = 0, den = 0;
  for (int i = 0; i < count; ++i) {
    const Eigen::Vector2d x(u(gen), u(gen));
    const Eigen::Vector2d ref = body_force_fd(m, x);
    num += (mms::body_force(m, x) - ref).squaredNorm();
    den += ref.squaredNorm();
  }
  return std::sqrt(num / den);
}

/// Largest pointwise relative error at the same points.
inline double body_force_oracle_max_error(const Material& m, int count = 20, unsigned seed = 2024) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  double worst = 0;
  for (int i = 0; i < count; ++i) {
    const Eigen::Vector2d x(u(gen), u(gen));
    const Eigen::Vector2d ref = body_force_fd(m, x);
    worst = std::max(worst, (mms::body_force(m, x) - ref).norm() / ref.norm());
  }
  return worst;
}

}  // namespace ccst::oracle

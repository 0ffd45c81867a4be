#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "ccst/errors.hpp"

namespace ccst {

/**
 * @brief Isotropic couple-stress material.
 *
 * Holds the user-facing constants (E, nu, rho, eta) and the derived Lame
 * parameters and length scale. Construct through derive(); the fields are
 * public for reading but a Material built by hand skips validation.
 */
struct Material {
  double E = 1.0;     ///< Young's modulus
  double nu = 0.0;    ///< Poisson ratio
  double rho = 1.0;   ///< density
  double eta = 0.0;   ///< couple-stress modulus
  double lambda = 0;  ///< first Lame parameter
  double mu = 0.5;    ///< shear modulus
  double l = 0;       ///< material length scale, l^2 = eta / mu

  /// True when the couple-stress terms vanish (classical elasticity).
  [[nodiscard]] bool classical() const { return eta == 0.0; }
};

/// Plane-strain stiffness in Voigt form (xx, yy, xy with engineering shear)
/// and the curvature stiffness D = 4 eta I.
struct ConstitutiveVoigt {
  Eigen::Matrix3d C;
  Eigen::Matrix2d D;
};

inline Material derive(double E, double nu, double rho, double eta) {
  auto reject = [](const std::string& field, double value, const char* bound) {
    throw InputError("material." + field + " = " + std::to_string(value) +
                     " violates " + bound);
  };
  if (!(E > 0.0)) reject("E", E, "E > 0");
  if (!(nu > -1.0 && nu < 0.5)) reject("nu", nu, "-1 < nu < 0.5");
  if (!(rho > 0.0)) reject("rho", rho, "rho > 0");
  if (!(eta >= 0.0)) reject("eta", eta, "eta >= 0");

  Material m;
  m.E = E;
  m.nu = nu;
  m.rho = rho;
  m.eta = eta;
  m.mu = E / (2.0 * (1.0 + nu));
  m.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  m.l = std::sqrt(eta / m.mu);
  return m;
}

/// eta that realises a given length scale at fixed shear modulus.
inline double eta_for_length_scale(const Material& m, double l) { return m.mu * l * l; }

inline ConstitutiveVoigt voigt_matrices(const Material& m) {
  const double nu = m.nu;
  const double scale = m.E * (1.0 - nu) / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double off = nu / (1.0 - nu);
  ConstitutiveVoigt out;
  out.C << 1.0, off, 0.0,
           off, 1.0, 0.0,
           0.0, 0.0, (1.0 - 2.0 * nu) / (2.0 * (1.0 - nu));
  out.C *= scale;
  out.D = 4.0 * m.eta * Eigen::Matrix2d::Identity();
  return out;
}

}  // namespace ccst

#pragma once

#include "finsleroid/errors.hpp"

#include <cmath>

namespace finsleroid {

struct DeformationParameter {
  double g = 0;
  double h = 1;
  double G = 0;
  double g_plus = 1;
  double g_minus = -1;
  double G_plus = 1;
  double G_minus = -1;
  double g_sup_plus = 1;
  double g_sup_minus = -1;
  double G_sup_plus = 1;
  double G_sup_minus = -1;
  double gamma = 0;
};

inline DeformationParameter derive_constants(double g) {
  if (!std::isfinite(g)) throw DomainError("deformation parameter g must be finite");
  DeformationParameter c;
  c.g = g;
  c.h = std::sqrt(1.0 + 0.25 * g * g);
  c.G = g / c.h;
  // Written so that neither g_plus nor gamma loses digits to cancellation.
  c.g_plus = g >= 0 ? 1.0 / (0.5 * g + c.h) : c.h - 0.5 * g;
  c.g_minus = -1.0 / c.g_plus;
  c.G_plus = c.g_plus / c.h;
  c.G_minus = c.g_minus / c.h;
  c.g_sup_plus = -c.g_minus;
  c.g_sup_minus = -c.g_plus;
  c.G_sup_plus = c.g_sup_plus / c.h;
  c.G_sup_minus = c.g_sup_minus / c.h;
  c.gamma = 0.25 * g * g / (c.h + 1.0);
  return c;
}

// Curvature of the unit indicatrix F = 1, rounded once.
inline double indicatrix_curvature(const DeformationParameter& c) { return -std::fma(0.25 * c.g, c.g, 1.0); }

// The constant S* in the curvature tensor.
inline double curvature_constant(const DeformationParameter& c) { return 0.25 * c.g * c.g; }

}  // namespace finsleroid

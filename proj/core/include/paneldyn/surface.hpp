#pragma once

#include <array>
#include <string>
#include <vector>

#include "paneldyn/models.hpp"

namespace paneldyn {

/// Reduced response surface over (valuation, trend): the nine cubic
/// monomials of Model 3 with insignificant coefficients set to zero.
/// Coefficients are stored raw; the x1000 display scaling is presentation
/// only.
struct CubicSurface {
  // Order matches the Model-3 regressor list: V, V^2, V^3, T, T^2, T^3,
  // T*V, T^2*V, T*V^2.
  std::array<double, 9> coef{};
  std::array<double, 9> p_values{};
  std::array<bool, 9> zeroed{};
  double alpha = 0.10;

  static const std::vector<std::string>& monomials();
};

/// Zero out coefficients with p >= alpha in a Model 3 (or 4) report.
CubicSurface reduce_surface(const RegressionReport& report, double alpha = 0.10);

double evaluate(const CubicSurface& surface, double valuation, double trend);

/// Coefficients of the trend cross-section at fixed valuation:
/// R(T) = c0 + c1 T + c2 T^2 + c3 T^3.
std::array<double, 4> trend_section(const CubicSurface& surface, double valuation);

struct TrendGeometry {
  double local_min_t = 0.0;
  double local_max_t = 0.0;
  double local_min_r = 0.0;
  double local_max_r = 0.0;
  double symmetry_ratio = 0.0;  // |local_min_t| / local_max_t; 1 = symmetric
};

/// Interior extrema of the trend cross-section from the closed-form
/// quadratic on the derivative. NoInteriorExtrema when the derivative has
/// no two distinct real roots.
TrendGeometry trend_geometry(const CubicSurface& surface, double valuation = 0.0);

/// Distinct real roots of c3 x^3 + c2 x^2 + c1 x + c0 = 0, ascending.
/// Degree degrades gracefully when leading coefficients vanish.
std::vector<double> solve_poly3(double c3, double c2, double c1, double c0);

/// Trend values where the cross-section attains `target` (0 to 3 roots).
std::vector<double> level_set_roots(const CubicSurface& surface, double valuation,
                                    double target);

struct GridSpec {
  double vmin = -3.0, vmax = 3.0;
  int vsteps = 61;
  double tmin = -3.0, tmax = 3.0;
  int tsteps = 61;
};

/// CSV grid "valuation,trend,return" over the spec, valuation-major.
std::string grid_csv(const CubicSurface& surface, const GridSpec& spec);

/// Geometry record as a JSON document (stable key order). A null geometry
/// marks a surface without interior extrema.
std::string geometry_json(const CubicSurface& surface, const TrendGeometry* geometry);

}  // namespace paneldyn

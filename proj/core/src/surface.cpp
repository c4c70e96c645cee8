#include "paneldyn/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "paneldyn/csv.hpp"
#include "paneldyn/errors.hpp"

namespace paneldyn {

const std::vector<std::string>& CubicSurface::monomials() {
  return model_terms(ModelId::m3);
}

CubicSurface reduce_surface(const RegressionReport& report, double alpha) {
  if (report.model != ModelId::m3 && report.model != ModelId::m4)
    raise(errc::unknown_model, "surface reduction needs a Model 3 or Model 4 report");
  CubicSurface surface;
  surface.alpha = alpha;
  const auto& terms = CubicSurface::monomials();
  bool any = false;
  for (size_t j = 0; j < terms.size(); ++j) {
    const CoefficientRow* row = report.find(terms[j]);
    if (!row)
      raise(errc::missing_column, "report lacks regressor '" + terms[j] + "'");
    surface.p_values[j] = row->p_value;
    if (row->p_value >= alpha) {
      surface.zeroed[j] = true;
      surface.coef[j] = 0.0;
    } else {
      surface.coef[j] = row->coefficient;
      any = true;
    }
  }
  if (!any)
    raise(errc::no_significant_terms,
          "no coefficient is significant at alpha = " + format_double(alpha));
  return surface;
}

double evaluate(const CubicSurface& s, double v, double t) {
  const auto& c = s.coef;
  return c[0] * v + c[1] * v * v + c[2] * v * v * v + c[3] * t + c[4] * t * t +
         c[5] * t * t * t + c[6] * t * v + c[7] * t * t * v + c[8] * t * v * v;
}

std::array<double, 4> trend_section(const CubicSurface& s, double v) {
  const auto& c = s.coef;
  return {
      c[0] * v + c[1] * v * v + c[2] * v * v * v,  // constant
      c[3] + c[6] * v + c[8] * v * v,              // T
      c[4] + c[7] * v,                             // T^2
      c[5],                                        // T^3
  };
}

TrendGeometry trend_geometry(const CubicSurface& surface, double valuation) {
  const auto section = trend_section(surface, valuation);
  const double c1 = section[1], c2 = section[2], c3 = section[3];
  if (c3 == 0.0)
    raise(errc::no_interior_extrema, "trend cross-section has no cubic term");
  // Critical points: c1 + 2 c2 T + 3 c3 T^2 = 0.
  const double a = 3.0 * c3, b = 2.0 * c2;
  const double disc = b * b - 4.0 * a * c1;
  if (disc <= 0.0)
    raise(errc::no_interior_extrema, "derivative has no two distinct real roots");
  const double sq = std::sqrt(disc);
  // Numerically stable quadratic roots.
  const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  double r1 = q / a;
  double r2 = c1 / q;
  if (r1 > r2) std::swap(r1, r2);

  TrendGeometry geom;
  // Cubic opening downward: rises between the critical points, so the lower
  // root is the local minimum. Opening upward reverses the roles.
  if (c3 < 0.0) {
    geom.local_min_t = r1;
    geom.local_max_t = r2;
  } else {
    geom.local_max_t = r1;
    geom.local_min_t = r2;
  }
  geom.local_min_r = evaluate(surface, valuation, geom.local_min_t);
  geom.local_max_r = evaluate(surface, valuation, geom.local_max_t);
  geom.symmetry_ratio = geom.local_max_t != 0.0
                            ? std::fabs(geom.local_min_t) / geom.local_max_t
                            : std::numeric_limits<double>::quiet_NaN();
  return geom;
}

namespace {

double poly_eval(double c3, double c2, double c1, double c0, double x) {
  return ((c3 * x + c2) * x + c1) * x + c0;
}

void newton_polish(double c3, double c2, double c1, double c0, double& x) {
  for (int it = 0; it < 3; ++it) {
    const double f = poly_eval(c3, c2, c1, c0, x);
    const double fp = (3.0 * c3 * x + 2.0 * c2) * x + c1;
    if (fp == 0.0) return;
    const double step = f / fp;
    x -= step;
    if (std::fabs(step) < 1e-15 * std::max(1.0, std::fabs(x))) return;
  }
}

}  // namespace

std::vector<double> solve_poly3(double c3, double c2, double c1, double c0) {
  const double scale = std::max({std::fabs(c3), std::fabs(c2), std::fabs(c1), std::fabs(c0)});
  if (scale == 0.0) return {};
  std::vector<double> roots;
  if (std::fabs(c3) < 1e-14 * scale) {
    if (std::fabs(c2) < 1e-14 * scale) {
      if (std::fabs(c1) < 1e-14 * scale) return {};
      roots.push_back(-c0 / c1);
    } else {
      const double disc = c1 * c1 - 4.0 * c2 * c0;
      if (disc < 0.0) return {};
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (c1 + (c1 >= 0.0 ? sq : -sq));
      roots.push_back(q / c2);
      if (q != 0.0) roots.push_back(c0 / q);
      else roots.push_back(0.0);
    }
  } else {
    // Depressed cubic x = y - p/3 for y^3 + a y + b with
    // monic t^3 + p t^2 + q t + r.
    const double p = c2 / c3, q = c1 / c3, r = c0 / c3;
    const double a = q - p * p / 3.0;
    const double b = r - p * q / 3.0 + 2.0 * p * p * p / 27.0;
    const double shift = -p / 3.0;
    const double disc = b * b / 4.0 + a * a * a / 27.0;
    if (disc > 0.0) {
      // One real root (Cardano).
      const double sq = std::sqrt(disc);
      const double u = std::cbrt(-b / 2.0 + sq);
      const double v = std::cbrt(-b / 2.0 - sq);
      roots.push_back(u + v + shift);
    } else if (disc == 0.0) {
      if (b == 0.0) {
        roots.push_back(shift);
      } else {
        const double u = std::cbrt(-b / 2.0);
        roots.push_back(2.0 * u + shift);
        roots.push_back(-u + shift);
      }
    } else {
      // Three distinct real roots (trigonometric form).
      const double m = 2.0 * std::sqrt(-a / 3.0);
      const double theta = std::acos(std::clamp(3.0 * b / (a * m), -1.0, 1.0)) / 3.0;
      for (int k = 0; k < 3; ++k)
        roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) + shift);
    }
  }
  for (double& x : roots) newton_polish(c3, c2, c1, c0, x);
  std::sort(roots.begin(), roots.end());
  // Collapse numerically equal roots.
  std::vector<double> unique_roots;
  for (double x : roots) {
    if (unique_roots.empty() ||
        std::fabs(x - unique_roots.back()) > 1e-9 * std::max(1.0, std::fabs(x)))
      unique_roots.push_back(x);
  }
  return unique_roots;
}

std::vector<double> level_set_roots(const CubicSurface& surface, double valuation,
                                    double target) {
  const auto s = trend_section(surface, valuation);
  return solve_poly3(s[3], s[2], s[1], s[0] - target);
}

std::string grid_csv(const CubicSurface& surface, const GridSpec& spec) {
  if (spec.vsteps < 1 || spec.tsteps < 1 || spec.vmin > spec.vmax || spec.tmin > spec.tmax)
    raise(errc::empty_range, "grid needs at least one step and ordered bounds");
  auto coord = [](double lo, double hi, int steps, int k) {
    return steps == 1 ? lo : lo + (hi - lo) * k / (steps - 1);
  };
  std::string out = "valuation,trend,return\n";
  for (int a = 0; a < spec.vsteps; ++a) {
    const double v = coord(spec.vmin, spec.vmax, spec.vsteps, a);
    for (int b = 0; b < spec.tsteps; ++b) {
      const double t = coord(spec.tmin, spec.tmax, spec.tsteps, b);
      out += format_double(v);
      out += ',';
      out += format_double(t);
      out += ',';
      out += format_double(evaluate(surface, v, t));
      out += '\n';
    }
  }
  return out;
}

std::string geometry_json(const CubicSurface& surface, const TrendGeometry* geometry) {
  nlohmann::ordered_json doc;
  doc["alpha"] = surface.alpha;
  nlohmann::ordered_json coef;
  const auto& terms = CubicSurface::monomials();
  for (size_t j = 0; j < terms.size(); ++j) coef[terms[j]] = surface.coef[j];
  doc["coefficients"] = coef;
  if (geometry) {
    doc["local_min_trend"] = geometry->local_min_t;
    doc["local_max_trend"] = geometry->local_max_t;
    doc["local_min_return"] = geometry->local_min_r;
    doc["local_max_return"] = geometry->local_max_r;
    doc["symmetry_ratio"] = geometry->symmetry_ratio;
    doc["underreaction_band"] = {geometry->local_min_t, geometry->local_max_t};
  } else {
    doc["local_min_trend"] = nullptr;
    doc["local_max_trend"] = nullptr;
    doc["local_min_return"] = nullptr;
    doc["local_max_return"] = nullptr;
    doc["symmetry_ratio"] = nullptr;
    doc["note"] = "trend cross-section has no interior extrema";
  }
  return doc.dump(2) + "\n";
}

}  // namespace paneldyn

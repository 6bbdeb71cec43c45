#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "monolab/parallel.hpp"
#include "monolab/profiles.hpp"

namespace monolab {

/// Everything known about the Green's function at one radius. Derivatives are
/// with respect to the geodesic radius rho and come from closed forms in f and
/// G; nothing here is differentiated numerically.
struct GreenPoint {
  double rho = 0.0;
  double f = 0.0, df = 0.0, d2f = 0.0;
  double G = 0.0;
  double b = 0.0, db = 0.0, d2b = 0.0, d3b = 0.0;
};

struct LevelData {
  double r = 0.0;     // b-level
  double rho = 0.0;   // geodesic radius with b(rho) = r
  double area = 0.0;  // omega f(rho)^{n-1}
  double grad_b = 0.0;
};

/// Minimal positive Green's function with pole at the tip, normalised so that
/// G = rho^{2-n} on flat space.
///
/// Nodes carry G exactly (segment integrals of f^{1-n} accumulated from the
/// analytic tail inward). Off-node values are exact as well: at() adds one
/// Gauss-Kronrod pass over the partial segment, so there is no interpolation
/// error anywhere in the table's range.
class GreenData {
 public:
  GreenData() = default;

  const ManifoldModel& model() const { return model_; }
  int n() const { return model_.n; }
  double omega() const { return omega_; }

  const std::vector<double>& rho_grid() const { return rho_; }
  const std::vector<double>& G() const { return G_; }
  const std::vector<double>& b() const { return b_; }
  const std::vector<double>& db() const { return db_; }
  double tail_slope() const { return tail_slope_; }
  double rho_min() const { return rho_.front(); }
  double rho_max() const { return rho_.back(); }
  double b_min() const { return b_.front(); }
  double b_max() const { return b_.back(); }
  /// max over checked nodes of |G'' + (n-1)(f'/f)G'| / (|G''| + |(n-1)(f'/f)G'|),
  /// with both derivatives taken by finite differences of the table.
  double harmonic_residual() const { return harmonic_residual_; }

  /// Valid for any rho > 0; below rho_min the partial integral is done
  /// adaptively, above rho_max the analytic tail is used.
  GreenPoint at(double rho) const;

  friend GreenData solve_green(const ManifoldModel&, double, double, std::size_t,
                               Exec);

 private:
  double G_value(double rho, std::size_t* seg = nullptr) const;

  ManifoldModel model_;
  double omega_ = 0.0;
  double tail_slope_ = 0.0;
  std::vector<double> rho_, G_, b_, db_;
  double harmonic_residual_ = 0.0;
};

struct GreenOptions {
  double rho_min = 1e-6;
  double rho_max = 1e8;
  std::size_t points_per_decade = 200;
};

/// Throws InadmissibleModel for parabolic models, InvalidArgument for a bad
/// grid and NumericalError when exp_cone has not reached its asymptotic
/// regime at rho_max (|f' - a| > 1e-6).
GreenData solve_green(const ManifoldModel& model, double rho_min, double rho_max,
                      std::size_t points, Exec exec = Exec::serial);
GreenData solve_green(const ManifoldModel& model, const GreenOptions& opts = {},
                      Exec exec = Exec::serial);

/// Root of b(rho) = r. Throws RangeError outside [b_min, b_max].
double rho_of_b(const GreenData& green, double r);

LevelData level_quantities(const GreenData& green, double r);

/// |Hess_{b^2} - (Delta b^2 / n) g|^2 + Ric(grad b^2, grad b^2) at one radius.
double hessian_integrand(const GreenPoint& p, int n);
double hessian_integrand(const GreenData& green, double rho);

/// |Hess_{b^2} - (Delta b^2 / n) g| alone.
double tracefree_hessian(const GreenPoint& p, int n);

/// Cumulative integral over {rho' <= rho} of a radial density, volume form
/// included by the caller. Node values are accumulated once; queries in
/// between add a single smooth Gauss-Kronrod pass, so the result is
/// differentiable in rho to quadrature accuracy.
class RadialIntegral {
 public:
  using Density = std::function<double(const GreenPoint&)>;

  /// from_zero: start at the pole (density must be integrable there);
  /// otherwise the table is anchored at zero at rho_min. Nodes are built up
  /// to rho_hi (default: the whole grid); queries beyond it are integrated
  /// adaptively from the last node.
  RadialIntegral(const GreenData& green, Density density, bool from_zero,
                 Exec exec = Exec::serial, double rho_hi = 0.0);

  double at(double rho) const;

 private:
  double segment(double lo, double hi) const;

  const GreenData* green_;
  Density density_;
  std::vector<double> cum_;  // one entry per grid node up to the cap
};

/// Header comment, then rho,G,b,db,Q with 17 significant digits.
void write_green_csv(const GreenData& green, std::ostream& out);

}  // namespace monolab

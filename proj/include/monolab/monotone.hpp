#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "monolab/green.hpp"

namespace monolab {

/// A radial test function u(rho) with its first two rho-derivatives, given in
/// terms of the Green data at that radius.
struct RadialFunction {
  std::string name;
  std::function<double(const GreenPoint&)> value, d1, d2;

  static RadialFunction constant(double c);
  static RadialFunction grad_b_squared();  // |grad b|^2
  static RadialFunction b_power(double k);  // b^k
};

// A(r) = r^{1-n} int_{b=r} |grad b|^3, Euclidean value not subtracted.
double compute_A(const GreenData& green, double r);

/// V(r) = r^{-n} int_{b<=r} |grad b|^4 and its coarea twin
/// r^{-n} int_0^r s^{n-1} A(s) ds.
class VolumeFunctional {
 public:
  explicit VolumeFunctional(const GreenData& green, Exec exec = Exec::serial,
                            double rho_hi = 0.0);
  double operator()(double r) const;
  double coarea_form(double r) const;
  /// int_{b <= r} |grad b|^4 at the radius rho (no r^{-n}).
  double raw(double rho) const { return table_.at(rho); }

 private:
  const GreenData* green_;
  RadialIntegral table_;
};

/// V_inf(r) = int_{1<=b<=r} (|grad b|^2 - 1)|grad b|^2 b^{-n}, signed for r < 1.
class VinfFunctional {
 public:
  explicit VinfFunctional(const GreenData& green, Exec exec = Exec::serial,
                          double rho_hi = 0.0);
  double operator()(double r) const;
  double at_rho(double rho) const { return table_.at(rho) - anchor_; }

 private:
  const GreenData* green_;
  RadialIntegral table_;
  double anchor_ = 0.0;
};

double compute_V(const GreenData& green, double r);
double compute_Vinf(const GreenData& green, double r);

/// I_u(r) = r^{1-n} int_{b=r} u |grad b|.
double I_functional(const GreenData& green, const RadialFunction& u, double r);
/// r^{1-n} int_{b=r} u_n, u_n the unit normal derivative.
double dI(const GreenData& green, const RadialFunction& u, double r);

/// Delta u + 2 <grad log G, grad u> for radial u, at geodesic radius rho.
double drift_laplacian(const GreenData& green, const RadialFunction& u, double rho);
double drift_laplacian(const GreenPoint& p, int n, const RadialFunction& u);

/// Per-radius theorem residuals. Residual columns are scaled: |lhs - rhs|
/// divided by max(largest term, 1e-6 * natural size). The terms are those of
/// the identity as usually written (A and nV separately in r V' = A - nV);
/// the natural size is omega/r for derivative identities and omega otherwise. Pair identities
/// (third monotonicity, the transfer lemma, the n = 3 pair form) live on the
/// interval [r_{i-1}, r_i]; their first entry is NaN.
struct MonotoneReport {
  std::string model;
  std::vector<double> r_grid;
  std::vector<double> A, V, Vinf, dA, dV, dVinf;
  std::vector<double> rhs_main, rhs_second, rhs_third;
  std::vector<double> residual_main, residual_second, residual_second_e2,
      residual_third, residual_coarea, residual_J, residual_J2, residual_Vinf,
      residual_transfer, residual_I1, residual_dI;
  std::vector<double> first_mono_lhs;  // (A - 2(n-1)V)'
  std::vector<double> second_mono_lhs;  // (r^{2-n}[A - omega])'
  std::vector<double> A_minus_nV;
  std::vector<double> A_minus_Vinf_lhs;  // (A - (n-2)V_inf)'
  std::vector<double> n3_onesided;       // A' - 1/2 int Q b^{-4}, n = 3 only
  std::vector<double> V_coarea_gap;      // |V - coarea form| / V
  std::vector<double> sup_db_outside;
};

MonotoneReport theorem_residuals(const GreenData& green,
                                 const std::vector<double>& r_grid,
                                 Exec exec = Exec::serial);

/// Schema-versioned CSV; the first thirteen columns are the stable contract.
void write_monotone_csv(const MonotoneReport& rep, std::ostream& out);

struct GradientReport {
  double sup_db = 0.0;
  bool sharp_bound = false;          // sup db <= 1 + 1e-10
  bool sup_outside_nonincreasing = false;
  double max_sup_outside_excess = 0.0;  // sup_{b>=r} db - db on {b = r}
  double far_rho = 1e3;
  double db_far = 0.0;
  double predicted_limit = 0.0;  // (V_M / Vol B_1)^{1/(n-2)}
  double limit_rel_error = 0.0;
  bool limit_ok = false;
  double max_grad_G_excess = 0.0;  // max |G'| / ((n-2) G^{(n-1)/(n-2)}) - 1
  double min_area_ratio = 0.0;     // min area(b=r) / (omega r^{n-1})
  double min_volume_ratio = 0.0;   // min Vol(b <= r) / Vol(B_r(0))
  double max_Q = 0.0;
};

GradientReport gradient_suite(const GreenData& green, Exec exec = Exec::serial);

struct PoleFit {
  double laplacian = 0.0;  // 2 n c2
  double c0 = 0.0, c2 = 0.0;
  double fit_residual = 0.0;   // max |db^2 - c0 - c2 rho^2| on the window
  double condition = 0.0;      // of the 2x2 normal matrix
  bool quadratic_fit_ok = false;  // fit_residual <= 1e-8
};

/// Laplacian of |grad b|^2 at the pole from a quadratic fit on [1e-5, 1e-3].
PoleFit pole_laplacian_estimate(const GreenData& green);

}  // namespace monolab

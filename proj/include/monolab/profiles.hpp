#pragma once

#include <string>
#include <vector>

namespace monolab {

/// Volume of the unit sphere S^{n-1} in R^n.
double sphere_area(int n);
/// Volume of the unit ball in R^n.
double ball_volume(int n);

enum class Family { euclidean, exp_cone, power_growth };

std::string to_string(Family family);

/// Warping function f of the metric ds^2 + f(s)^2 g_{S^{n-1}}.
///
/// Every family is concave with f(0) = 0 and f'(0) = 1, so the warped product
/// has nonnegative Ricci curvature:
///   euclidean       f(s) = s
///   exp_cone(a)     f(s) = a s + (1 - a)(1 - e^{-s}),   a in (0, 1]
///   power_growth(b) f(s) = ((1 + s)^b - 1) / b,         b in (0, 1]
/// The exponent range of power_growth that keeps the model nonparabolic
/// depends on n and is enforced by make_model.
class Profile {
 public:
  static Profile euclidean();
  static Profile exp_cone(double a);
  static Profile power_growth(double beta);

  Family family() const { return family_; }
  const std::vector<double>& params() const { return params_; }
  /// lim f'(s): a for exp_cone, 1 for euclidean, 0 for power_growth (b < 1).
  double asymptotic_slope() const;
  /// Exponent p in f(s) ~ s^p at infinity.
  double growth_power() const;

  double f(double s) const;
  double df(double s) const;
  double d2f(double s) const;
  /// s f'(s) - f(s), evaluated without cancellation near s = 0.
  double sdf_minus_f(double s) const;

  /// Closed-form value of the integral of f^{1-n} over [s0, inf), using the
  /// analytic asymptotic form of f. Exact for euclidean and power_growth;
  /// for exp_cone the neglected term is O(e^{-s0}).
  double tail_integral(double s0, int n) const;

  /// `family` or `family:param`, e.g. exp_cone:0.5.
  std::string name() const;

  bool operator==(const Profile&) const = default;

 private:
  Profile(Family family, std::vector<double> params);
  Family family_;
  std::vector<double> params_;
};

/// Validating factory; throws InvalidArgument for a parameter outside the
/// family's documented range.
Profile make_profile(Family family, const std::vector<double>& params);

/// Parses `euclidean`, `exp_cone:0.5`, `power_growth:0.6`.
Profile parse_profile(const std::string& text);

struct ManifoldModel {
  int n = 3;
  Profile profile = Profile::euclidean();

  std::string name() const;  // e.g. exp_cone:0.5,n=4
};

struct NonparabolicityReport {
  bool nonparabolic = false;
  double growth_exponent = 0.0;  // Vol(B_r) ~ r^{growth_exponent}
  double partial_integral = 0.0;  // int_1^R r / Vol(B_r) dr
  double last_decade_increment = 0.0;
  double cutoff = 0.0;
  std::string diagnostic;
};

/// Varopoulos criterion: int_1^inf r / Vol(B_r) dr < inf, decided by the
/// growth exponent and cross-checked numerically up to `cutoff`.
NonparabolicityReport nonparabolicity_check(const Profile& profile, int n,
                                            double cutoff = 1e6);
NonparabolicityReport nonparabolicity_check(const ManifoldModel& model,
                                            double cutoff = 1e6);

/// Throws InadmissibleModel if n < 3 or the model is parabolic.
ManifoldModel make_model(const Profile& profile, int n);

struct CurvatureReport {
  std::vector<double> s_grid;
  std::vector<double> ric_radial;      // -(n-1) f''/f
  std::vector<double> ric_tangential;  // (n-2)(1-f'^2)/f^2 - f''/f
  double min_ricci = 0.0;
};

CurvatureReport curvature_report(const ManifoldModel& model,
                                 const std::vector<double>& s_grid);

/// omega_{n-1} times the integral of f^{n-1} over [0, r].
double volume_ball(const ManifoldModel& model, double r);

struct VolumeRatio {
  double V_M = 0.0;         // lim r^{-n} Vol(B_r)
  double normalized = 0.0;  // V_M / Vol(B_1(0)) = a^{n-1}
};

VolumeRatio asymptotic_volume_ratio(const ManifoldModel& model);

std::vector<double> log_grid(double lo, double hi, std::size_t points);

}  // namespace monolab

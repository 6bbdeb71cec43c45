#include "monolab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "monolab/error.hpp"
#include "monolab/quadrature.hpp"

namespace monolab {

double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double ball_volume(int n) { return sphere_area(n) / n; }

std::string to_string(Family family) {
  switch (family) {
    case Family::euclidean:
      return "euclidean";
    case Family::exp_cone:
      return "exp_cone";
    case Family::power_growth:
      return "power_growth";
  }
  return "unknown";
}

Profile::Profile(Family family, std::vector<double> params)
    : family_(family), params_(std::move(params)) {}

Profile Profile::euclidean() { return Profile(Family::euclidean, {}); }

Profile Profile::exp_cone(double a) {
  if (!(a > 0.0 && a <= 1.0)) {
    throw InvalidArgument("exp_cone slope a must lie in (0, 1], got " +
                          std::to_string(a));
  }
  return Profile(Family::exp_cone, {a});
}

Profile Profile::power_growth(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw InvalidArgument("power_growth exponent must lie in (0, 1], got " +
                          std::to_string(beta));
  }
  return Profile(Family::power_growth, {beta});
}

Profile make_profile(Family family, const std::vector<double>& params) {
  switch (family) {
    case Family::euclidean:
      if (!params.empty()) throw InvalidArgument("euclidean takes no parameters");
      return Profile::euclidean();
    case Family::exp_cone:
      if (params.size() != 1) throw InvalidArgument("exp_cone takes one parameter a");
      return Profile::exp_cone(params[0]);
    case Family::power_growth:
      if (params.size() != 1) throw InvalidArgument("power_growth takes one exponent");
      return Profile::power_growth(params[0]);
  }
  throw InvalidArgument("unknown family");
}

double Profile::asymptotic_slope() const {
  switch (family_) {
    case Family::euclidean:
      return 1.0;
    case Family::exp_cone:
      return params_[0];
    case Family::power_growth:
      return params_[0] == 1.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

double Profile::growth_power() const {
  return family_ == Family::power_growth ? params_[0] : 1.0;
}

double Profile::f(double s) const {
  switch (family_) {
    case Family::euclidean:
      return s;
    case Family::exp_cone: {
      const double a = params_[0];
      return a * s - (1.0 - a) * std::expm1(-s);
    }
    case Family::power_growth: {
      const double b = params_[0];
      return std::expm1(b * std::log1p(s)) / b;
    }
  }
  return 0.0;
}

double Profile::df(double s) const {
  switch (family_) {
    case Family::euclidean:
      return 1.0;
    case Family::exp_cone: {
      const double a = params_[0];
      return a + (1.0 - a) * std::exp(-s);
    }
    case Family::power_growth: {
      const double b = params_[0];
      return std::exp((b - 1.0) * std::log1p(s));
    }
  }
  return 0.0;
}

double Profile::d2f(double s) const {
  switch (family_) {
    case Family::euclidean:
      return 0.0;
    case Family::exp_cone:
      return -(1.0 - params_[0]) * std::exp(-s);
    case Family::power_growth: {
      const double b = params_[0];
      return (b - 1.0) * std::exp((b - 2.0) * std::log1p(s));
    }
  }
  return 0.0;
}

double Profile::sdf_minus_f(double s) const {
  switch (family_) {
    case Family::euclidean:
      return 0.0;
    case Family::exp_cone: {
      // (1-a) (e^{-s}(1+s) - 1)
      const double c = 1.0 - params_[0];
      if (s > 0.1) return c * (std::exp(-s) * (1.0 + s) - 1.0);
      // e^{-s}(1+s) - 1 = sum_{k>=2} (-1)^{k+1} (k-1) s^k / k!
      double term = 1.0;  // s^k / k!
      double sum = 0.0;
      for (int k = 1; k <= 30; ++k) {
        term *= s / k;
        if (k >= 2) sum += ((k % 2 == 0) ? -1.0 : 1.0) * (k - 1) * term;
      }
      return c * sum;
    }
    case Family::power_growth: {
      const double b = params_[0];
      if (s > 0.05) return s * df(s) - f(s);
      // f = sum_k C(b,k) s^k / b, so s f' - f = sum_k (k-1) C(b,k) s^k / b
      double binom = b;  // C(b,1)
      double pw = s;
      double sum = 0.0;
      for (int k = 2; k <= 40; ++k) {
        binom *= (b - (k - 1)) / k;
        pw *= s;
        sum += (k - 1) * binom * pw;
      }
      return sum / b;
    }
  }
  return 0.0;
}

double Profile::tail_integral(double s0, int n) const {
  switch (family_) {
    case Family::euclidean:
      return std::pow(s0, 2.0 - n) / (n - 2.0);
    case Family::exp_cone: {
      const double a = params_[0];
      return std::pow(a * s0 + (1.0 - a), 2.0 - n) / (a * (n - 2.0));
    }
    case Family::power_growth: {
      // f^{1-n} = b^{n-1} sum_k C(n-2+k, k) (1+s)^{-b(n-1+k)}
      const double b = params_[0];
      const double x = std::log1p(s0);
      double coeff = 1.0;
      double sum = 0.0;
      for (int k = 0; k < 2000; ++k) {
        if (k > 0) coeff *= static_cast<double>(n - 2 + k) / k;
        const double m = b * (n - 1 + k);
        const double term = coeff * std::exp((1.0 - m) * x) / (m - 1.0);
        sum += term;
        if (term < 1e-18 * sum) break;
      }
      return std::pow(b, n - 1.0) * sum;
    }
  }
  return 0.0;
}

std::string Profile::name() const {
  if (family_ == Family::euclidean) return "euclidean";
  std::ostringstream os;
  os << to_string(family_) << ':' << params_[0];
  return os.str();
}

Profile parse_profile(const std::string& text) {
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  const std::string t = trim(text);
  const auto colon = t.find(':');
  const std::string fam = trim(t.substr(0, colon));
  std::vector<double> params;
  if (colon != std::string::npos) {
    const std::string p = trim(t.substr(colon + 1));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(p, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("bad profile parameter '" + p + "'");
    }
    if (used != p.size()) throw InvalidArgument("bad profile parameter '" + p + "'");
    params.push_back(v);
  }
  if (fam == "euclidean") return make_profile(Family::euclidean, params);
  if (fam == "exp_cone") return make_profile(Family::exp_cone, params);
  if (fam == "power_growth") return make_profile(Family::power_growth, params);
  throw InvalidArgument("unknown profile family '" + fam + "'");
}

std::string ManifoldModel::name() const {
  return profile.name() + ",n=" + std::to_string(n);
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0 && hi > lo) || points < 2) {
    throw InvalidArgument("log_grid needs 0 < lo < hi and at least two points");
  }
  std::vector<double> g(points);
  const double step = std::log(hi / lo) / (points - 1.0);
  for (std::size_t i = 0; i < points; ++i) g[i] = lo * std::exp(step * i);
  g.front() = lo;
  g.back() = hi;
  return g;
}

namespace {

// Volume of B_r on a log grid by cumulative segment integrals.
std::vector<double> cumulative_volume(const Profile& p, int n,
                                      const std::vector<double>& r) {
  std::vector<double> v(r.size());
  const double w = sphere_area(n);
  auto integrand = [&](double s) { return std::pow(p.f(s), n - 1.0); };
  double acc = quad::integrate_checked(integrand, 0.0, r[0], 1e-13, "ball volume");
  v[0] = w * acc;
  for (std::size_t i = 1; i < r.size(); ++i) {
    acc += quad::integrate_checked(integrand, r[i - 1], r[i], 1e-13, "ball volume");
    v[i] = w * acc;
  }
  return v;
}

}  // namespace

NonparabolicityReport nonparabolicity_check(const Profile& profile, int n,
                                            double cutoff) {
  NonparabolicityReport rep;
  rep.cutoff = cutoff;
  rep.growth_exponent = 1.0 + profile.growth_power() * (n - 1);
  rep.nonparabolic = rep.growth_exponent > 2.0;

  const auto r = log_grid(1.0, cutoff, 601);
  const auto vol = cumulative_volume(profile, n, r);
  // trapezoid in log r of r^2 / Vol(B_r)
  const std::size_t decade = 600 / static_cast<std::size_t>(std::max(1.0, std::log10(cutoff)));
  double acc = 0.0;
  double before_last = 0.0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double h = std::log(r[i] / r[i - 1]);
    acc += 0.5 * h * (r[i] * r[i] / vol[i] + r[i - 1] * r[i - 1] / vol[i - 1]);
    if (i == r.size() - 1 - decade) before_last = acc;
  }
  rep.partial_integral = acc;
  rep.last_decade_increment = acc - before_last;

  std::ostringstream os;
  os << "Vol(B_r) ~ r^" << rep.growth_exponent << ", int_1^" << cutoff
     << " r/Vol dr = " << acc << " (last decade +" << rep.last_decade_increment
     << ")";
  if (!rep.nonparabolic) os << "; parabolic: growth exponent <= 2";
  rep.diagnostic = os.str();
  return rep;
}

NonparabolicityReport nonparabolicity_check(const ManifoldModel& model,
                                            double cutoff) {
  return nonparabolicity_check(model.profile, model.n, cutoff);
}

ManifoldModel make_model(const Profile& profile, int n) {
  if (n < 3) throw InadmissibleModel("dimension must be >= 3, got " + std::to_string(n));
  if (profile.family() == Family::power_growth &&
      !(profile.params()[0] > 1.0 / (n - 1.0))) {
    throw InadmissibleModel(profile.name() + " is parabolic in dimension " +
                            std::to_string(n) + ": 1 + b(n-1) <= 2");
  }
  return ManifoldModel{n, profile};
}

CurvatureReport curvature_report(const ManifoldModel& model,
                                 const std::vector<double>& s_grid) {
  CurvatureReport rep;
  rep.s_grid = s_grid;
  rep.ric_radial.resize(s_grid.size());
  rep.ric_tangential.resize(s_grid.size());
  const int n = model.n;
  const Profile& p = model.profile;
  double lo = 0.0;
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    const double f = p.f(s);
    const double f1 = p.df(s);
    const double f2 = p.d2f(s);
    rep.ric_radial[i] = -(n - 1.0) * f2 / f;
    rep.ric_tangential[i] = (n - 2.0) * (1.0 - f1 * f1) / (f * f) - f2 / f;
    const double m = std::min(rep.ric_radial[i], rep.ric_tangential[i]);
    lo = (i == 0) ? m : std::min(lo, m);
  }
  rep.min_ricci = lo;
  return rep;
}

double volume_ball(const ManifoldModel& model, double r) {
  if (!(r > 0.0)) throw InvalidArgument("volume_ball needs r > 0");
  const int n = model.n;
  auto integrand = [&](double s) { return std::pow(model.profile.f(s), n - 1.0); };
  // Split at powers of ten so the integrand stays well resolved on long ranges.
  double acc = 0.0;
  double lo = 0.0;
  double hi = std::min(r, 1.0);
  while (true) {
    acc += quad::integrate_checked(integrand, lo, hi, 1e-12, "volume_ball");
    if (hi >= r) break;
    lo = hi;
    hi = std::min(r, hi * 10.0);
  }
  return sphere_area(n) * acc;
}

VolumeRatio asymptotic_volume_ratio(const ManifoldModel& model) {
  VolumeRatio v;
  const double a = model.profile.asymptotic_slope();
  v.normalized = std::pow(a, model.n - 1.0);
  v.V_M = ball_volume(model.n) * v.normalized;
  return v;
}

}  // namespace monolab

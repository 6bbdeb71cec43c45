#include "monolab/cones.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "monolab/diff.hpp"
#include "monolab/error.hpp"
#include "monolab/monotone.hpp"
#include "monolab/quadrature.hpp"

namespace monolab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// (1/r) sup_{s<=r} |f(s) - a s|. g = f - a s is concave with g(0) = 0, so the
// sup is max(g at its critical point, -g(r)).
double cone_gap(const Profile& p, double a, double r) {
  double s_star = 0.0;
  if (a >= 1.0) {
    s_star = 0.0;
  } else if (a <= p.df(r)) {
    s_star = r;
  } else {
    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(
        [&](double s) { return p.df(s) - a; }, 0.0, r, 1.0 - a, p.df(r) - a,
        boost::math::tools::eps_tolerance<double>(52), iters);
    s_star = 0.5 * (root.first + root.second);
  }
  const double top = p.f(s_star) - a * s_star;
  const double bottom = a * r - p.f(r);
  return std::max({top, bottom, 0.0}) / r;
}

struct Fit {
  Eigen::VectorXd coef;
  double r_squared = 1.0;
};

Fit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Fit fit;
  fit.coef = X.colPivHouseholderQr().solve(y);
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  const double ss_res = (X * fit.coef - y).squaredNorm();
  fit.r_squared = ss_tot <= 1e-28 * static_cast<double>(y.size()) * (1.0 + mean * mean)
                      ? 1.0
                      : 1.0 - ss_res / ss_tot;
  return fit;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y, std::size_t lo,
                 std::size_t hi) {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  return s;
}

RadialIntegral::Density with_volume(const GreenData& g,
                                    std::function<double(const GreenPoint&)> density) {
  const double w = g.omega();
  const int n = g.n();
  return [w, n, density = std::move(density)](const GreenPoint& p) {
    return density(p) * w * std::pow(p.f, n - 1.0);
  };
}

}  // namespace

ThetaValue theta_hat(const Profile& p, double r) {
  if (!(r > 0.0)) throw InvalidArgument("theta_hat: r must be positive");
  constexpr int kGrid = 64;
  std::array<double, kGrid + 1> phi{};
  int best = kGrid;
  for (int i = kGrid; i >= 1; --i) {
    phi[i] = cone_gap(p, static_cast<double>(i) / kGrid, r);
    if (phi[i] < phi[best]) best = i;
  }
  ThetaValue out{phi[best], static_cast<double>(best) / kGrid};
  if (out.theta == 0.0) return out;

  // The gap is the max of a decreasing and an increasing function of a, so
  // it is unimodal and the grid minimum brackets the optimum.
  double lo = static_cast<double>(std::max(best - 1, 0)) / kGrid;
  double hi = static_cast<double>(std::min(best + 1, kGrid)) / kGrid;
  lo = std::max(lo, 1e-12);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = cone_gap(p, x1, r), f2 = cone_gap(p, x2, r);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = cone_gap(p, x1, r);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = cone_gap(p, x2, r);
    }
  }
  for (double a : {x2, x1}) {
    const double v = cone_gap(p, a, r);
    if (v < out.theta || (v == out.theta && a > out.best_a)) out = {v, a};
  }
  return out;
}

ThetaSeries theta_series(const ManifoldModel& model, const std::vector<double>& r_grid,
                         Exec exec) {
  ThetaSeries s{r_grid, std::vector<double>(r_grid.size()), std::vector<double>(r_grid.size())};
  for_each_index(exec, r_grid.size(), [&](std::size_t i) {
    const ThetaValue v = theta_hat(model.profile, r_grid[i]);
    s.theta[i] = v.theta;
    s.best_a[i] = v.best_a;
  });
  return s;
}

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::dini_log:
      return "dini_log";
    case Criterion::ode_decay:
      return "ode_decay";
    case Criterion::summability:
      return "summability";
  }
  return "?";
}

CriteriaVerdict dini_check(const ThetaSeries& th, double alpha) {
  if (!(alpha > 1.0)) throw InvalidArgument("dini_check: alpha must exceed 1");
  const auto& r = th.r_grid;
  const std::size_t N = r.size();
  if (N < 10 || th.theta.size() != N) throw InvalidArgument("dini_check: need >= 10 samples");
  if (!(r.front() > 1.0) || r.back() < 1e4)
    throw InvalidArgument("dini_check: grid must lie in (1, inf) and reach r >= 1e4");
  for (std::size_t i = 1; i < N; ++i)
    if (!(r[i] > r[i - 1])) throw InvalidArgument("dini_check: grid must be increasing");

  CriteriaVerdict v;
  v.criterion = Criterion::dini_log;
  if (std::all_of(th.theta.begin(), th.theta.end(), [](double x) { return x == 0.0; })) {
    v.holds = true;
    v.diagnostics = "theta vanishes identically";
    return v;
  }

  std::vector<double> u(N), y(N);
  for (std::size_t i = 0; i < N; ++i) {
    u[i] = std::log(r[i]);
    y[i] = th.theta[i] * th.theta[i] * std::pow(u[i], alpha);  // integrand in u = log r
  }
  const double partial = trapezoid(u, y, 0, N - 1);

  // Tail model on the last decade.
  std::size_t lo = N - 1;
  while (lo > 0 && r[lo - 1] >= r.back() / 10.0) --lo;
  const std::size_t m = N - lo;
  bool tail_zero = true;
  for (std::size_t i = lo; i < N; ++i) tail_zero = tail_zero && th.theta[i] == 0.0;
  if (tail_zero) {
    v.holds = true;
    v.value = partial;
    v.diagnostics = "theta vanishes on the last decade";
    return v;
  }
  if (m < 4) throw InvalidArgument("dini_check: need >= 4 samples on the last decade");
  Eigen::MatrixXd X(m, 3);
  Eigen::VectorXd Y(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double th_i = th.theta[lo + i];
    if (!(th_i > 0.0)) {
      v.inconclusive = true;
      v.diagnostics = "inconclusive: theta not positive on the last decade";
      return v;
    }
    X(i, 0) = 1.0;
    X(i, 1) = u[lo + i];
    X(i, 2) = std::log(u[lo + i]);
    Y(i) = std::log(th_i);
  }
  const Fit fit = least_squares(X, Y);
  const double c = fit.coef(0);
  double p = fit.coef(1);
  const double q = fit.coef(2);
  v.exponent = p;
  v.exponent2 = q;
  v.r_squared = fit.r_squared;
  std::ostringstream d;
  d << "tail fit log theta = " << fmt("%.6g", c) << " + " << fmt("%.6g", p) << " log r + "
    << fmt("%.6g", q) << " log log r, R^2 = " << fmt("%.6f", fit.r_squared);
  if (fit.r_squared < 0.99) {
    v.inconclusive = true;
    v.value = partial;
    v.diagnostics = "inconclusive: " + d.str();
    return v;
  }

  // Decade increments of the partial integral must decrease.
  bool cauchy = true;
  {
    std::vector<double> inc;
    double edge = r.back();
    std::size_t hi = N - 1;
    while (true) {
      std::size_t a = hi;
      while (a > 0 && r[a - 1] >= edge / 10.0 * (1.0 - 1e-12)) --a;
      if (a == hi || r[a] > edge / 10.0 * 1.1) break;
      inc.push_back(trapezoid(u, y, a, hi));
      hi = a;
      edge = r[a];
      if (inc.size() == 3) break;
    }
    for (std::size_t i = 1; i < inc.size(); ++i) cauchy = cauchy && inc[i - 1] <= inc[i];
    d << "; decade increments";
    for (double x : inc) d << " " << fmt("%.3g", x);
  }

  bool convergent = false;
  const double k = 2.0 * q + alpha;
  if (p < -1e-3) {
    convergent = true;
  } else if (std::abs(p) <= 1e-3) {
    p = 0.0;
    convergent = k < -1.0;
  }
  double tail = kNaN;
  if (convergent) {
    const double uL = u.back();
    if (p == 0.0) {
      tail = std::exp(2.0 * c) * std::pow(uL, k + 1.0) / (-(k + 1.0));
    } else {
      tail = quad::integrate_to_infinity(
                 [&](double x) {
                   const double uu = uL + x;
                   return std::exp(2.0 * c + 2.0 * p * uu + k * std::log(uu));
                 },
                 0.0, 1e-10)
                 .value;
    }
  }
  v.value = partial + (convergent ? tail : 0.0);
  v.holds = convergent && cauchy;
  d << "; " << (convergent ? "tail integrable" : "tail not integrable");
  if (convergent && !cauchy) d << " but partial integrals not Cauchy";
  v.diagnostics = d.str();
  if (!convergent) v.value = std::numeric_limits<double>::infinity();
  return v;
}

CriteriaVerdict ode_criterion_check(const std::vector<double>& s, const std::vector<double>& F,
                                    double alpha, double epsilon, double rel_tol) {
  if (!(alpha > 0.0) || !(epsilon >= 0.0) || !(1.0 / alpha - 1.0 > 2.0 * epsilon))
    throw InvalidArgument("ode_criterion_check: need 1/alpha - 1 > 2 epsilon >= 0");
  const std::size_t N = s.size();
  if (N < 10 || F.size() != N) throw InvalidArgument("ode_criterion_check: need >= 10 samples");
  if (s.front() < 1.0 - 1e-12) throw InvalidArgument("ode_criterion_check: samples start at s >= 1");
  for (std::size_t i = 0; i < N; ++i) {
    if (!(F[i] >= 0.0)) throw InvalidArgument("ode_criterion_check: F must be nonnegative");
    if (i > 0 && !(s[i] > s[i - 1])) throw InvalidArgument("ode_criterion_check: s must increase");
  }

  CriteriaVerdict v;
  v.criterion = Criterion::ode_decay;
  const auto dF = diff::sampled_derivative(s, F, 1);
  std::ostringstream d;
  for (std::size_t i = 0; i < N; ++i) {
    const double need = std::pow(F[i], 1.0 + alpha);
    if (-dF[i] < need * (1.0 - rel_tol)) {
      v.violation_at = s[i];
      d << "-F' < F^{1+alpha} first at s = " << fmt("%.6g", s[i]) << " (-F' = "
        << fmt("%.6g", -dF[i]) << ", F^{1+alpha} = " << fmt("%.6g", need) << "); ";
      break;
    }
  }

  // Decay lemma: F(t) <= (alpha (t - s0) + F(s0)^{-alpha})^{-1/alpha}.
  if (F[0] > 0.0) {
    for (std::size_t i = 0; i < N; ++i) {
      const double bound = std::pow(alpha * (s[i] - s[0]) + std::pow(F[0], -alpha), -1.0 / alpha);
      v.lemma_excess = std::max(v.lemma_excess, (F[i] - bound) / bound);
    }
  }

  const double beta = 2.0 * epsilon;
  std::vector<double> w(N);
  for (std::size_t i = 0; i < N; ++i) w[i] = std::abs(dF[i]) * std::pow(s[i], 1.0 + beta);
  v.value = trapezoid(s, w, 0, N - 1);

  // Tail: slope of log(-F') in log s over the last fifth of the range.
  const double cut = s.front() + 0.8 * (s.back() - s.front());
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < N; ++i) {
    if (s[i] >= cut && -dF[i] > 0.0) {
      xs.push_back(std::log(s[i]));
      ys.push_back(std::log(-dF[i]));
    }
  }
  bool finite = false;
  if (xs.size() >= 3) {
    Eigen::MatrixXd X(xs.size(), 2);
    Eigen::VectorXd Y(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = xs[i];
      Y(i) = ys[i];
    }
    const Fit fit = least_squares(X, Y);
    v.exponent = fit.coef(1);
    v.r_squared = fit.r_squared;
    finite = v.exponent < -(2.0 + beta);
    d << "tail slope of log(-F') = " << fmt("%.6g", v.exponent) << " (finite iff < "
      << fmt("%.3g", -(2.0 + beta)) << ")";
  } else {
    d << "F' vanishes on the tail";
    finite = true;
  }
  v.holds = v.violation_at < 0.0 && finite;
  v.diagnostics = d.str();
  return v;
}

UniqueConeScenario unique_cone_scenario(const GreenData& green, double alpha, double epsilon,
                                        double c_scale, Exec exec) {
  const int n = green.n();
  const double r_hi = std::min(green.b_max() / 1.01, 1e6);
  if (r_hi < 300.0) throw RangeError("unique_cone_scenario: b-table too short", 300.0, r_hi);
  VolumeFunctional V(green, exec, rho_of_b(green, r_hi));
  auto X = [&](double r) { return 2.0 * (n - 1.0) * V(r) - compute_A(green, r); };

  UniqueConeScenario out;
  out.model = green.model().name();
  // X = K + C r^{-n} + (exponentially small): Aitken on a geometric triple.
  const double x0 = X(40.0), x1 = X(std::sqrt(40.0 * 300.0)), x2 = X(300.0);
  const double d1 = x1 - x0, d2 = x2 - x1;
  out.K = (d2 - d1) != 0.0 ? x2 - d2 * d2 / (d2 - d1) : x2;

  const double scale = std::max(std::abs(out.K), 1e-300);
  std::vector<double> logr, logF;
  for (double s = 1.0;; s += 0.02) {
    const double r = c_scale * std::exp(s);
    if (r > r_hi) break;
    const double F = X(r) - out.K;
    if (!(F > 1e-8 * scale)) break;
    out.s.push_back(s);
    out.F.push_back(F);
    logr.push_back(std::log(r));
    logF.push_back(std::log(F));
  }
  if (out.s.size() < 20)
    throw NumericalError("unique_cone_scenario: X - K falls below 1e-8 |K| too early");
  {
    Eigen::MatrixXd M(logr.size(), 2);
    Eigen::VectorXd Y(logr.size());
    for (std::size_t i = 0; i < logr.size(); ++i) {
      M(i, 0) = 1.0;
      M(i, 1) = logr[i];
      Y(i) = logF[i];
    }
    out.fitted_decay = least_squares(M, Y).coef(1);
  }
  out.verdict = ode_criterion_check(out.s, out.F, alpha, epsilon);
  const auto dF = diff::sampled_derivative(out.s, out.F, 1);
  for (std::size_t i = 0; i < out.s.size(); ++i) {
    const double th = theta_hat(green.model().profile, std::exp(out.s[i])).theta;
    if (-dF[i] > 0.0) out.max_c_ratio = std::max(out.max_c_ratio, std::pow(th, 2.0 + 2.0 * epsilon) / -dF[i]);
  }
  out.verdict.diagnostics += "; K = " + fmt("%.12g", out.K) + ", fitted decay of X - K = r^" +
                             fmt("%.4g", out.fitted_decay) + ", sup theta^{2+2eps}/(-F') = " +
                             fmt("%.4g", out.max_c_ratio);
  return out;
}

FundRatioReport fund_ratio_report(const GreenData& green, const std::vector<double>& r_grid,
                                  double epsilon, double c_scale, double window_lo,
                                  double window_hi, Exec exec) {
  if (!(epsilon > 0.0) || !(c_scale > 1.0))
    throw InvalidArgument("fund_ratio_report: need epsilon > 0 and c > 1");
  if (asymptotic_volume_ratio(green.model()).V_M <= 0.0)
    throw InadmissibleModel("fund_ratio_report: model needs Euclidean volume growth");
  const std::size_t N = r_grid.size();
  if (N < 2) throw InvalidArgument("fund_ratio_report: need at least 2 radii");
  for (std::size_t i = 1; i < N; ++i)
    if (!(r_grid[i] > r_grid[i - 1])) throw InvalidArgument("fund_ratio_report: grid must increase");
  const int n = green.n();
  const double rho_hi = rho_of_b(green, r_grid.back()) * 1.01;

  RadialIntegral L1(green, with_volume(green, [n](const GreenPoint& p) { return tracefree_hessian(p, n); }),
                    true, exec, rho_hi);
  RadialIntegral L2(green, with_volume(green, [n](const GreenPoint& p) {
                      const double h = tracefree_hessian(p, n);
                      return h * h;
                    }),
                    true, exec, rho_hi);
  RadialIntegral IQ(green, with_volume(green, [n](const GreenPoint& p) { return hessian_integrand(p, n); }),
                    true, exec, rho_hi);
  RadialIntegral IQbn(green, with_volume(green, [n](const GreenPoint& p) {
                        return hessian_integrand(p, n) * std::pow(p.b, -static_cast<double>(n));
                      }),
                      true, exec, rho_hi);

  const Profile& prof = green.model().profile;
  const double pw = 2.0 + 2.0 * epsilon;
  auto weighted = [&](double u) { return std::pow(theta_hat(prof, std::exp(u) / c_scale).theta, pw); };

  // int_0^r theta_{s/c}^{2+2eps} ds / s, accumulated along the grid.
  std::vector<double> cum(N);
  for_each_index(exec, N, [&](std::size_t i) {
    const double hi = std::log(r_grid[i]);
    const double lo = i == 0 ? hi - 40.0 : std::log(r_grid[i - 1]);
    cum[i] = quad::integrate(weighted, lo, hi, 1e-10, 12).value;
  });
  for (std::size_t i = 1; i < N; ++i) cum[i] += cum[i - 1];

  FundRatioReport rep;
  rep.model = green.model().name();
  rep.epsilon = epsilon;
  rep.c_scale = c_scale;
  rep.window_lo = window_lo;
  rep.window_hi = window_hi;
  rep.r_grid = r_grid;
  rep.series = {{"tracefree_l1", std::vector<double>(N)},
                {"tracefree_l2", std::vector<double>(N)},
                {"first_mono", std::vector<double>(N)},
                {"second_mono", std::vector<double>(N)}};
  std::vector<std::array<double, 4>> den(N), nums(N);
  for_each_index(exec, N, [&](std::size_t i) {
    const double r = r_grid[i];
    const double rho = rho_of_b(green, r);
    const double rn = std::pow(r, -static_cast<double>(n));
    const double th = theta_hat(prof, r / c_scale).theta;
    // r (A - 2(n-1)V)' and r^{n-1} (r^{2-n}[A - omega])' through the
    // first and second monotonicity identities.
    den[i] = {rn * L1.at(rho), rn * L2.at(rho), 0.5 * rn * IQ.at(rho), 0.5 * IQbn.at(rho)};
    const std::array<double, 4> num = {std::pow(th, 1.0 + epsilon), std::pow(th, pw),
                                       std::pow(th, pw), cum[i]};
    nums[i] = num;
    for (int k = 0; k < 4; ++k)
      rep.series[k].ratio[i] = den[i][k] < 1e-14 ? kNaN : num[k] / den[i][k];
  });

  rep.passed = true;
  for (int k = 0; k < 4; ++k) {
    FundRatioSeries& s = rep.series[k];
    // 0/0 on flat space: a vanishing numerator makes the ratio meaningless even
    // when roundoff lifts the denominator above the guard.
    s.applicable = std::all_of(den.begin(), den.end(), [k](const auto& d) { return d[k] >= 1e-14; }) &&
                   std::any_of(nums.begin(), nums.end(), [k](const auto& v) { return v[k] > 0.0; });
    if (!s.applicable) {
      s.finite = true;
      s.stable = true;
      s.sup = s.variation = kNaN;
      continue;
    }
    s.finite = std::all_of(s.ratio.begin(), s.ratio.end(), [](double x) { return std::isfinite(x); });
    double hi = -1e300, lo = 1e300;
    std::size_t count = 0;
    for (std::size_t i = 0; i < N; ++i) {
      if (r_grid[i] < window_lo * (1 - 1e-12) || r_grid[i] > window_hi * (1 + 1e-12)) continue;
      hi = std::max(hi, s.ratio[i]);
      lo = std::min(lo, s.ratio[i]);
      ++count;
    }
    if (count < 2) throw InvalidArgument("fund_ratio_report: stability window holds < 2 radii");
    s.sup = hi;
    s.variation = (hi - lo) / hi;
    s.stable = s.finite && s.variation < 0.2;
    rep.passed = rep.passed && s.finite && s.stable;
  }
  return rep;
}

WeightedDistance weighted_distance(const HeatData& heat, const EntropyReport& entropy,
                                   const std::vector<double>& alphas, double t_large, Exec exec) {
  for (double a : alphas)
    if (!(a >= 1.0)) throw InvalidArgument("weighted_distance: alpha must be >= 1");
  if (entropy.t_grid.size() != heat.t_grid.size())
    throw InvalidArgument("weighted_distance: entropy report does not match the heat data");
  const Profile& prof = heat.model.profile;

  // Theta on a log grid, interpolated in log-log.
  double rho_top = 0.0;
  for (std::size_t k = 0; k < heat.t_grid.size(); ++k) rho_top = std::max(rho_top, heat.rho(k, heat.xi.size() - 1));
  const double lo = 1e-6;
  const auto grid = log_grid(lo, std::max(rho_top, 1.0) * 1.01,
                             static_cast<std::size_t>(40.0 * std::log10(std::max(rho_top, 1.0) * 1.01 / lo)) + 2);
  std::vector<double> tab(grid.size());
  for_each_index(exec, grid.size(), [&](std::size_t i) { tab[i] = theta_hat(prof, grid[i]).theta; });
  auto theta_at = [&](double rho) {
    if (rho <= 0.0) return 0.0;
    if (rho <= grid.front()) return tab.front() * rho / grid.front();
    const auto it = std::upper_bound(grid.begin(), grid.end(), rho);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - grid.begin()), grid.size() - 1) - 1;
    const double u = std::log(rho / grid[i]) / std::log(grid[i + 1] / grid[i]);
    if (tab[i] > 0.0 && tab[i + 1] > 0.0) return std::exp((1 - u) * std::log(tab[i]) + u * std::log(tab[i + 1]));
    return (1 - u) * tab[i] + u * tab[i + 1];
  };

  WeightedDistance out;
  out.model = heat.model.name();
  out.t = heat.t_grid;
  out.alphas = alphas;
  out.t_large = t_large;
  const std::size_t K = heat.t_grid.size();
  out.C.resize(K);
  out.ratio.resize(K);
  out.C_alpha.assign(alphas.size(), std::vector<double>(K));
  for_each_index(exec, K, [&](std::size_t k) {
    const auto mu = heat.density(k);
    const std::size_t N = mu.size();
    std::vector<double> th(N), y(N);
    for (std::size_t j = 0; j < N; ++j) th[j] = theta_at(heat.rho(k, j));
    for (std::size_t j = 0; j < N; ++j) y[j] = th[j] * mu[j];
    out.C[k] = quad::simpson(y, heat.dxi());
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      for (std::size_t j = 0; j < N; ++j) y[j] = std::pow(th[j], alphas[a]) * mu[j];
      out.C_alpha[a][k] = std::pow(quad::simpson(y, heat.dxi()), 1.0 / alphas[a]);
    }
    const double den = entropy.hess_only[k];
    out.ratio[k] = out.C[k] == 0.0 ? 0.0 : out.C[k] * out.C[k] / den;
  });
  for (std::size_t k = 0; k < K; ++k)
    if (out.t[k] >= t_large) out.sup_ratio_large_t = std::max(out.sup_ratio_large_t, out.ratio[k]);
  return out;
}

namespace {

struct Pt {
  double x, y;
};

double dist_to_segment(Pt p, Pt a, Pt b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - a.x - t * dx, p.y - a.y - t * dy);
}

// Parameter interval of a + t (b - a), t in [0, 1], inside |x| <= r.
bool clip_to_disk(Pt a, Pt b, double r, double& t0, double& t1) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double A = dx * dx + dy * dy;
  const double B = 2.0 * (a.x * dx + a.y * dy);
  const double C = a.x * a.x + a.y * a.y - r * r;
  if (A == 0.0) {
    t0 = 0.0;
    t1 = 1.0;
    return C <= 0.0;
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  t0 = std::max(0.0, (-B - sq) / (2.0 * A));
  t1 = std::min(1.0, (-B + sq) / (2.0 * A));
  return t0 <= t1;
}

}  // namespace

ThetaSeries koch_theta(int level, double angle, int scales) {
  if (level < 0 || level > 10) throw InvalidArgument("koch_theta: level must be in [0, 10]");
  if (!(angle > M_PI / 2.0 && angle <= M_PI)) throw InvalidArgument("koch_theta: angle must be in (pi/2, pi]");
  if (scales < 1) throw InvalidArgument("koch_theta: need at least one scale");
  std::vector<Pt> pts = {{0.0, 0.0}, {1.0, 0.0}};
  const double lift = 0.5 * std::tan(0.5 * (M_PI - angle));
  for (int l = 0; l < level; ++l) {
    std::vector<Pt> next;
    next.reserve(2 * pts.size());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const Pt a = pts[i], b = pts[i + 1];
      const double dx = b.x - a.x, dy = b.y - a.y;
      next.push_back(a);
      next.push_back({0.5 * (a.x + b.x) - lift * dy, 0.5 * (a.y + b.y) + lift * dx});
    }
    next.push_back(pts.back());
    pts.swap(next);
  }

  ThetaSeries out;
  for (int k = 1; k <= scales; ++k) {
    const double r = std::ldexp(1.0, -k);
    // Exit point: first crossing of |x| = r along the curve.
    Pt exit{r, 0.0};
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      double t0, t1;
      if (std::hypot(pts[i + 1].x, pts[i + 1].y) > r && clip_to_disk(pts[i], pts[i + 1], r, t0, t1)) {
        exit = {pts[i].x + t1 * (pts[i + 1].x - pts[i].x), pts[i].y + t1 * (pts[i + 1].y - pts[i].y)};
        break;
      }
    }
    const double e = std::hypot(exit.x, exit.y);
    const Pt tip{exit.x * r / e, exit.y * r / e};

    std::vector<std::pair<Pt, Pt>> pieces;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      double t0, t1;
      if (!clip_to_disk(pts[i], pts[i + 1], r, t0, t1)) continue;
      const Pt a = pts[i], b = pts[i + 1];
      pieces.push_back({{a.x + t0 * (b.x - a.x), a.y + t0 * (b.y - a.y)},
                        {a.x + t1 * (b.x - a.x), a.y + t1 * (b.y - a.y)}});
    }
    // Curve to segment: distance to a segment is convex along each piece.
    double d = 0.0;
    for (const auto& pc : pieces)
      d = std::max({d, dist_to_segment(pc.first, {0, 0}, tip), dist_to_segment(pc.second, {0, 0}, tip)});
    // Segment to curve, sampled.
    constexpr int kSamples = 2000;
    for (int i = 0; i <= kSamples; ++i) {
      const double t = static_cast<double>(i) / kSamples;
      const Pt p{t * tip.x, t * tip.y};
      double best = 1e300;
      for (const auto& pc : pieces) best = std::min(best, dist_to_segment(p, pc.first, pc.second));
      d = std::max(d, best);
    }
    out.r_grid.push_back(r);
    out.theta.push_back(d / r);
    out.best_a.push_back(1.0);
  }
  return out;
}

void write_theta_csv(const ThetaSeries& th, const std::string& label, std::ostream& out) {
  out << "# monolab theta v1 " << label << "\n";
  out << "r,theta,best_a\n";
  char buf[128];
  for (std::size_t i = 0; i < th.r_grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", th.r_grid[i], th.theta[i], th.best_a[i]);
    out << buf;
  }
}

void write_verdict_line(const CriteriaVerdict& v, std::ostream& out) {
  std::string diag = v.diagnostics;
  std::replace(diag.begin(), diag.end(), '"', '\'');
  out << to_string(v.criterion) << "," << (v.holds ? "true" : "false") << ","
      << fmt("%.17g", v.value) << ",\"" << diag << "\"\n";
}

}  // namespace monolab

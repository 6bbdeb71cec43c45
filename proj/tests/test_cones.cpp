#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <fstream>
#include <random>
#include <sstream>

#include "monolab/cones.hpp"
#include "monolab/error.hpp"
#include "oracles.hpp"

using namespace monolab;

namespace {

ThetaSeries closed_form(double (*theta)(double), double lo = 10.0, double hi = 1e5, std::size_t n = 200) {
  ThetaSeries t{log_grid(lo, hi, n), {}, {}};
  for (double r : t.r_grid) {
    t.theta.push_back(theta(r));
    t.best_a.push_back(1.0);
  }
  return t;
}

std::vector<double> samples(double lo, double step, std::size_t count) {
  std::vector<double> s;
  for (std::size_t i = 0; i < count; ++i) s.push_back(lo + step * i);
  return s;
}

}  // namespace

TEST_CASE("flat space has no cone gap") {
  for (double r : {1e-3, 1.0, 1e5}) {
    const ThetaValue v = theta_hat(Profile::euclidean(), r);
    CHECK(v.theta == 0.0);
    CHECK(v.best_a == 1.0);
  }
}

TEST_CASE("cone gap against exhaustive search") {
  const auto f = [](double s) { return oracle::f_exp_cone(0.5, s); };
  const ThetaValue far = theta_hat(Profile::exp_cone(0.5), 100.0);
  const double ref = oracle::theta_brute(f, 100.0, 0.49, 0.53, 4001, 20000);
  CHECK(far.theta <= ref * (1.0 + 1e-9));
  CHECK(far.theta == doctest::Approx(ref).epsilon(2e-3));
  CHECK(far.theta == doctest::Approx(5e-3).epsilon(0.1));
  const ThetaValue near = theta_hat(Profile::exp_cone(0.5), 0.01);
  CHECK(near.theta <= 0.5 * 0.01 / 2.0);
  CHECK(near.best_a > 0.99);
  CHECK(near.theta == doctest::Approx(oracle::theta_brute(f, 0.01, 0.99, 1.0, 4001, 4000)).epsilon(2e-3));
}

TEST_CASE("cone gap properties on random models") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> slope(0.05, 0.99), beta(0.4, 0.99), any(0.0, 1.0);
  const auto grid = log_grid(1e-3, 1e4, 57);
  for (int trial = 0; trial < 12; ++trial) {
    const Profile pr = trial % 3 ? Profile::exp_cone(slope(rng)) : Profile::power_growth(beta(rng));
    const ThetaSeries th = theta_series(make_model(pr, 4), grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r = grid[i];
      CHECK(th.theta[i] > 0.0);
      CHECK(th.best_a[i] > 0.0);
      CHECK(th.best_a[i] <= 1.0);
      if (i > 0) CHECK(th.theta[i] * r >= th.theta[i - 1] * grid[i - 1] * (1.0 - 1e-12));
      // Minimality: no trial slope does better.
      const double a = any(rng);
      double sup = 0.0;
      for (int j = 0; j <= 2000; ++j) sup = std::max(sup, std::abs(pr.f(r * j / 2000.0) - a * r * j / 2000.0));
      CHECK(th.theta[i] <= sup / r * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("theta series is identical in serial and parallel") {
  const auto grid = log_grid(1e-3, 1e5, 80);
  const ManifoldModel m = make_model(Profile::exp_cone(0.3), 3);
  const ThetaSeries s = theta_series(m, grid, Exec::serial), p = theta_series(m, grid, Exec::parallel);
  CHECK(s.theta == p.theta);
  CHECK(s.best_a == p.best_a);
  std::ostringstream out;
  write_theta_csv(s, "model=x", out);
  CHECK(out.str().rfind("# monolab theta v1 model=x\nr,theta,best_a\n", 0) == 0);
}

TEST_CASE("Dini criterion on closed forms") {
  struct Case {
    double (*theta)(double);
    double alpha;
    bool holds;
  };
  const Case cases[] = {
      {[](double r) { return std::pow(std::log(r), -1.6); }, 1.1, true},
      {[](double r) { return std::pow(std::log(r), -0.4); }, 1.1, false},
      {[](double r) { return std::pow(std::log(r), -1.1); }, 1.1, true},
      {[](double r) { return std::pow(std::log(r), -1.0); }, 1.1, false},
      {[](double) { return 0.3; }, 1.1, false},
      {[](double r) { return 0.45 / r; }, 1.5, true},
  };
  for (const auto& c : cases) {
    const CriteriaVerdict v = dini_check(closed_form(c.theta), c.alpha);
    INFO(v.diagnostics);
    CHECK(v.holds == c.holds);
    CHECK_FALSE(v.inconclusive);
    CHECK(v.r_squared >= 0.99);
    if (!c.holds) CHECK(std::isinf(v.value));
  }
  // int_{log 10}^inf u^{-2.1} du and 0.2025 int e^{-2u} u^{1.5} du.
  const double u0 = std::log(10.0);
  CHECK(dini_check(closed_form(cases[0].theta), 1.1).value ==
        doctest::Approx(std::pow(u0, -1.1) / 1.1).epsilon(1e-3));
  CHECK(dini_check(closed_form(cases[5].theta), 1.5).value ==
        doctest::Approx(0.2025 * boost::math::tgamma(2.5, 2.0 * u0) / std::pow(2.0, 2.5)).epsilon(1e-3));
}

TEST_CASE("Dini criterion on a cone model") {
  const ThetaSeries th = theta_series(make_model(Profile::exp_cone(0.5), 4), log_grid(10.0, 1e5, 81));
  const CriteriaVerdict v = dini_check(th, 1.5);
  CHECK(v.holds);
  CHECK(v.exponent == doctest::Approx(-1.0).epsilon(0.02));
  ThetaSeries zero{log_grid(10.0, 1e5, 20), std::vector<double>(20, 0.0), std::vector<double>(20, 1.0)};
  CHECK(dini_check(zero, 1.5).holds);
}

TEST_CASE("Dini criterion input validation") {
  const ThetaSeries good = closed_form([](double r) { return 1.0 / r; });
  CHECK_THROWS_AS(dini_check(good, 1.0), InvalidArgument);
  CHECK_THROWS_AS(dini_check(closed_form([](double r) { return 1.0 / r; }, 10.0, 1e3), 1.5), InvalidArgument);
  CHECK_THROWS_AS(dini_check(closed_form([](double r) { return 1.0 / r; }, 0.5, 1e5), 1.5), InvalidArgument);
}

TEST_CASE("ODE criterion on closed forms") {
  const auto s = samples(1.0, 0.01, 4901);
  std::vector<double> eq, ex, lg;
  for (double x : s) {
    eq.push_back(std::pow(0.5 * x, -2.0));
    ex.push_back(std::exp(-x));
    lg.push_back(1.0 / std::log(1.0 + x));
  }
  const CriteriaVerdict a = ode_criterion_check(s, eq, 0.5, 0.1);
  CHECK(a.holds);
  CHECK(std::abs(a.lemma_excess) <= 1e-9);
  CHECK(a.violation_at < 0.0);
  const CriteriaVerdict b = ode_criterion_check(s, ex, 0.5, 0.1);
  CHECK(b.holds);
  const CriteriaVerdict c = ode_criterion_check(s, lg, 0.5, 0.1);
  CHECK_FALSE(c.holds);
  CHECK(c.violation_at > 0.0);
  CHECK_THROWS_AS(ode_criterion_check(s, std::vector<double>(10, 1.0), 0.5, 0.1), InvalidArgument);
}

TEST_CASE("unique tangent cone scenario") {
  const int n = 4;
  const double a = 0.5;
  const UniqueConeScenario u = unique_cone_scenario(solve_green(make_model(Profile::exp_cone(a), n)));
  // K = lim 2(n-1)V - A = a^{2(n-1)/(n-2)} omega (2(n-1)/n - 1).
  const double K = std::pow(a, 2.0 * (n - 1.0) / (n - 2.0)) * oracle::sphere_area(n) * (2.0 * (n - 1.0) / n - 1.0);
  CHECK(u.K == doctest::Approx(K).epsilon(1e-8));
  CHECK(u.fitted_decay == doctest::Approx(-n).epsilon(1e-2));
  CHECK(u.verdict.holds);
  CHECK(u.verdict.diagnostics.find("decay") != std::string::npos);
}

TEST_CASE("fund ratios") {
  const auto grid = log_grid(10.0, 1000.0, 41);
  for (int n = 3; n <= 6; ++n) {
    const FundRatioReport flat = fund_ratio_report(solve_green(make_model(Profile::euclidean(), n)), grid);
    for (const auto& s : flat.series) CHECK_FALSE(s.applicable);
  }
  CHECK_THROWS_AS(fund_ratio_report(solve_green(make_model(Profile::power_growth(0.6), 4)), grid), InadmissibleModel);
  const FundRatioReport rep = fund_ratio_report(solve_green(make_model(Profile::exp_cone(0.5), 4)), grid);
  REQUIRE(rep.series.size() == 4);
  for (const auto& s : rep.series) CHECK(s.finite);
  CHECK(rep.series[3].stable);
  CHECK(rep.series[3].variation < 0.2);
}

TEST_CASE("fund ratio goldens") {
  for (const char* a : {"0.5", "0.8"}) {
    std::ifstream in(std::string(MONOLAB_GOLDEN_DIR) + "/fund_exp_cone_" + a + "_n4.csv");
    REQUIRE(in);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    const GreenData g = solve_green(make_model(parse_profile(std::string("exp_cone:") + a), 4));
    const auto grid = log_grid(10.0, 1000.0, 41);
    const FundRatioReport rep = fund_ratio_report(g, grid);
    for (std::size_t i = 0; std::getline(in, line); ++i) {
      std::istringstream row(line);
      std::string cell;
      std::getline(row, cell, ',');
      CHECK(std::stod(cell) == doctest::Approx(grid[i]).epsilon(1e-14));
      for (int k = 0; k < 4; ++k) {
        std::getline(row, cell, ',');
        CHECK(rep.series[k].ratio[i] == doctest::Approx(std::stod(cell)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("heat-weighted cone distance") {
  HeatOptions o;
  o.t1 = 1e3;
  o.steps = 2200;
  const HeatData flat = solve_heat_kernel(make_model(Profile::euclidean(), 3), o);
  const WeightedDistance wf = weighted_distance(flat, entropy_series(flat));
  for (double c : wf.C) CHECK(c == 0.0);
  const HeatData h = solve_heat_kernel(make_model(Profile::exp_cone(0.5), 3), o);
  const WeightedDistance w = weighted_distance(h, entropy_series(h));
  REQUIRE(w.C_alpha.size() == 2);
  for (std::size_t k = 0; k < w.t.size(); ++k) {
    CHECK(w.C[k] <= w.C_alpha[0][k] * (1.0 + 1e-14));
    CHECK(w.C_alpha[0][k] <= w.C_alpha[1][k] * (1.0 + 1e-14));
  }
  std::size_t k1 = 0;
  while (w.t[k1] < 1.0) ++k1;
  CHECK(w.C.back() < w.C[k1]);
  CHECK(w.C.back() < 0.5 * *std::max_element(w.C.begin(), w.C.end()));
}

TEST_CASE("Koch curve") {
  const ThetaSeries flat = koch_theta(10, M_PI);
  for (double x : flat.theta) CHECK(x == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  const ThetaSeries lo = koch_theta(10, M_PI - 0.1), hi = koch_theta(10, M_PI - 0.4);
  REQUIRE(lo.theta.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(lo.r_grid[i] == std::ldexp(1.0, -static_cast<int>(i) - 1));
    CHECK(lo.theta[i] < hi.theta[i]);
  }
  const ThetaSeries mid = koch_theta(6, M_PI - 0.2);
  const auto mm = std::minmax_element(mid.theta.begin(), mid.theta.end());
  CHECK(*mm.second / *mm.first < 2.0);
  CHECK(*mm.second == doctest::Approx(0.065).epsilon(0.1));
  CHECK_THROWS_AS(koch_theta(11, M_PI - 0.1), InvalidArgument);
  CHECK_THROWS_AS(koch_theta(3, 1.0), InvalidArgument);
}

TEST_CASE("verdict log line") {
  CriteriaVerdict v;
  v.holds = true;
  v.value = 0.5;
  v.diagnostics = "ok";
  std::ostringstream out;
  write_verdict_line(v, out);
  CHECK(out.str() == "dini_log,true,0.5,\"ok\"\n");
}

#include <doctest.h>

#include <random>

#include "monolab/error.hpp"
#include "monolab/profiles.hpp"
#include "oracles.hpp"

using namespace monolab;

TEST_CASE("sphere areas and ball volumes") {
  for (int n = 3; n <= 6; ++n) {
    CHECK(sphere_area(n) == doctest::Approx(oracle::sphere_area(n)).epsilon(1e-15));
    CHECK(ball_volume(n) == doctest::Approx(oracle::sphere_area(n) / n).epsilon(1e-15));
  }
}

TEST_CASE("warping functions match their formulas") {
  const Profile e = Profile::exp_cone(0.3), p = Profile::power_growth(0.6);
  for (double s : {1e-9, 1e-3, 0.5, 3.0, 40.0}) {
    CHECK(e.f(s) == doctest::Approx(oracle::f_exp_cone(0.3, s)).epsilon(1e-12));
    CHECK(p.f(s) == doctest::Approx(oracle::f_power(0.6, s)).epsilon(1e-12));
    CHECK(Profile::euclidean().f(s) == s);
  }
  CHECK(e.df(0.0) == doctest::Approx(1.0));
  CHECK(p.df(0.0) == doctest::Approx(1.0));
  CHECK(e.asymptotic_slope() == 0.3);
  CHECK(p.asymptotic_slope() == 0.0);
}

TEST_CASE("derivatives agree with central differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> slope(0.05, 1.0), pos(0.01, 30.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Profile pr = trial % 2 ? Profile::exp_cone(slope(rng)) : Profile::power_growth(slope(rng));
    const double s = pos(rng), h = 1e-5 * (1.0 + s);
    const double df = (pr.f(s + h) - pr.f(s - h)) / (2 * h);
    const double d2f = (pr.df(s + h) - pr.df(s - h)) / (2 * h);
    CHECK(pr.df(s) == doctest::Approx(df).epsilon(1e-7));
    CHECK(pr.d2f(s) == doctest::Approx(d2f).epsilon(1e-5).scale(1e-6));
    CHECK(pr.sdf_minus_f(s) == doctest::Approx(s * pr.df(s) - pr.f(s)).epsilon(1e-9).scale(1e-12));
  }
}

TEST_CASE("concave profiles give nonnegative Ricci curvature") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> slope(0.05, 1.0);
  const auto grid = log_grid(1e-6, 1e6, 121);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 4;
    const Profile pr = Profile::exp_cone(slope(rng));
    const CurvatureReport cr = curvature_report(make_model(pr, n), grid);
    CHECK(cr.min_ricci >= -1e-12);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(Profile::exp_cone(0.0), InvalidArgument);
  CHECK_THROWS_AS(Profile::exp_cone(1.2), InvalidArgument);
  CHECK_THROWS_AS(Profile::power_growth(-0.1), InvalidArgument);
  CHECK_THROWS_AS(parse_profile("sphere"), InvalidArgument);
  CHECK_THROWS_AS(parse_profile("exp_cone:abc"), InvalidArgument);
  CHECK(parse_profile("exp_cone:0.5") == Profile::exp_cone(0.5));
  CHECK(parse_profile("power_growth:0.6").name() == "power_growth:0.6");
  CHECK_THROWS_AS(make_model(Profile::euclidean(), 2), InadmissibleModel);
}

TEST_CASE("nonparabolicity follows the growth exponent") {
  // Vol(B_r) ~ r^{1 + (n-1) beta}; nonparabolic iff that exponent exceeds 2.
  CHECK_FALSE(nonparabolicity_check(Profile::power_growth(0.3), 3).nonparabolic);
  CHECK(nonparabolicity_check(Profile::power_growth(0.6), 3).nonparabolic);
  CHECK(nonparabolicity_check(Profile::power_growth(0.6), 4).growth_exponent == doctest::Approx(2.8));
  CHECK_THROWS_AS(make_model(Profile::power_growth(0.3), 3), InadmissibleModel);
  CHECK(nonparabolicity_check(Profile::exp_cone(0.5), 3).nonparabolic);
}

TEST_CASE("asymptotic volume ratio of a cone is a^{n-1}") {
  for (int n = 3; n <= 6; ++n) {
    const auto vr = asymptotic_volume_ratio(make_model(Profile::exp_cone(0.5), n));
    CHECK(vr.normalized == doctest::Approx(std::pow(0.5, n - 1)));
    CHECK(vr.V_M == doctest::Approx(std::pow(0.5, n - 1) * oracle::sphere_area(n) / n));
  }
  CHECK(asymptotic_volume_ratio(make_model(Profile::power_growth(0.6), 4)).V_M == 0.0);
}

TEST_CASE("ball volume against direct quadrature") {
  const ManifoldModel m = make_model(Profile::exp_cone(0.5), 4);
  for (double r : {0.1, 2.0, 50.0}) {
    const double ref = oracle::sphere_area(4) *
                       oracle::simpson([](double s) { return std::pow(oracle::f_exp_cone(0.5, s), 3); }, 0, r, 20000);
    CHECK(volume_ball(m, r) == doctest::Approx(ref).epsilon(1e-10));
  }
  CHECK(volume_ball(make_model(Profile::euclidean(), 3), 2.0) == doctest::Approx(4.0 * M_PI * 8.0 / 3.0));
}

TEST_CASE("log grid") {
  const auto g = log_grid(0.1, 100.0, 4);
  REQUIRE(g.size() == 4);
  CHECK(g.front() == 0.1);
  CHECK(g.back() == 100.0);
  CHECK(g[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 5), InvalidArgument);
}

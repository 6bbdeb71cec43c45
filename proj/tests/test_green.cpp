#include <doctest.h>

#include <sstream>

#include "monolab/error.hpp"
#include "monolab/green.hpp"
#include "oracles.hpp"

using namespace monolab;

TEST_CASE("flat Green function is rho^{2-n}") {
  for (int n = 3; n <= 6; ++n) {
    const GreenData g = solve_green(make_model(Profile::euclidean(), n));
    for (double rho : {1e-5, 0.3, 7.0, 1e4, 1e7}) {
      const GreenPoint p = g.at(rho);
      CHECK(p.G == doctest::Approx(std::pow(rho, 2.0 - n)).epsilon(1e-12));
      CHECK(p.b == doctest::Approx(rho).epsilon(1e-12));
      CHECK(p.db == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(hessian_integrand(p, n)) <= 1e-8);
    }
  }
}

TEST_CASE("exp_cone Green function against direct quadrature") {
  for (int n : {3, 4, 6}) {
    const GreenData g = solve_green(make_model(Profile::exp_cone(0.5), n));
    for (double rho : {1e-3, 0.5, 3.0, 20.0}) {
      CHECK(g.at(rho).G == doctest::Approx(oracle::green_exp_cone(0.5, n, rho)).epsilon(1e-9));
      CHECK(g.at(rho).db == doctest::Approx(oracle::grad_b_exp_cone(0.5, n, rho)).epsilon(1e-9));
    }
  }
}

TEST_CASE("far field of |grad b| tends to a^{(n-1)/(n-2)}") {
  for (double a : {0.3, 0.8})
    for (int n : {3, 5}) {
      const GreenData g = solve_green(make_model(Profile::exp_cone(a), n));
      CHECK(g.at(1e7).db == doctest::Approx(std::pow(a, (n - 1.0) / (n - 2.0))).epsilon(1e-5));
    }
}

TEST_CASE("node and off-node values agree") {
  const GreenData g = solve_green(make_model(Profile::power_growth(0.7), 4));
  const auto& rho = g.rho_grid();
  for (std::size_t i = 10; i < rho.size(); i += 311) CHECK(g.at(rho[i]).G == doctest::Approx(g.G()[i]).epsilon(1e-13));
  CHECK(g.harmonic_residual() <= 1e-6);
}

TEST_CASE("level sets") {
  const GreenData g = solve_green(make_model(Profile::exp_cone(0.5), 4));
  for (double r : {0.01, 1.0, 300.0}) {
    const double rho = rho_of_b(g, r);
    CHECK(g.at(rho).b == doctest::Approx(r).epsilon(1e-12));
    const LevelData L = level_quantities(g, r);
    CHECK(L.area == doctest::Approx(oracle::sphere_area(4) * std::pow(oracle::f_exp_cone(0.5, rho), 3)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(rho_of_b(g, 1e300), RangeError);
}

TEST_CASE("Green solver rejects bad input") {
  CHECK_THROWS_AS(solve_green(make_model(Profile::exp_cone(0.5), 4), 1.0, 0.5, 400), InvalidArgument);
  CHECK_THROWS_AS(solve_green(make_model(Profile::exp_cone(0.5), 4), 1e-6, 1e8, 10), InvalidArgument);
  CHECK_THROWS_AS(solve_green(make_model(Profile::exp_cone(0.5), 4)).at(0.0), InvalidArgument);
}

TEST_CASE("Green table is identical in serial and parallel") {
  const ManifoldModel m = make_model(Profile::exp_cone(0.8), 5);
  const GreenData s = solve_green(m, GreenOptions{}, Exec::serial);
  const GreenData p = solve_green(m, GreenOptions{}, Exec::parallel);
  CHECK(s.G() == p.G());
  CHECK(s.db() == p.db());
}

TEST_CASE("Green CSV") {
  const GreenData g = solve_green(make_model(Profile::exp_cone(0.5), 3), 1e-3, 1e6, 400);
  std::ostringstream out;
  write_green_csv(g, out);
  const std::string s = out.str();
  CHECK(s.rfind("# monolab green v1", 0) == 0);
  CHECK(s.find("rho,G,b,db,Q") != std::string::npos);
}

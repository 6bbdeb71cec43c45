#include <doctest.h>

#include <sstream>

#include "monolab/error.hpp"
#include "monolab/heat.hpp"
#include "oracles.hpp"

using namespace monolab;

namespace {

const HeatData& cone_heat() {
  static const HeatData h = solve_heat_kernel(make_model(Profile::exp_cone(0.5), 3));
  return h;
}

}  // namespace

TEST_CASE("flat heat kernel is the Gaussian") {
  for (int n : {3, 5}) {
    const HeatData h = solve_heat_kernel(make_model(Profile::euclidean(), n));
    for (std::size_t k = 0; k < h.t_grid.size(); k += 37) {
      const double t = h.t_grid[k];
      for (std::size_t j = 0; j < h.xi.size() && h.xi[j] <= 6.0; j += 50)
        CHECK(h.H(k, j) == doctest::Approx(oracle::heat_flat(n, t, h.rho(k, j))).epsilon(1e-6));
    }
    const EntropyReport e = entropy_series(h);
    for (std::size_t k = 0; k < e.t_grid.size(); ++k) {
      CHECK(std::abs(e.S[k]) <= 1e-6);
      CHECK(std::abs(e.F[k]) <= 1e-6);
      CHECK(std::abs(e.W[k]) <= 1e-6);
      CHECK(std::abs(e.liyau_max[k]) <= 1e-6);
    }
    const EntropyResiduals r = entropy_identities(e, 0.1, 100.0);
    for (std::size_t k = 1; k < r.t.size(); ++k) CHECK(std::abs(r.W_increase[k]) <= 1e-6);
  }
}

TEST_CASE("mass is conserved") {
  for (double m : cone_heat().mass) CHECK(m == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(cone_heat().max_step_drift <= 1e-4);
  const auto d = cone_heat().density(cone_heat().t_grid.size() / 2);
  CHECK(oracle::simpson([&](double x) { return d[static_cast<std::size_t>(std::lround(x / cone_heat().dxi()))]; }, 0.0,
                        cone_heat().xi.back(), static_cast<int>(d.size()) - 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reduced volume growth concentrates heat at the tip") {
  const HeatData& h = cone_heat();
  HeatOptions fine;
  fine.nodes = 8001;
  fine.steps = 4000;
  fine.retain_every = 20;
  const HeatData ref = solve_heat_kernel(make_model(Profile::exp_cone(0.5), 3), fine);
  REQUIRE(ref.t_grid.size() == h.t_grid.size());
  const std::size_t k = h.t_grid.size() - 1;
  CHECK(h.t_grid[k] == doctest::Approx(300.0));
  CHECK(h.H(k, 0) == doctest::Approx(ref.H(k, 0)).epsilon(1e-3));
  CHECK(h.H(k, 0) > oracle::heat_flat(3, h.t_grid[k], 0.0));
}

TEST_CASE("entropy monotonicity on a cone") {
  const EntropyReport e = entropy_series(cone_heat());
  CHECK(e.tail_bound <= 1e-12);
  for (std::size_t k = 0; k < e.t_grid.size(); ++k) {
    CHECK(e.liyau_max[k] <= 1e-6);
    CHECK(e.F[k] <= 1e-6);
    CHECK(e.max_dH[k] <= 0.0);
  }
  const EntropyResiduals r = entropy_identities(e, 0.1, 100.0);
  REQUIRE(r.t.size() >= 30);
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    CHECK(r.F_tdS[k] <= 1e-3);
    CHECK(r.dtF_rhs[k] <= 1e-3);
    CHECK(r.decay_slack[k] >= -1e-5);
    CHECK(r.dJ_W[k] <= 1e-3);
    CHECK(r.d2J_rhs[k] <= 1e-3);
    if (k > 0) CHECK(r.W_increase[k] <= 1e-6);
  }
}

TEST_CASE("F = t S' against an independent difference of S") {
  const EntropyReport e = entropy_series(cone_heat());
  for (std::size_t k = 40; k + 40 < e.t_grid.size(); k += 20) {
    const double dS = (e.S[k + 1] - e.S[k - 1]) / (e.t_grid[k + 1] - e.t_grid[k - 1]);
    CHECK(e.F[k] == doctest::Approx(e.t_grid[k] * dS).epsilon(5e-3));
  }
}

TEST_CASE("F tends to zero at large time") {
  HeatOptions o;
  o.t1 = 1e3;
  o.steps = 2200;
  const EntropyReport e = entropy_series(solve_heat_kernel(make_model(Profile::exp_cone(0.5), 3), o));
  const auto at = [&](double t) {
    std::size_t k = 0;
    while (e.t_grid[k] < t) ++k;
    return e.F[k];
  };
  CHECK(at(1.0) < 0.0);
  CHECK(std::abs(at(1e3)) < std::abs(at(100.0)));
  CHECK(std::abs(at(100.0)) < std::abs(at(10.0)));
}

TEST_CASE("entropy of the seeded kernel grows like sqrt(t) near the tip") {
  // The tip is C^{1,1}: curvature is bounded, so S(t) = O(sqrt t) plus the
  // seeding error, which scales with t0.
  HeatOptions o;
  o.t0 = 1e-6;
  o.t1 = 1e-2;
  o.steps = 1000;
  const EntropyReport e = entropy_series(solve_heat_kernel(make_model(Profile::exp_cone(0.5), 3), o));
  std::size_t k = 0;
  while (e.t_grid[k] < 4e-6) ++k;
  CHECK(std::abs(e.S[k]) <= 5e-3);
  CHECK(e.S.back() / std::sqrt(e.t_grid.back()) == doctest::Approx(-1.52).epsilon(0.05));
}

TEST_CASE("bad heat requests") {
  const ManifoldModel m = make_model(Profile::exp_cone(0.5), 3);
  CHECK_THROWS_AS(solve_heat_kernel(m, 1e-4, 100.0, 50.0, 1000), Error);
  HeatOptions o;
  o.nodes = 4000;
  CHECK_THROWS_AS(solve_heat_kernel(m, o), Error);
  HeatOptions few;
  few.steps = 20;
  few.retain_every = 10;
  CHECK_THROWS_AS(entropy_series(solve_heat_kernel(m, few)), Error);
}

TEST_CASE("entropy series is identical in serial and parallel, CSV is stable") {
  const EntropyReport s = entropy_series(cone_heat(), Exec::serial);
  const EntropyReport p = entropy_series(cone_heat(), Exec::parallel);
  std::ostringstream a, b;
  write_entropy_csv(s, a);
  write_entropy_csv(p, b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("# monolab entropy v1 model=exp_cone:0.5,n=3", 0) == 0);
}

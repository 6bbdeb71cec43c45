#include "monolab/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "monolab/error.hpp"
#include "monolab/quadrature.hpp"

namespace monolab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double scaled(double residual, std::initializer_list<double> terms, double floor) {
  double s = floor;
  for (double t : terms) s = std::max(s, std::abs(t));
  return std::abs(residual) / s;
}

// Integral over rho in [lo, hi] of a density times the volume form.
double shell_integral(const GreenData& g, double lo, double hi,
                      const std::function<double(const GreenPoint&)>& density) {
  const double w = g.omega();
  const int n = g.n();
  auto h = [&](double x) {
    const double s = std::exp(x);
    const GreenPoint p = g.at(s);
    return s * density(p) * w * std::pow(p.f, n - 1.0);
  };
  return quad::integrate(h, std::log(lo), std::log(hi), 1e-12, 6).value;
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

RadialFunction RadialFunction::constant(double c) {
  return {"const", [c](const GreenPoint&) { return c; },
          [](const GreenPoint&) { return 0.0; }, [](const GreenPoint&) { return 0.0; }};
}

RadialFunction RadialFunction::grad_b_squared() {
  return {"grad_b_sq", [](const GreenPoint& p) { return p.db * p.db; },
          [](const GreenPoint& p) { return 2.0 * p.db * p.d2b; },
          [](const GreenPoint& p) { return 2.0 * p.d2b * p.d2b + 2.0 * p.db * p.d3b; }};
}

RadialFunction RadialFunction::b_power(double k) {
  return {"b_pow",
          [k](const GreenPoint& p) { return std::pow(p.b, k); },
          [k](const GreenPoint& p) { return k * std::pow(p.b, k - 1.0) * p.db; },
          [k](const GreenPoint& p) {
            return k * (k - 1.0) * std::pow(p.b, k - 2.0) * p.db * p.db +
                   k * std::pow(p.b, k - 1.0) * p.d2b;
          }};
}

double compute_A(const GreenData& green, double r) {
  const LevelData L = level_quantities(green, r);
  return std::pow(r, 1.0 - green.n()) * L.area * L.grad_b * L.grad_b * L.grad_b;
}

VolumeFunctional::VolumeFunctional(const GreenData& green, Exec exec, double rho_hi)
    : green_(&green),
      table_(green,
             with_volume(green, [](const GreenPoint& p) {
               const double d2 = p.db * p.db;
               return d2 * d2;
             }),
             true, exec, rho_hi) {}

double VolumeFunctional::operator()(double r) const {
  return std::pow(r, -static_cast<double>(green_->n())) * table_.at(rho_of_b(*green_, r));
}

double VolumeFunctional::coarea_form(double r) const {
  const int n = green_->n();
  const double lo = green_->b_min();
  // below the table A is omega up to O(b_min)
  const double stub = green_->omega() * std::pow(lo, n) / n;
  auto h = [&](double x) {
    const double s = std::exp(x);
    return s * std::pow(s, n - 1.0) * compute_A(*green_, s);
  };
  const double body = quad::integrate(h, std::log(lo), std::log(r), 1e-12, 10).value;
  return std::pow(r, -static_cast<double>(n)) * (stub + body);
}

VinfFunctional::VinfFunctional(const GreenData& green, Exec exec, double rho_hi)
    : green_(&green),
      table_(green,
             with_volume(green,
                         [n = green.n()](const GreenPoint& p) {
                           const double d2 = p.db * p.db;
                           return (d2 - 1.0) * d2 * std::pow(p.b, -static_cast<double>(n));
                         }),
             false, exec, rho_hi) {
  anchor_ = table_.at(rho_of_b(green, 1.0));
}

double VinfFunctional::operator()(double r) const { return at_rho(rho_of_b(*green_, r)); }

double compute_V(const GreenData& green, double r) { return VolumeFunctional(green)(r); }

double compute_Vinf(const GreenData& green, double r) { return VinfFunctional(green)(r); }

double I_functional(const GreenData& green, const RadialFunction& u, double r) {
  const LevelData L = level_quantities(green, r);
  const GreenPoint p = green.at(L.rho);
  return std::pow(r, 1.0 - green.n()) * L.area * L.grad_b * u.value(p);
}

double dI(const GreenData& green, const RadialFunction& u, double r) {
  const LevelData L = level_quantities(green, r);
  const GreenPoint p = green.at(L.rho);
  return std::pow(r, 1.0 - green.n()) * L.area * u.d1(p);
}

double drift_laplacian(const GreenPoint& p, int n, const RadialFunction& u) {
  const double u1 = u.d1(p);
  return u.d2(p) + (n - 1.0) * (p.df / p.f) * u1 + 2.0 * (2.0 - n) * (p.db / p.b) * u1;
}

double drift_laplacian(const GreenData& green, const RadialFunction& u, double rho) {
  return drift_laplacian(green.at(rho), green.n(), u);
}

namespace {

struct LevelState {
  double rho = 0.0, A = 0.0, V = 0.0, Vinf = 0.0, IQ = 0.0, IQbn = 0.0, IQb4 = 0.0;
};

struct Tables {
  const GreenData& g;
  VolumeFunctional V;
  VinfFunctional Vinf;
  RadialIntegral Q, Qbn, Qb4;  // Qb4 anchored at rho_min, only for n = 3

  Tables(const GreenData& green, Exec exec, double hi)
      : g(green),
        V(green, exec, hi),
        Vinf(green, exec, hi),
        Q(green, with_volume(green, [n = green.n()](const GreenPoint& p) {
            return hessian_integrand(p, n);
          }), true, exec, hi),
        Qbn(green, with_volume(green, [n = green.n()](const GreenPoint& p) {
              return hessian_integrand(p, n) * std::pow(p.b, -static_cast<double>(n));
            }), true, exec, hi),
        Qb4(green, with_volume(green, [n = green.n()](const GreenPoint& p) {
              return n == 3 ? hessian_integrand(p, n) * std::pow(p.b, -4.0) : 0.0;
            }), false, exec, hi) {}

  LevelState state(double r) const {
    LevelState s;
    const int n = g.n();
    s.rho = rho_of_b(g, r);
    const GreenPoint p = g.at(s.rho);
    s.A = std::pow(r, 1.0 - n) * g.omega() * std::pow(p.f, n - 1.0) * p.db * p.db * p.db;
    s.V = std::pow(r, -static_cast<double>(n)) * V.raw(s.rho);
    s.Vinf = Vinf.at_rho(s.rho);
    s.IQ = Q.at(s.rho);
    s.IQbn = Qbn.at(s.rho);
    if (n == 3) s.IQb4 = Qb4.at(s.rho);
    return s;
  }
};

// central differences at steps h and h/2 from precomputed samples
double richardson(double h, double xp, double xm, double xp2, double xm2) {
  const double d1 = (xp - xm) / (2.0 * h);
  const double d2 = (xp2 - xm2) / h;
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

MonotoneReport theorem_residuals(const GreenData& green, const std::vector<double>& r_grid,
                                 Exec exec) {
  const std::size_t N = r_grid.size();
  if (N < 50) {
    throw NumericalError("theorem_residuals: " + std::to_string(N) +
                         " radii is too coarse; use at least 50 log-spaced points");
  }
  for (std::size_t i = 1; i < N; ++i) {
    if (!(r_grid[i] > r_grid[i - 1])) {
      throw InvalidArgument("theorem_residuals: r_grid must be strictly increasing");
    }
  }
  const double hmax = 1.001;
  if (!(r_grid.front() / hmax >= green.b_min() && r_grid.back() * hmax <= green.b_max())) {
    throw RangeError("theorem_residuals: r_grid plus difference stencil exceeds the table",
                     green.b_min() * hmax, green.b_max() / hmax);
  }

  const int n = green.n();
  const double w = green.omega();
  const Tables T(green, exec, 1.01 * rho_of_b(green, r_grid.back() * hmax));

  MonotoneReport R;
  R.model = green.model().name();
  R.r_grid = r_grid;
  auto alloc = [N](std::vector<double>& v) { v.assign(N, kNaN); };
  for (auto* v : {&R.A, &R.V, &R.Vinf, &R.dA, &R.dV, &R.dVinf, &R.rhs_main, &R.rhs_second,
                  &R.rhs_third, &R.residual_main, &R.residual_second, &R.residual_second_e2,
                  &R.residual_third, &R.residual_coarea, &R.residual_J, &R.residual_J2,
                  &R.residual_Vinf, &R.residual_transfer, &R.residual_I1, &R.residual_dI,
                  &R.first_mono_lhs, &R.second_mono_lhs, &R.A_minus_nV, &R.A_minus_Vinf_lhs,
                  &R.n3_onesided, &R.V_coarea_gap, &R.sup_db_outside}) {
    alloc(*v);
  }
  std::vector<double> rho(N), Iprime(N);

  const auto u = RadialFunction::grad_b_squared();

  for_each_index(exec, N, [&](std::size_t i) {
    const double r = r_grid[i];
    const double h = 1e-3 * r;
    const LevelState c = T.state(r);
    const LevelState p1 = T.state(r + h), m1 = T.state(r - h);
    const LevelState p2 = T.state(r + 0.5 * h), m2 = T.state(r - 0.5 * h);
    auto D = [&](auto get) { return richardson(h, get(p1), get(m1), get(p2), get(m2)); };

    rho[i] = c.rho;
    R.A[i] = c.A;
    R.V[i] = c.V;
    R.Vinf[i] = c.Vinf;
    R.dA[i] = D([](const LevelState& s) { return s.A; });
    R.dV[i] = D([](const LevelState& s) { return s.V; });
    R.dVinf[i] = D([](const LevelState& s) { return s.Vinf; });
    const double dX = D([n](const LevelState& s) { return s.A - 2.0 * (n - 1.0) * s.V; });
    const double dY = D([n](const LevelState& s) { return s.A - (n - 2.0) * s.Vinf; });
    // (r^{2-n}[A - omega])' from the scaled function itself
    auto e2 = [&](double rr, const LevelState& s) { return std::pow(rr, 2.0 - n) * (s.A - w); };
    const double dE2 = richardson(h, e2(r + h, p1), e2(r - h, m1), e2(r + 0.5 * h, p2),
                                  e2(r - 0.5 * h, m2));

    R.first_mono_lhs[i] = dX;
    R.second_mono_lhs[i] = dE2;
    R.A_minus_Vinf_lhs[i] = dY;
    R.A_minus_nV[i] = c.A - n * c.V;

    R.rhs_main[i] = 0.5 * std::pow(r, -1.0 - n) * c.IQ;
    R.residual_main[i] = scaled(dX - R.rhs_main[i], {dX, R.rhs_main[i]}, 1e-6 * w / r);

    R.rhs_second[i] = 0.5 * c.IQbn;
    {
      const double t1 = (2.0 - n) * (c.A - w), t2 = r * R.dA[i];
      R.residual_second[i] = scaled(t1 + t2 - R.rhs_second[i], {t1, t2, R.rhs_second[i]}, 1e-6 * w);
      const double rhs2 = 0.5 * std::pow(r, 1.0 - n) * c.IQbn;
      R.residual_second_e2[i] = scaled(dE2 - rhs2, {dE2, rhs2}, 1e-6 * w * std::pow(r, 1.0 - n));
    }
    {
      // r V' = A - n V: the terms are A and n V, not their (vanishing) gap
      const double t = (c.A - n * c.V) / r;
      R.residual_coarea[i] = scaled(R.dV[i] - t, {R.dV[i], c.A / r, n * c.V / r}, 1e-6 * w / r);
      const double tv = (c.A - w) / r;
      R.residual_Vinf[i] = scaled(R.dVinf[i] - tv, {R.dVinf[i], c.A / r, w / r}, 1e-6 * w / r);
    }
    {
      // J(s) = -(n-2) s V_inf(s^{1/(2-n)})
      const double s = std::pow(r, 2.0 - n);
      const double hs = 1e-3 * s;
      auto J = [&](double ss) {
        const double rr = std::pow(ss, 1.0 / (2.0 - n));
        return -(n - 2.0) * ss * T.Vinf(rr);
      };
      const double J0 = -(n - 2.0) * s * c.Vinf;
      const double Jp1 = J(s + hs), Jm1 = J(s - hs), Jp2 = J(s + 0.5 * hs), Jm2 = J(s - 0.5 * hs);
      const double dJ = richardson(hs, Jp1, Jm1, Jp2, Jm2);
      const double t1 = c.A - w, t2 = (n - 2.0) * c.Vinf;
      R.residual_J[i] = scaled(dJ - (t1 - t2), {dJ, t1, t2}, 1e-6 * w);
      const double s1 = (Jp1 - 2.0 * J0 + Jm1) / (hs * hs);
      const double s2 = (Jp2 - 2.0 * J0 + Jm2) / (0.25 * hs * hs);
      const double d2J = (4.0 * s2 - s1) / 3.0;
      const double rhs = -c.IQbn / (2.0 * (n - 2.0) * s);
      R.residual_J2[i] = scaled(d2J - rhs, {d2J, rhs}, 1e-6 * w / s);
    }
    {
      const GreenPoint gp = green.at(c.rho);
      const double area = w * std::pow(gp.f, n - 1.0);
      const double I1 = std::pow(r, 1.0 - n) * area * gp.db;
      R.residual_I1[i] = std::abs(I1 - w) / w;
      Iprime[i] = std::pow(r, 1.0 - n) * area * u.d1(gp);
      R.residual_dI[i] = scaled(R.dA[i] - Iprime[i], {R.dA[i], Iprime[i]}, 1e-6 * w / r);
    }
    if (n == 3) R.n3_onesided[i] = R.dA[i] - 0.5 * c.IQb4;
  });

  // coarea twin of V, accumulated along the grid
  {
    auto h = [&](double x) {
      const double s = std::exp(x);
      return std::pow(s, static_cast<double>(n)) * compute_A(green, s);
    };
    const double lo = green.b_min();
    double acc = w * std::pow(lo, n) / n +
                 quad::integrate(h, std::log(lo), std::log(r_grid[0]), 1e-12, 10).value;
    for (std::size_t i = 0; i < N; ++i) {
      if (i > 0) acc += quad::kronrod21(h, std::log(r_grid[i - 1]), std::log(r_grid[i]));
      const double twin = std::pow(r_grid[i], -static_cast<double>(n)) * acc;
      R.V_coarea_gap[i] = std::abs(R.V[i] - twin) / R.V[i];
    }
  }

  // pair identities over consecutive radii
  for_each_index(exec, N, [&](std::size_t i) {
    if (i == 0) return;
    const double r1 = r_grid[i - 1], r2 = r_grid[i];
    const double q = 0.5 * shell_integral(green, rho[i - 1], rho[i], [n](const GreenPoint& p) {
      return hessian_integrand(p, n) * std::pow(p.b, 2.0 - 2.0 * n);
    });
    R.rhs_third[i] = q;
    const double t2 = std::pow(r2, 3.0 - n) * R.dA[i], t1 = std::pow(r1, 3.0 - n) * R.dA[i - 1];
    R.residual_third[i] = scaled(t2 - t1 - q, {t1, t2, q}, 1e-6 * w * std::pow(r2, 2.0 - n));

    const double L = shell_integral(green, rho[i - 1], rho[i], [&](const GreenPoint& p) {
      return drift_laplacian(p, n, u) * p.G * p.G;
    });
    const double k = std::pow(r2, n - 3.0);
    const double a2 = Iprime[i], a1 = k * std::pow(r1, 3.0 - n) * Iprime[i - 1];
    R.residual_transfer[i] = scaled(a2 - a1 - k * L, {a2, a1, k * L}, 1e-6 * w / r2);
  });

  // sup of |grad b| over {b >= r}: suffix maximum of the table plus the level
  const auto& db = green.db();
  const auto& bt = green.b();
  std::vector<double> suffix(db.size());
  double m = 0.0;
  for (std::size_t j = db.size(); j-- > 0;) suffix[j] = m = std::max(m, db[j]);
  for (std::size_t i = 0; i < N; ++i) {
    const auto it = std::lower_bound(bt.begin(), bt.end(), r_grid[i]);
    const double level = green.at(rho[i]).db;
    const double beyond = it == bt.end() ? 0.0 : suffix[static_cast<std::size_t>(it - bt.begin())];
    R.sup_db_outside[i] = std::max(level, beyond);
  }
  return R;
}

void write_monotone_csv(const MonotoneReport& rep, std::ostream& out) {
  out << "# monolab monotone v1 model=" << rep.model << '\n';
  out << "r,A,V,Vinf,dA,dV,rhs_main,residual_main,residual_second,residual_third,"
         "residual_coarea,residual_J,sup_db_outside,dVinf,rhs_second,rhs_third,"
         "residual_second_e2,residual_J2,residual_Vinf,residual_transfer,residual_I1,"
         "residual_dI,first_mono_lhs,second_mono_lhs,A_minus_nV,A_minus_Vinf_lhs,"
         "V_coarea_gap\n";
  const std::vector<const std::vector<double>*> cols = {
      &rep.r_grid, &rep.A, &rep.V, &rep.Vinf, &rep.dA, &rep.dV, &rep.rhs_main,
      &rep.residual_main, &rep.residual_second, &rep.residual_third, &rep.residual_coarea,
      &rep.residual_J, &rep.sup_db_outside, &rep.dVinf, &rep.rhs_second, &rep.rhs_third,
      &rep.residual_second_e2, &rep.residual_J2, &rep.residual_Vinf, &rep.residual_transfer,
      &rep.residual_I1, &rep.residual_dI, &rep.first_mono_lhs, &rep.second_mono_lhs,
      &rep.A_minus_nV, &rep.A_minus_Vinf_lhs, &rep.V_coarea_gap};
  char buf[32];
  for (std::size_t i = 0; i < rep.r_grid.size(); ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", (*cols[c])[i]);
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
}

GradientReport gradient_suite(const GreenData& green, Exec exec) {
  GradientReport R;
  const int n = green.n();
  const auto& rho = green.rho_grid();
  const auto& db = green.db();
  const auto& G = green.G();
  const std::size_t N = rho.size();
  R.sup_db = *std::max_element(db.begin(), db.end());
  R.sharp_bound = R.sup_db <= 1.0 + 1e-10;

  // maximum principle on exteriors: sup_{b>=r} db equals db on the level
  double m = 0.0;
  double excess = 0.0;
  for (std::size_t j = N; j-- > 0;) {
    m = std::max(m, db[j]);
    excess = std::max(excess, m - db[j]);
  }
  R.max_sup_outside_excess = excess;
  R.sup_outside_nonincreasing = excess <= 1e-12;

  R.db_far = green.at(R.far_rho).db;
  const double ratio = asymptotic_volume_ratio(green.model()).normalized;
  R.predicted_limit = std::pow(ratio, 1.0 / (n - 2.0));
  if (R.predicted_limit > 0.0) {
    R.limit_rel_error = std::abs(R.db_far - R.predicted_limit) / R.predicted_limit;
    R.limit_ok = R.limit_rel_error <= 0.01;
  } else {
    R.limit_rel_error = R.db_far;
    R.limit_ok = R.db_far < 0.05 && green.at(10.0 * R.far_rho).db < R.db_far;
  }

  const auto& pr = green.model().profile;
  std::vector<double> excess_G(N), area_ratio(N), Q(N);
  for_each_index(exec, N, [&](std::size_t i) {
    const double f = pr.f(rho[i]);
    const double dG = (n - 2.0) * std::pow(f, 1.0 - n);
    excess_G[i] = dG / ((n - 2.0) * std::pow(G[i], (n - 1.0) / (n - 2.0))) - 1.0;
    area_ratio[i] = std::pow(f / green.b()[i], n - 1.0);
    Q[i] = hessian_integrand(green.at(rho[i]), n);
  });
  R.max_grad_G_excess = *std::max_element(excess_G.begin(), excess_G.end());
  R.min_area_ratio = *std::min_element(area_ratio.begin(), area_ratio.end());
  R.max_Q = *std::max_element(Q.begin(), Q.end());

  const RadialIntegral vol(green, with_volume(green, [](const GreenPoint&) { return 1.0; }),
                           true, exec);
  double vmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < N; i += 10) {
    const double euclid = ball_volume(n) * std::pow(green.b()[i], n);
    vmin = std::min(vmin, vol.at(rho[i]) / euclid);
  }
  R.min_volume_ratio = vmin;
  return R;
}

PoleFit pole_laplacian_estimate(const GreenData& green) {
  PoleFit P;
  const int n = green.n();
  const double lo = 1e-5, hi = 1e-3;
  const auto xs = log_grid(lo, hi, 60);
  // fit y = c0 + c2' x with x = (rho/hi)^2 so the normal matrix is O(1)
  double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
  std::vector<double> ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = (xs[i] / hi) * (xs[i] / hi);
    const double d = green.at(xs[i]).db;
    ys[i] = d * d;
    s0 += 1.0;
    s1 += x;
    s2 += x * x;
    t0 += ys[i];
    t1 += x * ys[i];
  }
  const double det = s0 * s2 - s1 * s1;
  const double c0 = (s2 * t0 - s1 * t1) / det;
  const double c2s = (s0 * t1 - s1 * t0) / det;
  const double tr = s0 + s2;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  const double lmax = 0.5 * tr + disc, lmin = 0.5 * tr - disc;
  P.condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  P.c0 = c0;
  P.c2 = c2s / (hi * hi);
  double res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = (xs[i] / hi) * (xs[i] / hi);
    res = std::max(res, std::abs(ys[i] - c0 - c2s * x));
  }
  P.fit_residual = res;
  P.quadratic_fit_ok = res <= 1e-8 && P.condition < 1e8;
  P.laplacian = 2.0 * n * P.c2;
  return P;
}

}  // namespace monolab

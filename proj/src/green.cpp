#include "monolab/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "monolab/diff.hpp"
#include "monolab/error.hpp"
#include "monolab/quadrature.hpp"

namespace monolab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// int_lo^hi f^{1-n} ds in the variable x = log s, where the integrand is smooth
// across the whole log grid.
double inverse_area_integral(const Profile& p, int n, double lo, double hi,
                             bool adaptive) {
  auto g = [&](double x) {
    const double s = std::exp(x);
    return s * std::pow(p.f(s), 1.0 - n);
  };
  const double a = std::log(lo);
  const double b = std::log(hi);
  if (!adaptive) return quad::kronrod21(g, a, b);
  return quad::integrate_checked(g, a, b, 1e-14, "Green segment");
}

std::size_t segment_index(const std::vector<double>& grid, double x) {
  auto it = std::upper_bound(grid.begin(), grid.end(), x);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  if (i == 0) return 0;
  i -= 1;
  return std::min(i, grid.size() - 2);
}

}  // namespace

double GreenData::G_value(double rho, std::size_t* seg) const {
  const int n = model_.n;
  const Profile& p = model_.profile;
  if (rho >= rho_.back()) {
    if (seg) *seg = rho_.size() - 2;
    return rho == rho_.back() ? G_.back() : (n - 2.0) * p.tail_integral(rho, n);
  }
  if (rho < rho_.front()) {
    if (seg) *seg = 0;
    return G_.front() + (n - 2.0) * inverse_area_integral(p, n, rho, rho_.front(), true);
  }
  const std::size_t i = segment_index(rho_, rho);
  if (seg) *seg = i;
  if (rho == rho_[i]) return G_[i];
  return G_[i + 1] + (n - 2.0) * inverse_area_integral(p, n, rho, rho_[i + 1], false);
}

GreenPoint GreenData::at(double rho) const {
  if (!(rho > 0.0)) throw InvalidArgument("GreenData::at needs rho > 0");
  const int n = model_.n;
  const Profile& pr = model_.profile;
  GreenPoint p;
  p.rho = rho;
  p.f = pr.f(rho);
  p.df = pr.df(rho);
  p.d2f = pr.d2f(rho);
  p.G = G_value(rho);
  p.b = std::pow(p.G, 1.0 / (2.0 - n));
  p.db = std::pow(p.b / p.f, n - 1.0);
  const double u = p.db / p.b - p.df / p.f;
  p.d2b = (n - 1.0) * p.db * u;
  const double du = p.d2b / p.b - (p.db * p.db) / (p.b * p.b) - p.d2f / p.f +
                    (p.df * p.df) / (p.f * p.f);
  p.d3b = (n - 1.0) * (p.d2b * u + p.db * du);
  return p;
}

GreenData solve_green(const ManifoldModel& model, double rho_min, double rho_max,
                      std::size_t points, Exec exec) {
  const int n = model.n;
  const auto np = nonparabolicity_check(model.profile, n, 1e3);
  if (n < 3 || !np.nonparabolic) {
    throw InadmissibleModel("solve_green: " + model.name() + " is not nonparabolic (" +
                            np.diagnostic + ")");
  }
  if (!(rho_min > 0.0 && rho_max > rho_min)) {
    throw InvalidArgument("solve_green needs 0 < rho_min < rho_max");
  }
  if (points < 200) throw InvalidArgument("solve_green needs at least 200 points");

  const Profile& p = model.profile;
  if (p.family() == Family::exp_cone) {
    const double gap = std::abs(p.df(rho_max) - p.asymptotic_slope());
    if (gap > 1e-6) {
      throw NumericalError("solve_green: tail not asymptotic at rho_max = " +
                           std::to_string(rho_max) + " (|f' - a| = " +
                           std::to_string(gap) + "); increase rho_max");
    }
  }

  GreenData g;
  g.model_ = model;
  g.omega_ = sphere_area(n);
  g.tail_slope_ = p.asymptotic_slope();
  g.rho_ = log_grid(rho_min, rho_max, points);
  const std::size_t N = g.rho_.size();

  std::vector<double> seg(N - 1);
  for_each_index(exec, N - 1, [&](std::size_t i) {
    seg[i] = inverse_area_integral(p, n, g.rho_[i], g.rho_[i + 1], true);
  });

  g.G_.resize(N);
  g.G_[N - 1] = (n - 2.0) * p.tail_integral(rho_max, n);
  for (std::size_t k = N - 1; k-- > 0;) g.G_[k] = g.G_[k + 1] + (n - 2.0) * seg[k];

  g.b_.resize(N);
  g.db_.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    g.b_[i] = std::pow(g.G_[i], 1.0 / (2.0 - n));
    g.db_[i] = std::pow(g.b_[i] / p.f(g.rho_[i]), n - 1.0);
  }

  // Harmonicity of the table, both derivatives by finite differences.
  std::vector<double> res(N, 0.0);
  for_each_index(exec, N, [&](std::size_t i) {
    const double r = g.rho_[i];
    const double h = 1e-3 * r;
    auto Gf = [&](double x) { return g.G_value(x); };
    const double d1 = diff::derivative(Gf, r, h);
    const double d2 = diff::second_derivative(Gf, r, h);
    const double drift = (n - 1.0) * p.df(r) / p.f(r) * d1;
    const double scale = std::abs(d2) + std::abs(drift);
    res[i] = scale > 0.0 ? std::abs(d2 + drift) / scale : 0.0;
  });
  g.harmonic_residual_ = *std::max_element(res.begin(), res.end());
  return g;
}

GreenData solve_green(const ManifoldModel& model, const GreenOptions& opts,
                      Exec exec) {
  const double decades = std::log10(opts.rho_max / opts.rho_min);
  const auto points = static_cast<std::size_t>(std::ceil(decades * opts.points_per_decade)) + 1;
  return solve_green(model, opts.rho_min, opts.rho_max, std::max<std::size_t>(points, 200),
                     exec);
}

double rho_of_b(const GreenData& green, double r) {
  const auto& b = green.b();
  const auto& rho = green.rho_grid();
  if (!(r >= b.front() && r <= b.back())) {
    throw RangeError("rho_of_b: level " + std::to_string(r) + " outside the table",
                     b.front(), b.back());
  }
  std::size_t i = segment_index(b, r);
  if (r == b[i]) return rho[i];
  if (r == b[i + 1]) return rho[i + 1];
  double lo = rho[i];
  double hi = rho[i + 1];
  // start from the log-linear interpolant
  const double w = std::log(r / b[i]) / std::log(b[i + 1] / b[i]);
  double x = lo * std::pow(hi / lo, w);
  for (int it = 0; it < 100; ++it) {
    const GreenPoint p = green.at(x);
    const double fx = p.b - r;
    if (fx == 0.0) return x;
    if (fx > 0.0) hi = x; else lo = x;
    double next = x - fx / p.db;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= 2.0 * kEps * x || hi - lo <= 2.0 * kEps * x) break;
  }
  return x;
}

LevelData level_quantities(const GreenData& green, double r) {
  LevelData d;
  d.r = r;
  d.rho = rho_of_b(green, r);
  const GreenPoint p = green.at(d.rho);
  d.area = green.omega() * std::pow(p.f, green.n() - 1.0);
  d.grad_b = p.db;
  return d;
}

double hessian_integrand(const GreenPoint& p, int n) {
  // With u = b^2: u'' - u' f'/f = 2n b'(b' - b f'/f), and the Ricci term is
  // u'^2 (n-1)(-f''/f).
  const double gap = p.db - p.b * p.df / p.f;
  const double tf = 4.0 * n * (n - 1.0) * p.db * p.db * gap * gap;
  const double ric = 4.0 * (n - 1.0) * p.b * p.b * p.db * p.db * (-p.d2f / p.f);
  return tf + ric;
}

double hessian_integrand(const GreenData& green, double rho) {
  return hessian_integrand(green.at(rho), green.n());
}

double tracefree_hessian(const GreenPoint& p, int n) {
  const double gap = p.db - p.b * p.df / p.f;
  return std::sqrt((n - 1.0) / n) * 2.0 * n * p.db * std::abs(gap);
}

RadialIntegral::RadialIntegral(const GreenData& green, Density density,
                               bool from_zero, Exec exec, double rho_hi)
    : green_(&green), density_(std::move(density)) {
  const auto& rho = green.rho_grid();
  std::size_t N = rho.size();
  if (rho_hi > 0.0 && rho_hi < rho.back()) {
    N = std::min(N, segment_index(rho, rho_hi) + 2);
  }
  // Segments are ~1% wide in log rho, where one 21-point pass is exact to
  // rounding. Adaptive refinement would only chase rounding noise in
  // densities that decay exponentially.
  auto g = [&](double x) {
    const double s = std::exp(x);
    return s * density_(green_->at(s));
  };
  std::vector<double> seg(N - 1);
  for_each_index(exec, N - 1, [&](std::size_t i) {
    seg[i] = quad::kronrod21(g, std::log(rho[i]), std::log(rho[i + 1]));
  });
  cum_.resize(N);
  cum_[0] = from_zero ? segment(rho[0] * std::exp(-40.0), rho[0]) : 0.0;
  for (std::size_t i = 1; i < N; ++i) cum_[i] = cum_[i - 1] + seg[i - 1];
}

double RadialIntegral::segment(double lo, double hi) const {
  auto g = [&](double x) {
    const double s = std::exp(x);
    return s * density_(green_->at(s));
  };
  return quad::integrate(g, std::log(lo), std::log(hi), 1e-13, 8).value;
}

double RadialIntegral::at(double rho) const {
  const auto& grid = green_->rho_grid();
  const std::size_t last = cum_.size() - 1;
  if (rho >= grid[last]) {
    return rho == grid[last] ? cum_[last] : cum_[last] + segment(grid[last], rho);
  }
  if (rho < grid.front()) return cum_.front() - segment(rho, grid.front());
  const std::size_t i = segment_index(grid, rho);
  if (rho == grid[i]) return cum_[i];
  auto g = [&](double x) {
    const double s = std::exp(x);
    return s * density_(green_->at(s));
  };
  return cum_[i] + quad::kronrod21(g, std::log(grid[i]), std::log(rho));
}

void write_green_csv(const GreenData& green, std::ostream& out) {
  out << "# monolab green v1 model=" << green.model().name() << '\n';
  out << "rho,G,b,db,Q\n";
  char buf[160];
  for (double r : green.rho_grid()) {
    const GreenPoint p = green.at(r);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r, p.G, p.b,
                  p.db, hessian_integrand(p, green.n()));
    out << buf;
  }
}

}  // namespace monolab

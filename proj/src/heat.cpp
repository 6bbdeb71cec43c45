#include "monolab/heat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "monolab/diff.hpp"
#include "monolab/error.hpp"
#include "monolab/quadrature.hpp"

namespace monolab {

namespace {

using quad::simpson;

// Gauss-Legendre nodes and weights on [-1, 1].
constexpr double kGaussX[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                               0.8611363115940526};
constexpr double kGaussW[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                               0.3478548451374538};

// (f(sqrt(t) xi) / sqrt(t))^{n-1} e^{-xi^2/4}: the measure of H dvol in xi,
// up to the sphere area.
double weight(const ManifoldModel& m, double xi, double sqrt_t) {
  if (xi <= 0.0) return 0.0;
  const double scaled = m.profile.f(sqrt_t * xi) / sqrt_t;
  return std::exp((m.n - 1) * std::log(scaled) - 0.25 * xi * xi);
}

struct Operator {
  std::vector<double> cell;  // integral of the weight over each control cell
  std::vector<double> face;  // weight at the cell faces j + 1/2
};

Operator build_operator(const ManifoldModel& m, const std::vector<double>& xi, double t) {
  const std::size_t N = xi.size();
  const double dx = xi[1] - xi[0];
  const double st = std::sqrt(t);
  Operator op;
  op.cell.resize(N);
  op.face.resize(N - 1);
  for (std::size_t j = 0; j < N; ++j) {
    const double lo = j == 0 ? xi[0] : xi[j] - 0.5 * dx;
    const double hi = j + 1 == N ? xi[j] : xi[j] + 0.5 * dx;
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double s = 0.0;
    for (int g = 0; g < 4; ++g) s += kGaussW[g] * weight(m, c + h * kGaussX[g], st);
    op.cell[j] = s * h;
  }
  for (std::size_t j = 0; j + 1 < N; ++j) op.face[j] = weight(m, xi[j] + 0.5 * dx, st) / dx;
  return op;
}

double discrete_mass(const Operator& op, const std::vector<double>& psi) {
  double s = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) s += op.cell[j] * psi[j];
  return s;
}

double simpson_mass(const ManifoldModel& m, const std::vector<double>& xi,
                    const std::vector<double>& psi, double t) {
  const double st = std::sqrt(t);
  std::vector<double> y(xi.size());
  for (std::size_t j = 0; j < xi.size(); ++j) y[j] = weight(m, xi[j], st) * psi[j];
  return sphere_area(m.n) * simpson(y, xi[1] - xi[0]);
}

// Thomas algorithm; sub[0] and sup[N-1] are unused.
void solve_tridiagonal(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                       std::vector<double>& rhs) {
  const std::size_t N = diag.size();
  for (std::size_t j = 1; j < N; ++j) {
    const double w = sub[j] / diag[j - 1];
    diag[j] -= w * sup[j - 1];
    rhs[j] -= w * rhs[j - 1];
  }
  rhs[N - 1] /= diag[N - 1];
  for (std::size_t j = N - 1; j-- > 0;) rhs[j] = (rhs[j] - sup[j] * rhs[j + 1]) / diag[j];
}

}  // namespace

double HeatData::rho(std::size_t k, std::size_t j) const { return std::sqrt(t_grid[k]) * xi[j]; }

double HeatData::H(std::size_t k, std::size_t j) const {
  const double t = t_grid[k];
  return std::pow(t, -0.5 * model.n) * std::exp(-0.25 * xi[j] * xi[j]) * psi[k][j];
}

std::vector<double> HeatData::density(std::size_t k) const {
  const double st = std::sqrt(t_grid[k]);
  std::vector<double> w(xi.size());
  for (std::size_t j = 0; j < xi.size(); ++j) w[j] = weight(model, xi[j], st) * psi[k][j];
  const double m = simpson(w, xi[1] - xi[0]);
  for (double& v : w) v /= m;
  return w;
}

std::vector<double> HeatData::rho_grid(std::size_t k) const {
  std::vector<double> r(xi.size());
  for (std::size_t j = 0; j < xi.size(); ++j) r[j] = rho(k, j);
  return r;
}

HeatData solve_heat_kernel(const ManifoldModel& model, const HeatOptions& o) {
  if (!(o.t0 > 0.0 && o.t1 > o.t0)) throw InvalidArgument("heat: need 0 < t0 < t1");
  if (!(o.xi_max >= 10.0)) throw InvalidArgument("heat: rho_max must be at least 10 sqrt(t1)");
  if (o.nodes < 101 || o.nodes % 2 == 0) throw InvalidArgument("heat: nodes must be odd and >= 101");
  if (o.steps < 10 || o.retain_every == 0 || o.steps % o.retain_every != 0)
    throw InvalidArgument("heat: steps must be a multiple of retain_every");

  HeatData hd{model, o, {}, {}, {}, {}, 0.0};
  const std::size_t N = o.nodes;
  const double dx = o.xi_max / static_cast<double>(N - 1);
  hd.xi.resize(N);
  for (std::size_t j = 0; j < N; ++j) hd.xi[j] = dx * static_cast<double>(j);

  const double log_t0 = std::log(o.t0);
  const double dtau = (std::log(o.t1) - log_t0) / static_cast<double>(o.steps);
  auto time_at = [&](std::size_t k) {
    return k == o.steps ? o.t1 : std::exp(log_t0 + dtau * static_cast<double>(k));
  };

  // Euclidean Gaussian at t0 is psi = const in these variables.
  std::vector<double> psi(N, 1.0);
  Operator op = build_operator(model, hd.xi, o.t0);
  {
    const double m = simpson_mass(model, hd.xi, psi, o.t0);
    for (double& p : psi) p /= m;
  }
  auto retain = [&](double t) {
    hd.t_grid.push_back(t);
    hd.psi.push_back(psi);
    hd.mass.push_back(simpson_mass(model, hd.xi, psi, t));
  };
  retain(o.t0);

  std::vector<double> sub(N), diag(N), sup(N), rhs(N);
  for (std::size_t k = 0; k < o.steps; ++k) {
    const Operator next = build_operator(model, hd.xi, time_at(k + 1));
    const double before = discrete_mass(op, psi);
    // (M' psi' - M psi) / dtau = (L' psi' + L psi) / 2, L psi = flux differences.
    for (std::size_t j = 0; j < N; ++j) {
      const double kl = j > 0 ? op.face[j - 1] : 0.0;
      const double kr = j + 1 < N ? op.face[j] : 0.0;
      double lpsi = 0.0;
      if (j > 0) lpsi += kl * (psi[j - 1] - psi[j]);
      if (j + 1 < N) lpsi += kr * (psi[j + 1] - psi[j]);
      rhs[j] = op.cell[j] * psi[j] / dtau + 0.5 * lpsi;

      const double nl = j > 0 ? next.face[j - 1] : 0.0;
      const double nr = j + 1 < N ? next.face[j] : 0.0;
      sub[j] = -0.5 * nl;
      sup[j] = -0.5 * nr;
      diag[j] = next.cell[j] / dtau + 0.5 * (nl + nr);
    }
    // The outer edge is an outflow boundary for the drift -xi/2 d/dxi: carry
    // the previous step's gradient through instead of imposing zero flux.
    sub[N - 1] = -1.0;
    diag[N - 1] = 1.0;
    rhs[N - 1] = psi[N - 2] - psi[N - 3];
    solve_tridiagonal(sub, diag, sup, rhs);
    psi.swap(rhs);
    op = next;

    const double after = discrete_mass(op, psi);
    const double drift = std::abs(after / before - 1.0);
    hd.max_step_drift = std::max(hd.max_step_drift, drift);
    if (drift > 1e-4) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "heat: mass drift %.3g in step %zu exceeds 1e-4; try more steps", drift, k + 1);
      throw NumericalError(buf);
    }
    for (std::size_t j = 0; j < N; ++j) {
      if (!(psi[j] > 0.0)) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "heat: kernel non-positive at xi=%.4g in step %zu; enlarge rho_max",
                      hd.xi[j], k + 1);
        throw NumericalError(buf);
      }
    }
    if ((k + 1) % o.retain_every == 0) {
      const double t = time_at(k + 1);
      const double m = simpson_mass(model, hd.xi, psi, t);
      for (double& p : psi) p /= m;
      hd.t_grid.push_back(t);
      hd.psi.push_back(psi);
      hd.mass.push_back(m);
    } else {
      for (double& p : psi) p /= after / before;
    }
  }
  return hd;
}

HeatData solve_heat_kernel(const ManifoldModel& model, double t0, double t1, double rho_max,
                           std::size_t steps) {
  if (!(t1 > 0.0) || !(rho_max >= 10.0 * std::sqrt(t1)))
    throw InvalidArgument("heat: rho_max must be at least 10 sqrt(t1)");
  HeatOptions o;
  o.t0 = t0;
  o.t1 = t1;
  o.xi_max = rho_max / std::sqrt(t1);
  o.steps = steps;
  o.retain_every = steps % 10 == 0 ? 10 : 1;
  return solve_heat_kernel(model, o);
}

namespace {

struct Snapshot {
  double S = 0, F = 0, hess = 0, ric = 0, liyau = 0, liyau_rho = 0, dH = 0, tail = 0;
};

Snapshot evaluate_snapshot(const HeatData& hd, std::size_t k) {
  const ManifoldModel& m = hd.model;
  const int n = m.n;
  const double t = hd.t_grid[k];
  const double st = std::sqrt(t);
  const auto& xi = hd.xi;
  const auto& psi = hd.psi[k];
  const std::size_t N = xi.size();
  const double dx = xi[1] - xi[0];

  std::vector<double> ell(N), d1(N), d2(N), w(N);
  for (std::size_t j = 0; j < N; ++j) {
    ell[j] = std::log(psi[j]);
    w[j] = weight(m, xi[j], st) * psi[j];
  }
  d1[0] = 0.0;
  // The tip is only C^{1,1}, so psi = c0 + c2 xi^2 + c3 xi^3 + ... at the
  // pole; the symmetric stencil would be first order.
  d2[0] = 2.0 * (8.0 * (ell[1] - ell[0]) - (ell[2] - ell[0])) / (4.0 * dx * dx);
  for (std::size_t j = 1; j + 1 < N; ++j) {
    d1[j] = (ell[j + 1] - ell[j - 1]) / (2.0 * dx);
    d2[j] = (ell[j + 1] - 2.0 * ell[j] + ell[j - 1]) / (dx * dx);
  }
  d1[N - 1] = (3.0 * ell[N - 1] - 4.0 * ell[N - 2] + ell[N - 3]) / (2.0 * dx);
  d2[N - 1] = (2.0 * ell[N - 1] - 5.0 * ell[N - 2] + 4.0 * ell[N - 3] - ell[N - 4]) / (dx * dx);

  const double mass = simpson(w, dx);
  std::vector<double> yS(N), yF(N), yH(N), yR(N);
  Snapshot out;
  out.liyau = -1e300;
  out.dH = -1e300;
  double ell_abs = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    const double mu = w[j] / mass;
    const double x = xi[j];
    const double grad = 0.5 * x - d1[j];  // sqrt(t) dh/drho
    double tangential = 0.0, ric = 0.0, liyau = 0.0;
    if (j == 0) {
      // At the pole the tangential eigenvalue equals the radial one.
      tangential = d2[0] * d2[0];
      liyau = -n * d2[0];
    } else {
      const double rho = st * x;
      const double q = st * m.profile.df(rho) / m.profile.f(rho);
      const double drift = (n - 1) * st * m.profile.sdf_minus_f(rho) / (rho * m.profile.f(rho));
      const double tang = grad * q - 0.5;
      tangential = (n - 1) * tang * tang;
      ric = (n - 1) * t * (-m.profile.d2f(rho) / m.profile.f(rho)) * grad * grad;
      liyau = -d2[j] - (n - 1) * q * d1[j] + 0.5 * drift * x;
    }
    yS[j] = (0.25 * x * x - ell[j]) * mu;
    yF[j] = grad * grad * mu;
    yH[j] = (d2[j] * d2[j] + (j == 0 ? (n - 1) * tangential : tangential)) * mu;
    yR[j] = ric * mu;
    if (liyau > out.liyau) {
      out.liyau = liyau;
      out.liyau_rho = st * x;
    }
    out.dH = std::max(out.dH, -grad * hd.H(k, j) / st);
    ell_abs = std::max(ell_abs, std::abs(ell[j]));
  }
  out.S = simpson(yS, dx) - 0.5 * n * std::log(4.0 * M_PI) - 0.5 * n;
  out.F = simpson(yF, dx) - 0.5 * n;
  out.hess = simpson(yH, dx);
  out.ric = simpson(yR, dx);

  // Beyond xi_max the weight is below xi^{n-1} e^{-xi^2/4}; every integrand
  // is at most (xi^2 + |log psi| + 1) times it.
  const double X = xi[N - 1];
  const double psi_max = *std::max_element(psi.begin(), psi.end());
  out.tail = sphere_area(n) * psi_max / mass * (1.0 + ell_abs) * 4.0 * std::pow(X, n) *
             std::exp(-0.25 * X * X);
  return out;
}

}  // namespace

EntropyReport entropy_series(const HeatData& hd, Exec exec) {
  const std::size_t K = hd.t_grid.size();
  if (K < 5) throw InvalidArgument("entropy_series: need at least 5 retained times");
  std::vector<Snapshot> snap(K);
  for_each_index(exec, K, [&](std::size_t k) { snap[k] = evaluate_snapshot(hd, k); });

  EntropyReport r;
  r.model = hd.model.name();
  r.n = hd.model.n;
  r.t_grid = hd.t_grid;
  std::vector<double> tau(K), tF(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Snapshot& s = snap[k];
    const double t = hd.t_grid[k];
    tau[k] = std::log(t);
    r.S.push_back(s.S);
    r.F.push_back(s.F);
    r.W.push_back(s.F + s.S);
    tF[k] = t * s.F;
    r.rhs_mono.push_back(-2.0 * (s.hess + s.ric));
    r.hess_only.push_back(s.hess);
    r.liyau_max.push_back(s.liyau);
    r.liyau_argmax.push_back(s.liyau_rho);
    r.max_dH.push_back(s.dH);
    r.tail_bound = std::max(r.tail_bound, s.tail);
  }
  if (r.tail_bound > 1e-12) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "entropy_series: integrand tail bound %.3g at rho_max exceeds 1e-12", r.tail_bound);
    throw NumericalError(buf);
  }
  const auto dS = diff::sampled_derivative(tau, r.S, 1);
  const auto dW = diff::sampled_derivative(tau, r.W, 1);
  const auto dtF = diff::sampled_derivative(tau, tF, 1);
  for (std::size_t k = 0; k < K; ++k) {
    const double t = hd.t_grid[k];
    r.dS.push_back(dS[k] / t);
    r.dW.push_back(dW[k] / t);
    r.dtF.push_back(dtF[k] / t);
  }
  return r;
}

EntropyResiduals entropy_identities(const EntropyReport& rep, double t_lo, double t_hi) {
  const std::size_t K = rep.t_grid.size();
  if (K < 30) throw InvalidArgument("entropy_identities: need at least 30 time points");
  std::vector<double> tau(K), J(K);
  for (std::size_t k = 0; k < K; ++k) {
    tau[k] = std::log(rep.t_grid[k]);
    J[k] = rep.t_grid[k] * rep.S[k];
  }
  auto J1 = diff::sampled_derivative(tau, J, 1);
  for (std::size_t k = 0; k < K; ++k) J1[k] /= rep.t_grid[k];
  const auto J2 = diff::sampled_derivative(tau, J1, 1);
  auto rel = [](double x, double y) {
    return std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-6});
  };
  EntropyResiduals out;
  for (std::size_t k = 0; k < K; ++k) {
    const double t = rep.t_grid[k];
    if (t < t_lo || t > t_hi) continue;
    const double dJ = J1[k];
    const double d2J = J2[k] / t;
    out.t.push_back(t);
    out.F_tdS.push_back(rel(rep.F[k], t * rep.dS[k]));
    out.dtF_rhs.push_back(rel(rep.dtF[k], rep.rhs_mono[k]));
    out.decay_slack.push_back(-rep.dtF[k] - 2.0 / rep.n * rep.F[k] * rep.F[k]);
    out.dJ_W.push_back(rel(dJ, rep.W[k]));
    out.d2J_rhs.push_back(rel(d2J, rep.rhs_mono[k] / t));
    out.W_increase.push_back(k > 0 ? rep.W[k] - rep.W[k - 1] : 0.0);
  }
  return out;
}

void write_entropy_csv(const EntropyReport& rep, std::ostream& out) {
  out << "# monolab entropy v1 model=" << rep.model << "\n";
  out << "t,S,F,W,dS,dW,dtF,rhs_mono,liyau_max\n";
  char buf[512];
  for (std::size_t k = 0; k < rep.t_grid.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  rep.t_grid[k], rep.S[k], rep.F[k], rep.W[k], rep.dS[k], rep.dW[k], rep.dtF[k],
                  rep.rhs_mono[k], rep.liyau_max[k]);
    out << buf;
  }
}

}  // namespace monolab

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "monolab/parallel.hpp"
#include "monolab/profiles.hpp"

namespace monolab {

struct HeatOptions {
  double t0 = 1e-4;  // seeding time
  double t1 = 300.0;
  double xi_max = 20.0;      // outer edge in rho / sqrt(t)
  std::size_t nodes = 4001;  // odd, for Simpson
  std::size_t steps = 2000;  // uniform in log t
  std::size_t retain_every = 10;
};

/// Radial heat kernel centred at the tip.
///
/// Stored in similarity form: H(rho, t) = t^{-n/2} e^{-xi^2/4} psi(xi, t) with
/// xi = rho / sqrt(t), on a fixed uniform xi grid. psi is O(1) everywhere (it
/// is constant on flat space), which keeps log H and its derivatives well
/// conditioned far into the Gaussian tail.
struct HeatData {
  ManifoldModel model;
  HeatOptions options;
  std::vector<double> xi;
  std::vector<double> t_grid;  // retained times
  std::vector<std::vector<double>> psi;  // psi[k][j] at t_grid[k], xi[j]
  std::vector<double> mass;   // before renormalisation, at retained times
  double max_step_drift = 0.0;

  double rho(std::size_t k, std::size_t j) const;
  double H(std::size_t k, std::size_t j) const;
  /// Probability density of H dvol in xi at retained time k (Simpson-normalised).
  std::vector<double> density(std::size_t k) const;
  double dxi() const { return xi[1] - xi[0]; }
  /// rho grid at retained time k.
  std::vector<double> rho_grid(std::size_t k) const;
};

/// Crank-Nicolson in (xi, log t) from a unit-mass Gaussian seed at t0.
/// Renormalises mass after every step; throws NumericalError if one step
/// drifts by more than 1e-4 or psi becomes non-positive.
HeatData solve_heat_kernel(const ManifoldModel& model, const HeatOptions& opts = {});
/// rho_max >= 10 sqrt(t1) sets xi_max = rho_max / sqrt(t1).
HeatData solve_heat_kernel(const ManifoldModel& model, double t0, double t1, double rho_max,
                           std::size_t steps);

struct EntropyReport {
  std::string model;
  int n = 3;
  std::vector<double> t_grid;
  std::vector<double> S, F, W;
  std::vector<double> dS, dW, dtF;  // d/dt of S, W and tF
  std::vector<double> rhs_mono;     // -2 t^2 int (|Hess_h - g/2t|^2 + Ric(dh, dh)) H
  std::vector<double> hess_only;    // t^2 int |Hess_h - g/2t|^2 H
  std::vector<double> liyau_max;    // max over rho of t(-Delta log H) - n/2
  std::vector<double> liyau_argmax; // rho where it is attained
  std::vector<double> max_dH;       // max over rho of d/drho H (should be <= 0)
  double tail_bound = 0.0;          // Gaussian majorant of the discarded tail
};

EntropyReport entropy_series(const HeatData& heat, Exec exec = Exec::serial);

struct EntropyResiduals {
  std::vector<double> t;
  std::vector<double> F_tdS;        // |F - t S'| / max(|F|, |t S'|, 1e-6)
  std::vector<double> dtF_rhs;      // |d(tF)/dt - rhs| scaled the same way
  std::vector<double> decay_slack;  // -d(tF)/dt - (2/n) F^2, should be >= 0
  std::vector<double> dJ_W;         // |(tS)' - W| scaled
  std::vector<double> d2J_rhs;      // |(tS)'' - rhs/t| scaled
  std::vector<double> W_increase;   // W[k] - W[k-1]
};

/// Restricted to t in [t_lo, t_hi].
EntropyResiduals entropy_identities(const EntropyReport& rep, double t_lo = 0.0,
                                    double t_hi = 1e300);

void write_entropy_csv(const EntropyReport& rep, std::ostream& out);

}  // namespace monolab

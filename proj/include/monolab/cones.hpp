#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "monolab/green.hpp"
#include "monolab/heat.hpp"
#include "monolab/parallel.hpp"
#include "monolab/profiles.hpp"

namespace monolab {

/// Scale-invariant distance from B_r(pole) to the nearest cone over a round
/// sphere, through the upper bound (1/r) min_a sup_{s<=r} |f(s) - a s|.
struct ThetaValue {
  double theta = 0.0;
  double best_a = 1.0;
};

ThetaValue theta_hat(const Profile& profile, double r);
inline ThetaValue theta_hat(const ManifoldModel& m, double r) { return theta_hat(m.profile, r); }

struct ThetaSeries {
  std::vector<double> r_grid, theta, best_a;
};

ThetaSeries theta_series(const ManifoldModel& model, const std::vector<double>& r_grid,
                         Exec exec = Exec::serial);

enum class Criterion { dini_log, ode_decay, summability };
std::string to_string(Criterion c);

struct CriteriaVerdict {
  Criterion criterion = Criterion::dini_log;
  bool holds = false;
  bool inconclusive = false;
  double value = 0.0;      // partial integral plus fitted tail
  double exponent = 0.0;   // dini: power of r; ode: slope of log(-F') in log s
  double exponent2 = 0.0;  // dini: power of log r
  double r_squared = 1.0;
  double violation_at = -1.0;  // first s with -F' < F^{1+alpha}, or -1
  double lemma_excess = 0.0;   // max (F(t) - bound)/bound for the decay lemma
  std::string diagnostics;
};

/// Convergence of int Theta^2 |log r|^alpha / r dr from the samples and a
/// fitted tail log Theta = c + p log r + q log log r on the last decade.
CriteriaVerdict dini_check(const ThetaSeries& theta, double alpha);

/// -F' >= F^{1+alpha} on the samples and finiteness of int |F'| s^{1+2 eps}.
CriteriaVerdict ode_criterion_check(const std::vector<double>& s, const std::vector<double>& F,
                                    double alpha, double epsilon, double rel_tol = 1e-4);

/// Unique tangent cone from the first monotone quantity: F(s) = X(c e^s) - K
/// with X = 2(n-1)V - A and K its limit.
struct UniqueConeScenario {
  std::string model;
  double K = 0.0;
  double fitted_decay = 0.0;    // slope of log(X - K) in log r
  double max_c_ratio = 0.0;     // sup Theta^{2+2eps} / (-F'), diagnostic only
  std::vector<double> s, F;
  CriteriaVerdict verdict;
};

UniqueConeScenario unique_cone_scenario(const GreenData& green, double alpha = 0.5,
                                        double epsilon = 0.1, double c_scale = 2.0,
                                        Exec exec = Exec::serial);

/// The four ratios of a cone-distance power to a Hessian quantity on {b <= r}.
struct FundRatioSeries {
  std::string name;
  std::vector<double> ratio;
  bool applicable = true;
  bool finite = true;
  double sup = 0.0;        // over the stability window
  double variation = 0.0;  // (sup - inf) / sup over the stability window
  bool stable = false;
};

struct FundRatioReport {
  std::string model;
  double epsilon = 0.1, c_scale = 2.0;
  double window_lo = 100.0, window_hi = 1000.0;
  std::vector<double> r_grid;
  std::vector<FundRatioSeries> series;  // tracefree_l1, tracefree_l2, first_mono, second_mono
  bool passed = false;
};

FundRatioReport fund_ratio_report(const GreenData& green, const std::vector<double>& r_grid,
                                  double epsilon = 0.1, double c_scale = 2.0,
                                  double window_lo = 100.0, double window_hi = 1000.0,
                                  Exec exec = Exec::serial);

/// Heat-kernel weighted cone distances at the retained times.
struct WeightedDistance {
  std::string model;
  std::vector<double> t;
  std::vector<double> C;
  std::vector<double> alphas;
  std::vector<std::vector<double>> C_alpha;  // per alpha
  std::vector<double> ratio;  // C^2 / (t^2 int |Hess h - g/2t|^2 H)
  double sup_ratio_large_t = 0.0;  // over t >= t_large
  double t_large = 1.0;
};

WeightedDistance weighted_distance(const HeatData& heat, const EntropyReport& entropy,
                                   const std::vector<double>& alphas = {2.0, 3.0},
                                   double t_large = 1.0, Exec exec = Exec::serial);

/// Koch-type curve: each chord is replaced by two equal segments meeting at
/// `angle`, `level` times. Theta at r = 2^{-k}, k = 1..scales, around the
/// base vertex against the segment towards the exit point.
ThetaSeries koch_theta(int level, double angle, int scales = 4);

void write_theta_csv(const ThetaSeries& theta, const std::string& label, std::ostream& out);
void write_verdict_line(const CriteriaVerdict& v, std::ostream& out);

}  // namespace monolab

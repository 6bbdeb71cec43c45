#include "monolab/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "monolab/error.hpp"

namespace monolab::quad {

namespace {

using GK21 = boost::math::quadrature::gauss_kronrod<double, 21>;
using G10 = boost::math::quadrature::gauss<double, 10>;

constexpr double kFloor = 64.0 * std::numeric_limits<double>::epsilon();

struct Piece {
  double a, b, value, error, l1;
  bool operator<(const Piece& o) const { return error < o.error; }
};

// One 21-point pass with the QUADPACK error heuristic. Boost's own adaptive
// driver reports |K - G| in the [-1, 1] frame, which on short intervals is
// off by the half-width and can never meet tight relative tolerances.
Piece pass(const Integrand& f, double a, double b) {
  const auto& x = GK21::abscissa();
  const auto& wk = GK21::weights();
  const auto& wg = G10::weights();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[21];
  fv[0] = f(c);
  double k = fv[0] * wk[0];
  double g = 0.0;  // 10-point Gauss has no centre node
  double l1 = std::abs(k);
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fp = f(c + h * x[i]);
    const double fm = f(c - h * x[i]);
    fv[2 * i - 1] = fp;
    fv[2 * i] = fm;
    k += (fp + fm) * wk[i];
    l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
    if (i % 2 == 1) g += (fp + fm) * wg[i / 2];
  }
  const double mean = 0.5 * k;
  double asc = std::abs(fv[0] - mean) * wk[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    asc += (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean)) * wk[i];
  }
  const double ah = std::abs(h);
  double err = std::abs((k - g) * h);
  asc *= ah;
  l1 *= ah;
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * l1);
  return {a, b, k * h, err, l1};
}

}  // namespace

Result integrate(const Integrand& f, double a, double b, double rel_tol,
                 unsigned max_depth) {
  Result r;
  if (a == b) return r;
  std::priority_queue<Piece> heap;
  Piece first = pass(f, a, b);
  double value = first.value, error = first.error, l1 = first.l1;
  heap.push(first);
  const std::size_t max_pieces = std::size_t{1} << std::min(max_depth, 12u);
  // the per-piece error floor is 50 eps * L1, so tighter requests are capped
  const double tol = std::max(rel_tol, kFloor);
  while (error > tol * l1 && heap.size() < max_pieces) {
    const Piece p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    if (m == p.a || m == p.b) {  // cannot split further
      heap.push(p);
      break;
    }
    const Piece left = pass(f, p.a, m);
    const Piece right = pass(f, m, p.b);
    value += left.value + right.value - p.value;
    error += left.error + right.error - p.error;
    l1 += left.l1 + right.l1 - p.l1;
    heap.push(left);
    heap.push(right);
  }
  // re-sum to shed the running-update rounding
  value = error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  r.value = value;
  r.error = error;
  r.l1 = l1;
  return r;
}

double integrate_checked(const Integrand& f, double a, double b, double rel_tol,
                         const char* what) {
  if (a == b) return 0.0;
  const Result r = integrate(f, a, b, rel_tol);
  const double rel = r.l1 > 0.0 ? r.error / r.l1 : r.error;
  if (!(rel <= std::max(rel_tol, 2.0 * kFloor))) throw QuadratureError(what, rel, rel_tol);
  return r.value;
}

double kronrod21(const Integrand& f, double a, double b) {
  if (a == b) return 0.0;
  return pass(f, a, b).value;
}

Result integrate_to_infinity(const Integrand& f, double a, double rel_tol) {
  Result r;
  boost::math::quadrature::exp_sinh<double> integrator;
  r.value = integrator.integrate([&](double x) { return f(x + a); }, rel_tol,
                                 &r.error, &r.l1);
  return r;
}

double simpson(const std::vector<double>& y, double dx) {
  const std::size_t N = y.size();
  if (N < 3 || N % 2 == 0) throw InvalidArgument("simpson: need an odd number of samples >= 3");
  double s = y[0] + y[N - 1];
  for (std::size_t j = 1; j + 1 < N; ++j) s += (j % 2 ? 4.0 : 2.0) * y[j];
  return s * dx / 3.0;
}

}  // namespace monolab::quad

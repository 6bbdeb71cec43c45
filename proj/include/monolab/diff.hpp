#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace monolab::diff {

// Central differences with one Richardson step. h is the coarse step; the
// extrapolated error is O(h^4) for smooth functions.
template <class Fn>
double derivative(const Fn& f, double x, double h) {
  const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
  const double h2 = 0.5 * h;
  const double d2 = (f(x + h2) - f(x - h2)) / (2.0 * h2);
  return (4.0 * d2 - d1) / 3.0;
}

template <class Fn>
double second_derivative(const Fn& f, double x, double h) {
  const double f0 = f(x);
  const double d1 = (f(x + h) - 2.0 * f0 + f(x - h)) / (h * h);
  const double h2 = 0.5 * h;
  const double d2 = (f(x + h2) - 2.0 * f0 + f(x - h2)) / (h2 * h2);
  return (4.0 * d2 - d1) / 3.0;
}

// Finite-difference weights at x0 for the nodes x[0..count) and derivative
// order `order` (Fornberg's recursion). Nodes may be unevenly spaced.
inline std::vector<double> fd_weights(double x0, const double* x, std::size_t count, int order) {
  const std::size_t m = static_cast<std::size_t>(order);
  std::vector<std::vector<double>> c(count, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < count; ++i) {
    const std::size_t mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k)
          c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k)
        c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(count);
  for (std::size_t i = 0; i < count; ++i) w[i] = c[i][m];
  return w;
}

// Derivative of sampled data at every node from a sliding window of `width`
// nodes, centred where possible and one-sided at the ends.
inline std::vector<double> sampled_derivative(const std::vector<double>& x,
                                              const std::vector<double>& y, int order,
                                              std::size_t width = 5) {
  const std::size_t n = x.size();
  if (y.size() != n || n < width || width <= static_cast<std::size_t>(order))
    throw std::invalid_argument("sampled_derivative: not enough samples");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = i >= width / 2 ? i - width / 2 : 0;
    lo = std::min(lo, n - width);
    const auto w = fd_weights(x[i], x.data() + lo, width, order);
    double s = 0.0;
    for (std::size_t k = 0; k < width; ++k) s += w[k] * y[lo + k];
    d[i] = s;
  }
  return d;
}

}  // namespace monolab::diff

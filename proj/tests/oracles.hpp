#pragma once

// Independent reference procedures for the tests. Nothing here calls into
// the library's solvers.

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// Plain bisection; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo);
  for (int it = 0; it < 2000 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Column j of the Jacobian of F at x by central differences, relative step.
inline std::vector<double> jacobian_column(
    const std::function<std::vector<double>(const std::vector<double>&)>& F,
    std::vector<double> x, std::size_t j, double rel_h) {
  const double h = rel_h * std::max(std::abs(x[j]), 1e-300);
  const double xj = x[j];
  x[j] = xj + h;
  auto fp = F(x);
  x[j] = xj - h;
  auto fm = F(x);
  std::vector<double> col(fp.size());
  for (std::size_t i = 0; i < fp.size(); ++i) col[i] = (fp[i] - fm[i]) / (2.0 * h);
  return col;
}

// Classical RK4 for y' = F(t, y) from t0 to t1 in n equal steps.
inline std::vector<double> rk4(
    const std::function<std::vector<double>(double, const std::vector<double>&)>& F,
    double t0, double t1, std::vector<double> y, int n) {
  const double h = (t1 - t0) / n;
  auto axpy = [](const std::vector<double>& a, double c, const std::vector<double>& b) {
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + c * b[i];
    return r;
  };
  double t = t0;
  for (int k = 0; k < n; ++k) {
    auto k1 = F(t, y);
    auto k2 = F(t + h / 2, axpy(y, h / 2, k1));
    auto k3 = F(t + h / 2, axpy(y, h / 2, k2));
    auto k4 = F(t + h, axpy(y, h, k3));
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    t += h;
  }
  return y;
}

}  // namespace oracles

#include "msmix/chart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msmix {

namespace {

thread_local ChiObserver chi_observer;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

void set_chi_observer(ChiObserver obs) { chi_observer = std::move(obs); }

void validate_chart_point(const SpeciesSet& sp, const ChartPoint& pt) {
  if (!(pt.s > 0) || !std::isfinite(pt.s))
    throw Error(ErrorKind::InvalidArgument, "chart point needs s > 0");
  if (pt.w.size() != sp.N()) throw Error(ErrorKind::InvalidArgument, "chart point has wrong length");
  for (double v : pt.w)
    if (!(v > 0) || !std::isfinite(v)) throw Error(ErrorKind::NonpositiveDensity, "w must be positive");
  if (std::abs(dot(sp.vbar0(), pt.w) - 1.0) > 1e-11)
    throw Error(ErrorKind::InvalidArgument, "w is not on S0 (v0 . w != 1)");
}

double chi_root_log(std::span<const double> log_a, std::span<const double> m) {
  const std::size_t n = log_a.size();
  if (m.size() != n || n == 0) throw Error(ErrorKind::InvalidArgument, "chi_root: size mismatch");
  double mmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(m[i] > 0)) throw Error(ErrorKind::InvalidArgument, "chi_root: masses must be positive");
    if (log_a[i] > kNegInf) mmin = std::min(mmin, m[i]);
  }
  if (!std::isfinite(mmin)) throw Error(ErrorKind::InvalidArgument, "chi_root: all coefficients vanish");

  Vec terms(n);
  // phi(t) = ln sum_j a_j e^{m_j t}: convex, strictly increasing
  auto phi = [&](double t) {
    for (std::size_t i = 0; i < n; ++i) terms[i] = log_a[i] + m[i] * t;
    return log_sum_exp(terms);
  };
  auto dphi = [&](double t) {
    const double l = phi(t);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (log_a[i] > kNegInf) d += std::exp(terms[i] - l) * m[i];
    return d;
  };

  const double L = phi(0.0);  // ln |a|_1
  double t = 0.0;
  if (std::abs(L) > 1e-15) {
    // the chi bound in log form, widened a hair so rounding cannot
    // put the root outside when a single term dominates
    const double edge = -L / mmin + std::copysign(1e-12 * (1.0 + std::abs(L / mmin)), -L);
    RootProblem pr;
    pr.f = phi;
    pr.df = dphi;
    pr.bracket_lo = std::min(0.0, edge);
    pr.bracket_hi = std::max(0.0, edge);
    pr.tol_abs = 1e-15;
    // the tangent at the right end never overshoots a convex increasing phi
    pr.guess = pr.bracket_hi - phi(pr.bracket_hi) / dphi(pr.bracket_hi);
    t = solve_bracketed(pr);
  }
  if (chi_observer) chi_observer(log_a, m, t);
  return t;
}

double chi_root(std::span<const double> a, std::span<const double> m) {
  Vec la(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] >= 0)) throw Error(ErrorKind::InvalidArgument, "chi_root: coefficients must be nonnegative");
    la[i] = a[i] > 0 ? std::log(a[i]) : kNegInf;
  }
  return std::exp(chi_root_log(la, m));
}

ChiBounds chi_bounds(std::span<const double> a, std::span<const double> m) {
  const double a1 = sum(a);
  const double mmin = *std::min_element(m.begin(), m.end());
  const double mmax = *std::max_element(m.begin(), m.end());
  ChiBounds b;
  b.lo = std::pow(std::min(1.0, 1.0 / a1), 1.0 / mmin);
  b.hi = std::pow(std::max(1.0, 1.0 / a1), 1.0 / mmin);
  b.pow_lo = std::min(1.0, std::pow(a1, -mmax / mmin));
  b.pow_hi = std::max(1.0, std::pow(a1, -mmax / mmin));
  return b;
}

Vec log_number_fractions(const SpeciesSet& sp, std::span<const double> rho) {
  const std::size_t N = sp.N();
  Vec l(N);
  Vec t(N);
  for (std::size_t i = 0; i < N; ++i) {
    t[i] = rho[i] > 0 ? std::log(rho[i]) - std::log(sp.m()[i]) : kNegInf;
  }
  const double ln_n = log_sum_exp(t);
  for (std::size_t i = 0; i < N; ++i) l[i] = t[i] - ln_n;
  return l;
}

Vec chart_exponents(const SpeciesSet& sp, double s) {
  Vec e(sp.N());
  for (std::size_t k = 0; k < sp.N(); ++k) e[k] = sp.m()[k] * (sp.g_p0()[k] - sp.law(k).g(s));
  return e;
}

Vec forward_chart(const SpeciesSet& sp, const ChartPoint& pt) {
  validate_chart_point(sp, pt);
  const std::size_t N = sp.N();
  const auto& m = sp.m();
  Vec la = log_number_fractions(sp, pt.w);
  const Vec ex = chart_exponents(sp, pt.s);
  for (std::size_t k = 0; k < N; ++k) la[k] += ex[k];
  const double t = chi_root_log(la, m);
  // ln x_k(X) = ln a_k + m_k t <= 0, so nothing below overflows
  Vec xk(N);
  double den = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    xk[k] = std::exp(la[k] + m[k] * t);
    den += sp.law(k).dg(pt.s) * m[k] * xk[k];
  }
  Vec X(N);
  for (std::size_t k = 0; k < N; ++k) X[k] = m[k] * xk[k] / den;
  return X;
}

ChartPoint inverse_chart(const SpeciesSet& sp, std::span<const double> rho) {
  require_interior(rho);
  const std::size_t N = sp.N();
  const auto& m = sp.m();
  ChartPoint pt;
  pt.s = pressure(sp, rho);
  Vec lb = log_number_fractions(sp, rho);
  const Vec ex = chart_exponents(sp, pt.s);
  for (std::size_t k = 0; k < N; ++k) lb[k] -= ex[k];
  const double t = chi_root_log(lb, m);
  Vec xw(N);
  double den = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    xw[k] = std::exp(lb[k] + m[k] * t);
    den += sp.vbar0()[k] * m[k] * xw[k];
  }
  pt.w.resize(N);
  for (std::size_t k = 0; k < N; ++k) pt.w[k] = m[k] * xw[k] / den;
  return pt;
}

void quotient_envelopes(const SpeciesSet& sp, double s, Vec& Fbar, Vec& Funder) {
  const std::size_t N = sp.N();
  const double mmin = sp.m_min(), mmax = sp.m_max();
  const auto& v0 = sp.vbar0();
  const Vec dg = sp.dg(s);
  const double vmax = *std::max_element(v0.begin(), v0.end());
  const double vmin = *std::min_element(v0.begin(), v0.end());
  const double gmax = *std::max_element(dg.begin(), dg.end());
  const double gmin = *std::min_element(dg.begin(), dg.end());
  const Vec ex = chart_exponents(sp, s);
  const double ex_min = *std::min_element(ex.begin(), ex.end());
  const double lse = log_sum_exp(ex);
  const double q = mmax / mmin;
  const double up = std::log(mmax * vmax / (mmin * gmin)) + q * std::max(0.0, -ex_min);
  const double down = std::log(mmin * vmin / (mmax * gmax)) + q * std::min(0.0, -lse);
  Fbar.resize(N);
  Funder.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    Fbar[k] = std::exp(up + ex[k]);
    Funder[k] = std::exp(down + ex[k]);
  }
}

Quotients quotients(const SpeciesSet& sp, const ChartPoint& pt) {
  Quotients q;
  const Vec X = forward_chart(sp, pt);
  q.F.resize(sp.N());
  for (std::size_t k = 0; k < sp.N(); ++k) q.F[k] = X[k] / pt.w[k];
  quotient_envelopes(sp, pt.s, q.Fbar, q.Funder);
  return q;
}

Vec quotients_from_composition(const SpeciesSet& sp, double s, std::span<const double> x) {
  const std::size_t N = sp.N();
  const auto& m = sp.m();
  const Vec ex = chart_exponents(sp, s);
  Vec la(N);
  for (std::size_t j = 0; j < N; ++j) la[j] = (x[j] > 0 ? std::log(x[j]) : kNegInf) - ex[j];
  const double t = chi_root_log(la, m);
  Vec num(N);
  double G = 0.0;
  for (std::size_t l = 0; l < N; ++l) {
    num[l] = std::log(sp.vbar0()[l] * m[l]) + la[l] + m[l] * t;
    G += sp.law(l).dg(s) * m[l] * x[l];
  }
  const double head = log_sum_exp(num) - std::log(G);
  Vec F(N);
  for (std::size_t i = 0; i < N; ++i) F[i] = std::exp(head + ex[i] - m[i] * t);
  return F;
}

Vec chart_velocity(const SpeciesSet& sp, std::span<const double> X, double s) {
  const ThermoPoint tp = evaluate_at(sp, X, s);
  Vec u = kernel_direction(sp, X, tp);
  const double tot = tp.fr.varrho;
  for (auto& c : u) c /= tot;
  return u;
}

double pressure_of_density(const SpeciesSet& sp, double varrho, std::span<const double> w) {
  if (!(varrho > 0)) throw Error(ErrorKind::NonpositiveDensity, "total density must be positive");
  ChartPoint pt{sp.p0(), Vec(w.begin(), w.end())};
  validate_chart_point(sp, pt);
  const double target = std::log(varrho);
  // ln(X(e^q, w) . 1) is increasing in q
  auto f = [&](double q) {
    pt.s = std::exp(q);
    return std::log(sum(forward_chart(sp, pt))) - target;
  };
  auto df = [&](double q) {
    pt.s = std::exp(q);
    const Vec X = forward_chart(sp, pt);
    const Vec v = chart_velocity(sp, X, pt.s);
    return pt.s * sum(v) / sum(X);
  };
  // start from the total-density bounds at p0 and expand
  const double q0 = std::log(sp.p0());
  double lo = q0 - 0.5, hi = q0 + 0.5, step = 1.0;
  while (f(lo) >= 0) {
    lo -= step;
    step *= 2;
    if (step > 1e4) throw Error(ErrorKind::NoConvergence, "pressure_of_density bracket failed");
  }
  step = 1.0;
  while (f(hi) <= 0) {
    hi += step;
    step *= 2;
    if (step > 1e4) throw Error(ErrorKind::NoConvergence, "pressure_of_density bracket failed");
  }
  RootProblem pr;
  pr.f = f;
  pr.df = df;
  pr.bracket_lo = lo;
  pr.bracket_hi = hi;
  pr.tol_abs = 1e-13;
  return std::exp(solve_bracketed(pr));
}

Vec reduced_potential(const SpeciesSet& sp, std::span<const double> w) {
  require_interior(w);
  const Vec lx = log_number_fractions(sp, w);
  Vec mu(sp.N());
  for (std::size_t i = 0; i < sp.N(); ++i) mu[i] = sp.g_p0()[i] + lx[i] / sp.m()[i];
  return mu;
}

std::vector<Vec> s0_tangents(const SpeciesSet& sp) {
  const std::size_t N = sp.N();
  const auto& v = sp.vbar0();
  const double nv = std::sqrt(dot(v, v));
  std::vector<Vec> taus(N, Vec(N));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) taus[i][j] = (i == j ? 1.0 : 0.0) - (v[i] / nv) * (v[j] / nv);
  return taus;
}

}  // namespace msmix

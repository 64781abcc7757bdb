#include "msmix/thermo.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

namespace msmix {

// ---------------------------------------------------------------- GibbsLaw

GibbsLaw GibbsLaw::log_law(double g0, double vbar0, double p0) {
  if (!(vbar0 > 0) || !(p0 > 0) || !std::isfinite(g0))
    throw Error(ErrorKind::InvalidArgument, "log law needs vbar0 > 0, p0 > 0, finite g0");
  GibbsLaw law;
  law.kind_ = LawKind::Log;
  law.g0_ = g0;
  law.vbar0_ = vbar0;
  law.p0_ = p0;
  law.cbar_ = p0 * vbar0;
  law.M0_ = std::numeric_limits<double>::infinity();
  law.M1_ = std::numeric_limits<double>::infinity();
  return law;
}

GibbsLaw GibbsLaw::blended_law(double vbar0, double p0, double alpha, double M0, double M1) {
  if (!(vbar0 > 0) || !(p0 > 0))
    throw Error(ErrorKind::InvalidArgument, "blended law needs vbar0 > 0 and p0 > 0");
  if (!(alpha > 1)) throw Error(ErrorKind::InvalidArgument, "blended law needs alpha > 1");
  if (!(M0 > 0) || !(M1 > M0)) throw Error(ErrorKind::InvalidArgument, "blended law needs 0 < M0 < M1");
  GibbsLaw law;
  law.kind_ = LawKind::Blended;
  law.vbar0_ = vbar0;
  law.p0_ = p0;
  law.alpha_ = alpha;
  law.M0_ = M0;
  law.M1_ = M1;
  law.t0_ = std::log(M0);
  law.t1_ = std::log(M1);
  law.s1_ = 1.0 / alpha - 1.0;
  const double T = law.t1_ - law.t0_;
  law.kappa_ = (law.s1_ + 1.0) / T;
  // shift so that g'(p0) = vbar0
  law.L0_ = 0.0;
  law.L1_ = -T + 0.5 * law.kappa_ * T * T;
  law.L0_ = std::log(vbar0) - law.ell(std::log(p0));
  law.L1_ = law.L0_ - T + 0.5 * law.kappa_ * T * T;
  law.cbar_ = std::exp(law.L0_ + law.t0_);
  law.g_M1_ = alpha * std::exp(law.L1_ + law.t1_);
  law.g_M0_ = law.g_M1_ - law.blend_integral(law.t0_);
  law.g0_ = law.g(p0);
  return law;
}

double GibbsLaw::ell(double t) const {
  if (t <= t0_) return L0_ - (t - t0_);
  if (t >= t1_) return L1_ + s1_ * (t - t1_);
  const double u = t - t0_;
  return L0_ - u + 0.5 * kappa_ * u * u;
}

double GibbsLaw::ell_slope(double t) const {
  if (t <= t0_) return -1.0;
  if (t >= t1_) return s1_;
  return -1.0 + kappa_ * (t - t0_);
}

double GibbsLaw::blend_integral(double t) const {
  // l(u) + u = L0 + t0 + kappa/2 (u - t0)^2 on the blend interval
  if (t >= t1_) return 0.0;
  const double base = L0_ + t0_;
  auto f = [&](double u) {
    const double d = u - t0_;
    return std::exp(base + 0.5 * kappa_ * d * d);
  };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, t, t1_, 3, 1e-15, &err);
}

double GibbsLaw::g(double p) const {
  if (kind_ == LawKind::Log) return g0_ + cbar_ * std::log(p / p0_);
  const double t = std::log(p);
  if (t >= t1_) return alpha_ * std::exp(ell(t) + t);
  if (t <= t0_) return g_M0_ + cbar_ * (t - t0_);
  return g_M1_ - blend_integral(t);
}

double GibbsLaw::log_dg(double p) const {
  if (kind_ == LawKind::Log) return std::log(cbar_) - std::log(p);
  return ell(std::log(p));
}

double GibbsLaw::dg(double p) const {
  if (kind_ == LawKind::Log) return cbar_ / p;
  return std::exp(ell(std::log(p)));
}

double GibbsLaw::log_dg_slope(double p) const {
  if (kind_ == LawKind::Log) return -1.0;
  return ell_slope(std::log(p));
}

double GibbsLaw::d2g(double p) const { return dg(p) * log_dg_slope(p) / p; }

// -------------------------------------------------------------- SpeciesSet

SpeciesSet::SpeciesSet(std::vector<double> masses, std::vector<GibbsLaw> laws, double p0)
    : m_(std::move(masses)), laws_(std::move(laws)), p0_(p0) {
  // N = 1 is accepted so that scalar identities can be exercised
  if (m_.empty() || m_.size() != laws_.size())
    throw Error(ErrorKind::InvalidArgument, "species set needs matching, nonempty masses and laws");
  if (!(p0_ > 0)) throw Error(ErrorKind::InvalidArgument, "p0 must be positive");
  for (double mi : m_)
    if (!(mi > 0) || !std::isfinite(mi)) throw Error(ErrorKind::InvalidArgument, "masses must be positive");
  for (const auto& law : laws_) {
    const double v = law.dg(p0_);
    if (!(v > 0)) throw Error(ErrorKind::InvalidArgument, "g'(p0) must be positive");
    vbar0_.push_back(v);
    g_p0_.push_back(law.g(p0_));
  }
}

double SpeciesSet::m_min() const { return *std::min_element(m_.begin(), m_.end()); }
double SpeciesSet::m_max() const { return *std::max_element(m_.begin(), m_.end()); }

double SpeciesSet::beta() const {
  double b = std::numeric_limits<double>::infinity();
  for (const auto& law : laws_) {
    if (law.kind() != LawKind::Blended) return std::numeric_limits<double>::quiet_NaN();
    b = std::min(b, law.alpha());
  }
  return b;
}

Vec SpeciesSet::g(double p) const {
  Vec r(N());
  for (std::size_t i = 0; i < N(); ++i) r[i] = laws_[i].g(p);
  return r;
}

Vec SpeciesSet::dg(double p) const {
  Vec r(N());
  for (std::size_t i = 0; i < N(); ++i) r[i] = laws_[i].dg(p);
  return r;
}

Vec SpeciesSet::d2g(double p) const {
  Vec r(N());
  for (std::size_t i = 0; i < N(); ++i) r[i] = laws_[i].d2g(p);
  return r;
}

// ------------------------------------------------------------ state maps

Fractions fractions(const SpeciesSet& sp, std::span<const double> rho) {
  Fractions f;
  const std::size_t N = sp.N();
  if (rho.size() != N) throw Error(ErrorKind::InvalidArgument, "density vector has wrong length");
  f.varrho = 0.0;
  f.n = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    if (rho[i] < 0 || std::isnan(rho[i]))
      throw Error(ErrorKind::NonpositiveDensity, "negative partial density");
    f.varrho += rho[i];
    f.n += rho[i] / sp.m()[i];
  }
  if (!(f.varrho > 0)) throw Error(ErrorKind::ZeroTotalDensity, "total density is zero");
  f.y.resize(N);
  f.x.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    f.y[i] = rho[i] / f.varrho;
    f.x[i] = rho[i] / (sp.m()[i] * f.n);
  }
  return f;
}

void require_interior(std::span<const double> rho) {
  for (double r : rho)
    if (!(r > 0) || !std::isfinite(r))
      throw Error(ErrorKind::NonpositiveDensity, "state is not in the open positive cone");
}

double pressure(const SpeciesSet& sp, std::span<const double> rho, std::optional<double> hint) {
  const std::size_t N = sp.N();
  if (rho.size() != N) throw Error(ErrorKind::InvalidArgument, "density vector has wrong length");
  Vec lr(N);
  double vol = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < N; ++i) {
    if (rho[i] < 0 || std::isnan(rho[i])) throw Error(ErrorKind::NonpositiveDensity, "negative partial density");
    lr[i] = rho[i] > 0 ? std::log(rho[i]) : -std::numeric_limits<double>::infinity();
    any = any || rho[i] > 0;
    vol += sp.vbar0()[i] * rho[i];
  }
  if (!any) throw Error(ErrorKind::ZeroTotalDensity, "total density is zero");

  // ln V(e^q) is convex and decreasing in q
  Vec terms(N);
  auto lnV = [&](double q) {
    const double p = std::exp(q);
    for (std::size_t i = 0; i < N; ++i) terms[i] = sp.law(i).log_dg(p) + lr[i];
    return log_sum_exp(terms);
  };
  auto dlnV = [&](double q) {
    const double p = std::exp(q);
    const double l = lnV(q);
    double d = 0.0;
    for (std::size_t i = 0; i < N; ++i)
      if (rho[i] > 0) d += std::exp(terms[i] - l) * sp.law(i).log_dg_slope(p);
    return d;
  };

  const double q0 = hint ? std::log(*hint) : std::log(sp.p0() * vol);
  double lo = q0 - 0.5, hi = q0 + 0.5, w = 1.0;
  while (lnV(lo) <= 0) {
    lo -= w;
    w *= 2;
    if (w > 1e4) throw Error(ErrorKind::NoConvergence, "pressure bracket expansion failed");
  }
  w = 1.0;
  while (lnV(hi) >= 0) {
    hi += w;
    w *= 2;
    if (w > 1e4) throw Error(ErrorKind::NoConvergence, "pressure bracket expansion failed");
  }
  RootProblem pr;
  pr.f = lnV;
  pr.df = dlnV;
  pr.bracket_lo = lo;
  pr.bracket_hi = hi;
  pr.tol_abs = 1e-14;
  pr.guess = q0;
  return std::exp(solve_bracketed(pr));
}

ThermoPoint evaluate(const SpeciesSet& sp, std::span<const double> rho, std::optional<double> hint) {
  return evaluate_at(sp, rho, pressure(sp, rho, hint));
}

ThermoPoint evaluate_at(const SpeciesSet& sp, std::span<const double> rho, double p) {
  ThermoPoint tp;
  tp.fr = fractions(sp, rho);
  tp.p = p;
  const std::size_t N = sp.N();
  tp.g.resize(N);
  tp.dg.resize(N);
  tp.d2g.resize(N);
  tp.Vp = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const auto& law = sp.law(i);
    tp.g[i] = law.g(tp.p);
    tp.dg[i] = law.dg(tp.p);
    tp.d2g[i] = tp.dg[i] * law.log_dg_slope(tp.p) / tp.p;
    tp.Vp += tp.d2g[i] * rho[i];
  }
  return tp;
}

Vec pressure_gradient(const ThermoPoint& tp) {
  Vec r(tp.dg.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = -tp.dg[i] / tp.Vp;
  return r;
}

Vec chem_potentials(const SpeciesSet& sp, const ThermoPoint& tp) {
  Vec mu(sp.N());
  for (std::size_t i = 0; i < sp.N(); ++i) mu[i] = tp.g[i] + std::log(tp.fr.x[i]) / sp.m()[i];
  return mu;
}

double free_energy(const SpeciesSet& sp, std::span<const double> rho, const ThermoPoint& tp) {
  double h = -tp.p;
  for (std::size_t i = 0; i < sp.N(); ++i)
    if (rho[i] > 0) h += rho[i] * (tp.g[i] + std::log(tp.fr.x[i]) / sp.m()[i]);
  return h;
}

Matrix hessian(const SpeciesSet& sp, std::span<const double> rho, const ThermoPoint& tp) {
  const std::size_t N = sp.N();
  const auto& m = sp.m();
  Matrix H(N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double v = -1.0 / (m[i] * m[j] * tp.fr.n) - tp.dg[i] * tp.dg[j] / tp.Vp;
      if (i == j) v += 1.0 / (m[i] * rho[i]);
      H(i, j) = H(j, i) = v;
    }
  return H;
}

Matrix hessian_inverse(const SpeciesSet& sp, std::span<const double> rho, const ThermoPoint& tp) {
  const std::size_t N = sp.N();
  const auto& m = sp.m();
  double Lambda = -tp.Vp;
  for (std::size_t k = 0; k < N; ++k) Lambda += tp.dg[k] * tp.dg[k] * rho[k] * m[k];
  Matrix Hi(N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double v = -(m[i] * rho[i] * tp.dg[i] * rho[j] + m[j] * rho[j] * tp.dg[j] * rho[i]) +
                 Lambda * rho[i] * rho[j];
      if (i == j) v += m[i] * rho[i];
      Hi(i, j) = Hi(j, i) = v;
    }
  return Hi;
}

Vec kernel_direction(const SpeciesSet& sp, std::span<const double> rho, const ThermoPoint& tp) {
  const std::size_t N = sp.N();
  const auto& m = sp.m();
  const double vr = tp.fr.varrho;
  double a = -vr * tp.Vp;
  for (std::size_t j = 0; j < N; ++j) a += tp.dg[j] * (vr * tp.dg[j] - 1.0) * rho[j] * m[j];
  Vec u(N);
  for (std::size_t i = 0; i < N; ++i) u[i] = rho[i] * (m[i] * (1.0 - vr * tp.dg[i]) + a);
  return u;
}

Vec pressure_gradient(const SpeciesSet& sp, std::span<const double> rho) {
  require_interior(rho);
  return pressure_gradient(evaluate(sp, rho));
}

Vec chem_potentials(const SpeciesSet& sp, std::span<const double> rho) {
  require_interior(rho);
  return chem_potentials(sp, evaluate(sp, rho));
}

double free_energy(const SpeciesSet& sp, std::span<const double> rho) {
  require_interior(rho);
  return free_energy(sp, rho, evaluate(sp, rho));
}

Matrix hessian(const SpeciesSet& sp, std::span<const double> rho) {
  require_interior(rho);
  return hessian(sp, rho, evaluate(sp, rho));
}

Matrix hessian_inverse(const SpeciesSet& sp, std::span<const double> rho) {
  require_interior(rho);
  return hessian_inverse(sp, rho, evaluate(sp, rho));
}

Vec kernel_direction(const SpeciesSet& sp, std::span<const double> rho) {
  require_interior(rho);
  return kernel_direction(sp, rho, evaluate(sp, rho));
}

// ------------------------------------------------------------- dual state

namespace {

// Starting point: with x_i = exp(m_i (mu_i - g_i(p))) the constraint sum x = 1
// is a scalar equation in p; the density then follows from V(p, rho) = 1.
Vec dual_initial(const SpeciesSet& sp, std::span<const double> mu) {
  const std::size_t N = sp.N();
  const auto& m = sp.m();
  Vec a(N);
  auto f = [&](double q) {
    const double p = std::exp(q);
    for (std::size_t i = 0; i < N; ++i) a[i] = m[i] * (mu[i] - sp.law(i).g(p));
    return log_sum_exp(a);
  };
  auto df = [&](double q) {
    const double p = std::exp(q);
    const double l = f(q);
    double d = 0.0;
    for (std::size_t i = 0; i < N; ++i) d -= std::exp(a[i] - l) * m[i] * sp.law(i).dg(p) * p;
    return d;
  };
  const double q0 = std::log(sp.p0());
  double lo = q0 - 0.5, hi = q0 + 0.5, w = 1.0;
  while (f(lo) <= 0) {
    lo -= w;
    w *= 2;
    if (w > 1e4) throw Error(ErrorKind::NoConvergence, "dual_state bracket expansion failed");
  }
  w = 1.0;
  while (f(hi) >= 0) {
    hi += w;
    w *= 2;
    if (w > 1e4) throw Error(ErrorKind::NoConvergence, "dual_state bracket expansion failed");
  }
  RootProblem pr;
  pr.f = f;
  pr.df = df;
  pr.bracket_lo = lo;
  pr.bracket_hi = hi;
  pr.tol_abs = 1e-15;
  const double p = std::exp(solve_bracketed(pr));
  const double l = f(std::log(p));
  Vec x(N);
  double gm = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    x[i] = std::exp(a[i] - l);
    gm += sp.law(i).dg(p) * m[i] * x[i];
  }
  Vec rho(N);
  for (std::size_t i = 0; i < N; ++i) rho[i] = std::max(m[i] * x[i] / gm, 1e-300);
  return rho;
}

double residual_inf(const SpeciesSet& sp, std::span<const double> rho, std::span<const double> mu,
                    Vec& r) {
  Vec cur = chem_potentials(sp, evaluate(sp, rho));
  double e = 0.0;
  for (std::size_t i = 0; i < sp.N(); ++i) {
    r[i] = cur[i] - mu[i];
    e = std::max(e, std::abs(r[i]));
  }
  return e;
}

}  // namespace

DualResult dual_state_detailed(const SpeciesSet& sp, std::span<const double> mu) {
  const std::size_t N = sp.N();
  if (mu.size() != N) throw Error(ErrorKind::InvalidArgument, "potential vector has wrong length");
  DualResult out;
  out.rho = dual_initial(sp, mu);
  Vec r(N);
  double err = residual_inf(sp, out.rho, mu, r);
  const double target = 1e-13 * (1.0 + norm_inf(mu));
  for (int it = 0; it < 60 && err > target; ++it) {
    const ThermoPoint tp = evaluate(sp, out.rho);
    const Matrix Hi = hessian_inverse(sp, out.rho, tp);
    const Vec step = Hi * r;
    double merit = 0.0;
    for (double v : r) merit += v * v;
    bool improved = false;
    Vec trial(N), rt(N);
    for (double lam = 1.0; lam > 1e-10; lam *= 0.5) {
      for (std::size_t i = 0; i < N; ++i) trial[i] = std::max(out.rho[i] - lam * step[i], 1e-300);
      const double e = residual_inf(sp, trial, mu, rt);
      double mt = 0.0;
      for (double v : rt) mt += v * v;
      if (mt < merit) {
        out.rho = trial;
        r = rt;
        err = e;
        improved = true;
        break;
      }
    }
    ++out.newton_steps;
    if (!improved) break;
  }
  out.residual = err;
  if (err > 1e-9) throw ConvergenceError("dual_state residual above 1e-9", out.rho[0], err);
  return out;
}

Vec dual_state(const SpeciesSet& sp, std::span<const double> mu) {
  return dual_state_detailed(sp, mu).rho;
}

}  // namespace msmix

#include "msmix/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace msmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0 ? std::log(v) : kNegInf; }

void check_fractions(const SpeciesSet& sp, std::span<const double> x) {
  if (x.size() != sp.N()) throw Error(ErrorKind::InvalidArgument, "fraction vector has wrong length");
  for (double v : x)
    if (!(v >= 0)) throw Error(ErrorKind::InvalidArgument, "fractions must be nonnegative");
}

bool equal_masses(const SpeciesSet& sp) {
  return sp.m_min() == sp.m_max();
}

}  // namespace

Matrix sigma(const SpeciesSet& sp, double p, std::span<const double> x) {
  check_fractions(sp, x);
  const std::size_t N = sp.N();
  const auto& m = sp.m();
  const Vec ex = chart_exponents(sp, p);
  const Vec dg = sp.dg(p);
  Vec la(N);
  for (std::size_t j = 0; j < N; ++j) la[j] = safe_log(x[j]) - ex[j];
  const double t = chi_root_log(la, m);

  // everything in logs; at p -> 0 the exponentials run over hundreds of decades
  Vec a(N), b(N), c(N), d(N);
  for (std::size_t l = 0; l < N; ++l) {
    const double lmx = safe_log(m[l] * x[l]);
    a[l] = lmx;
    b[l] = lmx + std::log(dg[l]);
    c[l] = lmx + std::log(sp.vbar0()[l]) - ex[l] + m[l] * t;
    d[l] = lmx + ex[l] - m[l] * t;
  }
  const double ls0 = log_sum_exp(a) - log_sum_exp(b) + log_sum_exp(c) - log_sum_exp(d);
  Matrix s(N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k <= i; ++k)
      s(i, k) = s(k, i) = std::exp(ls0 + ex[i] + ex[k] - (m[i] + m[k]) * t);
  return s;
}

Matrix sigma_from_quotients(const SpeciesSet& sp, double p, std::span<const double> x) {
  check_fractions(sp, x);
  const std::size_t N = sp.N();
  const Vec F = quotients_from_composition(sp, p, x);
  double mx = 0, fmx = 0;
  for (std::size_t l = 0; l < N; ++l) {
    mx += sp.m()[l] * x[l];
    fmx += F[l] * sp.m()[l] * x[l];
  }
  Matrix s(N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k <= i; ++k) s(i, k) = s(k, i) = F[i] * F[k] / fmx * mx;
  return s;
}

Matrix sigma_equal_mass(const SpeciesSet& sp, double p, std::span<const double> x) {
  check_fractions(sp, x);
  if (!equal_masses(sp)) throw Error(ErrorKind::InvalidArgument, "closed form needs identical masses");
  const std::size_t N = sp.N();
  const Vec ex = chart_exponents(sp, p);
  const Vec dg = sp.dg(p);
  double num = 0, den1 = 0, den2 = 0;
  for (std::size_t l = 0; l < N; ++l) {
    num += sp.vbar0()[l] * x[l] * std::exp(-ex[l]);
    den1 += dg[l] * x[l];
    den2 += x[l] * std::exp(ex[l]);
  }
  Matrix s(N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k <= i; ++k)
      s(i, k) = s(k, i) = num / (den1 * den2) * std::exp(ex[i]) * std::exp(ex[k]);
  return s;
}

Matrix sigma_equal_mass_log(const SpeciesSet& sp, double p, std::span<const double> x) {
  check_fractions(sp, x);
  if (!equal_masses(sp)) throw Error(ErrorKind::InvalidArgument, "closed form needs identical masses");
  for (const auto& law : sp.laws())
    if (law.kind() != LawKind::Log) throw Error(ErrorKind::InvalidArgument, "closed form needs log laws");
  const std::size_t N = sp.N();
  const double m = sp.m()[0], r = p / sp.p0();
  Vec cb(N);
  for (std::size_t l = 0; l < N; ++l) cb[l] = sp.law(l).c1();
  double num = 0, den1 = 0, den2 = 0;
  for (std::size_t l = 0; l < N; ++l) {
    num += cb[l] * x[l] * std::pow(r, m * cb[l]);
    den1 += cb[l] * x[l];
    den2 += x[l] * std::pow(r, -m * cb[l]);
  }
  Matrix s(N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k <= i; ++k)
      s(i, k) = s(k, i) = num / (den1 * den2) * std::pow(r, 1.0 - m * (cb[i] + cb[k]));
  return s;
}

// ------------------------------------------------------------- friction

FrictionModel::FrictionModel(SpeciesSet sp, double f_c, double p1, double switch_width, bool constant)
    : sp_(std::move(sp)), fc_(f_c), p1_(p1), sw_(switch_width), constant_(constant) {
  if (!(fc_ > 0)) throw Error(ErrorKind::InvalidArgument, "f_c must be positive");
  if (!(p1_ > 0)) throw Error(ErrorKind::InvalidArgument, "p1 must be positive");
  if (!(sw_ > 0 && sw_ < 1)) throw Error(ErrorKind::InvalidArgument, "switch_width must lie in (0,1)");
  f2_ = f3_ = fc_;
  if (constant_) {
    // the diagnostic model pretends (B3) holds with the plateau value
    f0_ = f1_ = fc_;
    return;
  }
  // f / sigma = f_c (psi + (1 - psi)/sigma) only differs from f_c on the switch
  // interval; sample it over pressures and compositions (vertices, edge
  // midpoints, barycentre, random interior points)
  const std::size_t N = sp_.N();
  std::vector<Vec> xs;
  for (std::size_t i = 0; i < N; ++i) {
    Vec e(N, 0.0);
    e[i] = 1.0;
    xs.push_back(e);
    for (std::size_t j = i + 1; j < N; ++j) {
      Vec h(N, 0.0);
      h[i] = h[j] = 0.5;
      xs.push_back(h);
    }
  }
  xs.push_back(Vec(N, 1.0 / N));
  std::mt19937_64 rng(20240611);
  std::gamma_distribution<double> gam(1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    Vec v(N);
    double t = 0;
    for (auto& c : v) t += (c = gam(rng));
    for (auto& c : v) c /= t;
    xs.push_back(v);
  }
  double lo = 1.0, hi = 1.0;
  const double a = (1 - sw_) * p1_;
  for (int k = 0; k <= 64; ++k) {
    const double p = a + (p1_ - a) * k / 64.0;
    const double ps = psi(p);
    for (const auto& x : xs) {
      const Matrix s = sigma(sp_, p, x);
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
          if (i == j) continue;
          const double q = ps + (1 - ps) / s(i, j);
          lo = std::min(lo, q);
          hi = std::max(hi, q);
        }
    }
  }
  // sampling cannot see every composition; a 1% margin covers the gaps
  f0_ = fc_ * lo / 1.01;
  f1_ = fc_ * hi * 1.01;
}

double FrictionModel::psi(double p) const {
  const double a = (1 - sw_) * p1_;
  if (p <= a) return 1.0;
  if (p >= p1_) return 0.0;
  const double t = (p - a) / (p1_ - a);
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

Matrix friction(const FrictionModel& model, double p, std::span<const double> x) {
  const std::size_t N = model.species().N();
  const double ps = model.constant() ? 0.0 : model.psi(p);
  if (ps == 0.0) {
    check_fractions(model.species(), x);
    Matrix f(N, model.f_c());
    return f;
  }
  Matrix f = sigma(model.species(), p, x);
  for (auto i = 0u; i < N; ++i)
    for (auto j = 0u; j < N; ++j) f(i, j) = model.f_c() * (ps * f(i, j) + (1 - ps));
  return f;
}

// --------------------------------------------------------------- B and flux

Matrix build_B(const FrictionModel& model, std::span<const double> rho, const ThermoPoint& tp) {
  const std::size_t N = model.species().N();
  const Matrix f = friction(model, tp.p, tp.fr.x);
  const Vec& y = tp.fr.y;
  (void)rho;
  Matrix B(N);
  for (std::size_t i = 0; i < N; ++i) {
    double diag = 0;
    for (std::size_t k = 0; k < N; ++k) {
      if (k == i) continue;
      B(i, k) = -f(i, k) * y[i];
      diag += f(i, k) * y[k];
    }
    B(i, i) = diag;
  }
  return B;
}

Matrix build_B(const FrictionModel& model, std::span<const double> rho) {
  require_interior(rho);
  return build_B(model, rho, evaluate(model.species(), rho));
}

Matrix projector(std::span<const double> y) {
  const std::size_t N = y.size();
  Matrix P = Matrix::identity(N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) P(i, j) -= y[j];
  return P;
}

Field3 driving_forces(const SpeciesSet& sp, std::span<const double> rho, const Field3& grad_mu,
                      const Field3& b) {
  const std::size_t N = sp.N();
  if (grad_mu.size() != N || b.size() != N)
    throw Error(ErrorKind::InvalidArgument, "force fields have wrong length");
  const Fractions fr = fractions(sp, rho);
  Field3 d(N);
  for (int l = 0; l < 3; ++l) {
    double mean = 0;
    for (std::size_t k = 0; k < N; ++k) mean += fr.y[k] * (grad_mu[k][l] - b[k][l]);
    for (std::size_t i = 0; i < N; ++i) d[i][l] = rho[i] * ((grad_mu[i][l] - b[i][l]) - mean);
  }
  return d;
}

double bordering_alpha(const Matrix& B) {
  double tr = 0;
  for (std::size_t i = 0; i < B.size(); ++i) tr += B(i, i);
  return tr / B.size();
}

namespace {

Matrix bordered(const Matrix& B, std::span<const double> y, double alpha) {
  Matrix Ba = B;
  for (std::size_t i = 0; i < B.size(); ++i)
    for (std::size_t j = 0; j < B.size(); ++j) Ba(i, j) += alpha * y[i];
  return Ba;
}

// LU of the row-equilibrated bordered matrix. At low pressure the singular
// coefficients spread the rows of B over tens of decades, and a pivot test
// against the global maximum would call a merely badly scaled matrix singular.
struct BorderedLU {
  LU lu;
  Vec rs;  // row scales
  Vec solve(std::span<const double> rhs) const {
    Vec r(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] *= rs[i];
    return lu.solve(r);
  }
  Matrix inverse() const {
    Matrix inv = lu.inverse();
    for (std::size_t i = 0; i < inv.size(); ++i)
      for (std::size_t j = 0; j < inv.size(); ++j) inv(i, j) *= rs[j];
    return inv;
  }
};

BorderedLU factor_bordered(const Matrix& B, std::span<const double> y, double alpha) {
  Matrix A = bordered(B, y, alpha);
  const std::size_t N = A.size();
  Vec rs(N);
  for (std::size_t i = 0; i < N; ++i) {
    double m = 0;
    for (std::size_t j = 0; j < N; ++j) m = std::max(m, std::abs(A(i, j)));
    if (!(m > 0) || !std::isfinite(m))
      throw Error(ErrorKind::SingularBeyondKernel, "bordered Maxwell-Stefan matrix has a zero row");
    rs[i] = 1.0 / m;
    for (std::size_t j = 0; j < N; ++j) A(i, j) *= rs[i];
  }
  try {
    return BorderedLU{LU(A), rs};
  } catch (const Error& e) {
    throw Error(ErrorKind::SingularBeyondKernel, std::string("bordered Maxwell-Stefan matrix: ") + e.what());
  }
}

}  // namespace

Matrix drazin_inverse(const Matrix& B, std::span<const double> y, double alpha) {
  if (alpha == 0.0) alpha = bordering_alpha(B);
  Matrix D = factor_bordered(B, y, alpha).inverse();
  for (std::size_t i = 0; i < B.size(); ++i)
    for (std::size_t j = 0; j < B.size(); ++j) D(i, j) -= y[i] / alpha;
  return D;
}

Field3 solve_flux(const Matrix& B, const Field3& d, std::span<const double> y, double alpha) {
  const std::size_t N = B.size();
  if (d.size() != N || y.size() != N) throw Error(ErrorKind::InvalidArgument, "flux system size mismatch");
  for (int l = 0; l < 3; ++l) {
    double s = 0, mag = 0;
    for (std::size_t i = 0; i < N; ++i) s += d[i][l], mag = std::max(mag, std::abs(d[i][l]));
    if (std::abs(s) > 1e-10 * (1 + mag))
      throw Error(ErrorKind::InvalidArgument, "driving forces must have zero column sums");
  }
  if (alpha == 0.0) alpha = bordering_alpha(B);
  const BorderedLU lu = factor_bordered(B, y, alpha);
  Field3 J(N);
  Vec rhs(N);
  for (int l = 0; l < 3; ++l) {
    bool zero = true;
    for (std::size_t i = 0; i < N; ++i) {
      rhs[i] = -d[i][l];
      zero = zero && d[i][l] == 0.0;
    }
    if (zero) {
      for (std::size_t i = 0; i < N; ++i) J[i][l] = 0.0;
      continue;
    }
    // 1 . d = 0, so the bordering term drops out and this is B^D applied to -d
    const Vec z = lu.solve(rhs);
    for (std::size_t i = 0; i < N; ++i) J[i][l] = z[i];
  }
  return J;
}

Matrix onsager_matrix(const FrictionModel& model, std::span<const double> rho, const ThermoPoint& tp) {
  const Matrix B = build_B(model, rho, tp);
  const double alpha = bordering_alpha(B);
  const Matrix Bi = factor_bordered(B, tp.fr.y, alpha).inverse();
  const std::size_t N = B.size();
  const double vr = tp.fr.varrho;
  Matrix M(N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      M(i, j) = Bi(i, j) * rho[j] - vr / alpha * tp.fr.y[i] * tp.fr.y[j];
  return M;
}

Matrix onsager_matrix(const FrictionModel& model, std::span<const double> rho) {
  require_interior(rho);
  return onsager_matrix(model, rho, evaluate(model.species(), rho));
}

Matrix regularized_onsager(const Matrix& M, double sigma_reg) {
  if (!(sigma_reg >= 0)) throw Error(ErrorKind::InvalidArgument, "sigma_reg must be nonnegative");
  if (sigma_reg == 0.0) return M;
  return M + sigma_reg * Matrix::identity(M.size());
}

// -------------------------------------------------------------- dissipation

DissipationReport dissipation_and_bounds(const FrictionModel& model, std::span<const double> rho,
                                         const Field3& grad_mu, const Field3& b) {
  const SpeciesSet& sp = model.species();
  require_interior(rho);
  const std::size_t N = sp.N();
  const ThermoPoint tp = evaluate(sp, rho);
  const Vec& y = tp.fr.y;
  DissipationReport rep;
  rep.p = tp.p;
  rep.low = tp.p <= model.p1() * (1 + 1e-9);
  rep.normal = tp.p > model.p1() * (1 - 1e-9);

  const Matrix B = build_B(model, rho, tp);
  const Field3 d = driving_forces(sp, rho, grad_mu, b);
  rep.J = solve_flux(B, d, y);
  rep.zeta = 0;
  rep.J2 = 0;
  for (std::size_t i = 0; i < N; ++i)
    for (int l = 0; l < 3; ++l) {
      rep.zeta -= rep.J[i][l] * (grad_mu[i][l] - b[i][l]);
      rep.J2 += rep.J[i][l] * rep.J[i][l];
    }

  const Matrix M = onsager_matrix(model, rho, tp);
  rep.scale = M.norm_inf();
  const Vec w = inverse_chart(sp, rho).w;
  const Matrix P = projector(y);
  const Matrix PWP = P.transpose() * Matrix::diag(w) * P;
  const Matrix G = M - (1.0 / model.f1()) * PWP;
  rep.cert_low = min_symmetric_eigenvalue(0.5 * (G + G.transpose()));
  rep.cert_normal = 2.0 / model.f2() * tp.fr.varrho * rep.zeta - rep.J2;

  const auto& v0 = sp.vbar0();
  const double vmax = *std::max_element(v0.begin(), v0.end());
  const double vmin = *std::min_element(v0.begin(), v0.end());
  rep.flux_bound_rhs = 2.0 * N * vmax / model.f0() * rep.zeta;
  rep.flux_bound_rhs_derived = 2.0 * N / (model.f0() * vmin) * rep.zeta;

  // Jt = J - (J.F)/(y.F) y is orthogonal to F = rho/w; each species obeys
  // sum_l (Jt^i_l)^2 <= (2/f0) w_i zeta
  // F spans hundreds of decades near vacuum; scale it, and use
  // Jt_i = sum_{k != i} F_k (J_i y_k - y_i J_k) / (y . F), which drops the
  // cancelling k = i term
  Vec lF(N);
  for (std::size_t i = 0; i < N; ++i) lF[i] = std::log(rho[i]) - std::log(w[i]);
  const double lFmax = *std::max_element(lF.begin(), lF.end());
  Vec F(N);
  double yF = 0;
  for (std::size_t i = 0; i < N; ++i) {
    F[i] = std::exp(lF[i] - lFmax);
    yF += y[i] * F[i];
  }
  Vec jt2(N, 0.0);
  for (int l = 0; l < 3; ++l)
    for (std::size_t i = 0; i < N; ++i) {
      double v = 0;
      for (std::size_t k = 0; k < N; ++k)
        if (k != i) v += F[k] * (rep.J[i][l] * y[k] - y[i] * rep.J[k][l]);
      v /= yF;
      jt2[i] += v * v;
    }
  rep.dilute_ratio = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const double cap = 2.0 / model.f0() * w[i] * std::max(rep.zeta, 0.0);
    if (cap > 0)
      rep.dilute_ratio = std::max(rep.dilute_ratio, jt2[i] / cap);
    else if (jt2[i] > 0)
      rep.dilute_ratio = std::numeric_limits<double>::infinity();
  }
  return rep;
}

double gradient_chain_constant(const SpeciesSet& sp) {
  const auto& v0 = sp.vbar0();
  const double vmax = *std::max_element(v0.begin(), v0.end());
  const double vmin = *std::min_element(v0.begin(), v0.end());
  const double mmax = sp.m_max();
  const double cJ = 8.0 * mmax * (1.0 / (vmin * vmin) + vmax * vmax / (vmin * vmin * vmin * vmin));
  return 1.0 / (mmax * vmax * cJ);
}

}  // namespace msmix

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "msmix/numerics.hpp"

namespace msmix {

enum class LawKind { Log, Blended };

// Gibbs energy of one constituent as a function of pressure.
//
// Log:     g(p) = g0 + p0*vbar0*ln(p/p0).
// Blended: g'(p) = exp(l(ln p)) with l of slope -1 below M0, slope 1/alpha-1
//          above M1, and a quadratic joining piece (its derivative interpolates
//          the two slopes linearly, so l' < 0 throughout). The additive
//          constant makes g = alpha*p*g' on [M1, inf).
class GibbsLaw {
 public:
  static GibbsLaw log_law(double g0, double vbar0, double p0);
  static GibbsLaw blended_law(double vbar0, double p0, double alpha, double M0, double M1);

  LawKind kind() const { return kind_; }
  double g(double p) const;
  double dg(double p) const;
  double d2g(double p) const;
  double log_dg(double p) const;         // ln g'(p)
  double log_dg_slope(double p) const;   // d ln g' / d ln p, always negative

  double vbar0() const { return vbar0_; }
  double p0() const { return p0_; }
  double g0() const { return g0_; }
  double alpha() const { return alpha_; }
  double M0() const { return M0_; }
  double M1() const { return M1_; }
  // p*g'(p) lies in [c1, c2] on (0, M0]
  double c1() const { return cbar_; }
  double c2() const { return cbar_; }

 private:
  GibbsLaw() = default;
  double ell(double t) const;
  double ell_slope(double t) const;
  double blend_integral(double t) const;  // int_t^{ln M1} exp(l(u)+u) du

  LawKind kind_ = LawKind::Log;
  double g0_ = 0.0;
  double vbar0_ = 1.0;
  double p0_ = 1.0;
  double cbar_ = 1.0;
  double alpha_ = 0.0;
  double M0_ = 0.0;
  double M1_ = 0.0;
  // blended internals
  double t0_ = 0.0, t1_ = 0.0, L0_ = 0.0, L1_ = 0.0, s1_ = 0.0, kappa_ = 0.0;
  double g_M0_ = 0.0, g_M1_ = 0.0;
};

class SpeciesSet {
 public:
  SpeciesSet(std::vector<double> masses, std::vector<GibbsLaw> laws, double p0);

  std::size_t N() const { return m_.size(); }
  const std::vector<double>& m() const { return m_; }
  const std::vector<GibbsLaw>& laws() const { return laws_; }
  const GibbsLaw& law(std::size_t i) const { return laws_[i]; }
  double p0() const { return p0_; }
  const std::vector<double>& vbar0() const { return vbar0_; }
  const std::vector<double>& g_p0() const { return g_p0_; }   // g_i(p0)
  double m_min() const;
  double m_max() const;
  // beta of the high-pressure assumption: min alpha_i (NaN unless all laws are blended)
  double beta() const;

  Vec g(double p) const;
  Vec dg(double p) const;
  Vec d2g(double p) const;

 private:
  std::vector<double> m_;
  std::vector<GibbsLaw> laws_;
  double p0_;
  std::vector<double> vbar0_;
  std::vector<double> g_p0_;
};

struct Fractions {
  Vec y;
  Vec x;
  double n = 0.0;
  double varrho = 0.0;
};

Fractions fractions(const SpeciesSet& sp, std::span<const double> rho);

// Everything pointwise functions need, evaluated once at p = p_hat(rho).
struct ThermoPoint {
  double p = 0.0;
  Fractions fr;
  Vec g, dg, d2g;
  double Vp = 0.0;  // sum_i g_i''(p) rho_i < 0
};

void require_interior(std::span<const double> rho);

double pressure(const SpeciesSet& sp, std::span<const double> rho,
                std::optional<double> hint = std::nullopt);
ThermoPoint evaluate(const SpeciesSet& sp, std::span<const double> rho,
                     std::optional<double> hint = std::nullopt);
// Same, when the pressure is already known (e.g. rho = X(s, w) has p = s).
ThermoPoint evaluate_at(const SpeciesSet& sp, std::span<const double> rho, double p);

Vec pressure_gradient(const SpeciesSet& sp, std::span<const double> rho);
Vec chem_potentials(const SpeciesSet& sp, std::span<const double> rho);
double free_energy(const SpeciesSet& sp, std::span<const double> rho);
Matrix hessian(const SpeciesSet& sp, std::span<const double> rho);
Matrix hessian_inverse(const SpeciesSet& sp, std::span<const double> rho);
Vec kernel_direction(const SpeciesSet& sp, std::span<const double> rho);

Vec pressure_gradient(const ThermoPoint& tp);
Vec chem_potentials(const SpeciesSet& sp, const ThermoPoint& tp);
double free_energy(const SpeciesSet& sp, std::span<const double> rho, const ThermoPoint& tp);
Matrix hessian(const SpeciesSet& sp, std::span<const double> rho, const ThermoPoint& tp);
Matrix hessian_inverse(const SpeciesSet& sp, std::span<const double> rho, const ThermoPoint& tp);
Vec kernel_direction(const SpeciesSet& sp, std::span<const double> rho, const ThermoPoint& tp);

struct DualResult {
  Vec rho;
  double residual = 0.0;  // ||grad h(rho) - mu||_inf
  int newton_steps = 0;
};

// rho with grad h(rho) = mu. Throws ConvergenceError if the residual
// cannot be pushed below 1e-9.
DualResult dual_state_detailed(const SpeciesSet& sp, std::span<const double> mu);
Vec dual_state(const SpeciesSet& sp, std::span<const double> mu);

}  // namespace msmix

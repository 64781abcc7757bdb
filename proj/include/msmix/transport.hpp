#pragma once

#include <array>
#include <span>
#include <vector>

#include "msmix/chart.hpp"
#include "msmix/thermo.hpp"

namespace msmix {

// N rows, one 3-vector per species (gradients, forces, fluxes).
using Field3 = std::vector<std::array<double, 3>>;

// Singular coefficients of the low-pressure friction assumption, written
// through chi_hat(p, x) (root of sum_j chi^{m_j} x_j e^{-m_j(g_j(p0)-g_j(p))} = 1).
// Zero fractions are allowed.
Matrix sigma(const SpeciesSet& sp, double p, std::span<const double> x);
// Same matrix written through the quotients F_hat(p, x).
Matrix sigma_from_quotients(const SpeciesSet& sp, double p, std::span<const double> x);
// Closed forms for identical masses (general laws, and log laws).
Matrix sigma_equal_mass(const SpeciesSet& sp, double p, std::span<const double> x);
Matrix sigma_equal_mass_log(const SpeciesSet& sp, double p, std::span<const double> x);

// f_ik = f_c [psi(p) sigma_ik + (1 - psi(p))], psi a quintic smoothstep that is
// 1 below (1 - switch_width) p1 and 0 above p1. In constant mode f_ik = f_c
// everywhere (deliberately violates the low-pressure assumption).
class FrictionModel {
 public:
  FrictionModel(SpeciesSet sp, double f_c, double p1, double switch_width, bool constant = false);

  const SpeciesSet& species() const { return sp_; }
  double f_c() const { return fc_; }
  double p1() const { return p1_; }
  double switch_width() const { return sw_; }
  bool constant() const { return constant_; }
  double psi(double p) const;

  // f0 sigma <= f <= f1 sigma below p1; f2 <= f <= f3 above
  double f0() const { return f0_; }
  double f1() const { return f1_; }
  double f2() const { return f2_; }
  double f3() const { return f3_; }

 private:
  SpeciesSet sp_;
  double fc_, p1_, sw_;
  bool constant_;
  double f0_ = 0, f1_ = 0, f2_ = 0, f3_ = 0;
};

Matrix friction(const FrictionModel& model, double p, std::span<const double> x);

// b_ik = -f_ik y_i (i != k), b_ii = sum_{j != i} f_ij y_j
Matrix build_B(const FrictionModel& model, std::span<const double> rho, const ThermoPoint& tp);
Matrix build_B(const FrictionModel& model, std::span<const double> rho);

// P(y) = I - 1 (x) y
Matrix projector(std::span<const double> y);

// d^i = rho_i sum_k (delta_ik - y_k)(grad mu_k - b^k)
Field3 driving_forces(const SpeciesSet& sp, std::span<const double> rho, const Field3& grad_mu,
                      const Field3& b);

// alpha = 0 selects trace(B)/N
double bordering_alpha(const Matrix& B);
Matrix drazin_inverse(const Matrix& B, std::span<const double> y, double alpha = 0.0);
// B J = -d with zero column sums, through the bordered matrix B + alpha y (x) 1.
Field3 solve_flux(const Matrix& B, const Field3& d, std::span<const double> y, double alpha = 0.0);

// M = B^D R
Matrix onsager_matrix(const FrictionModel& model, std::span<const double> rho, const ThermoPoint& tp);
Matrix onsager_matrix(const FrictionModel& model, std::span<const double> rho);
Matrix regularized_onsager(const Matrix& M, double sigma_reg);

struct DissipationReport {
  Field3 J;
  double zeta = 0.0;
  double p = 0.0;
  bool low = false;      // p <= p1 (+ 1e-9 relative)
  bool normal = false;   // p > p1 (- 1e-9 relative)
  double scale = 0.0;    // ||B^D R||_inf
  double cert_low = 0.0;     // lambda_min(B^D R - P^T W P / f1)
  double cert_normal = 0.0;  // (2/f2)|rho|_1 zeta - |J|^2
  double J2 = 0.0;           // |J|^2 (Frobenius)
  double flux_bound_rhs = 0.0;   // (2 N |vbar0|_inf / f0) zeta, as printed
  double flux_bound_rhs_derived = 0.0;  // (2 N / (f0 min vbar0)) zeta, from the proof's own steps
  double dilute_ratio = 0.0;  // max_i sum_l (Jt^i_l)^2 / ((2/f0) w_i zeta)
};

DissipationReport dissipation_and_bounds(const FrictionModel& model, std::span<const double> rho,
                                         const Field3& grad_mu, const Field3& b);

// c2 of zeta >= d0 c2 |grad w|^2: 1/(max m max vbar0 c_J), with
// |grad w|^2 <= c_J |grad a|^2, a_i = sqrt(x_i(w)/m_i).
double gradient_chain_constant(const SpeciesSet& sp);

}  // namespace msmix

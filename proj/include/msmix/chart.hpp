#pragma once

#include <functional>
#include <span>

#include "msmix/thermo.hpp"

namespace msmix {

// (s, w): pressure coordinate plus a state on S0 = {v0 . w = 1}.
struct ChartPoint {
  double s = 1.0;
  Vec w;
};

void validate_chart_point(const SpeciesSet& sp, const ChartPoint& pt);

// Positive root of sum_j a_j chi^{m_j} = 1.
double chi_root(std::span<const double> a, std::span<const double> m);
// Same with log inputs; returns ln chi. Entries of -inf (a_j = 0) are skipped.
double chi_root_log(std::span<const double> log_a, std::span<const double> m);

// Observer called after every root (log_a, m, ln chi); thread-local.
using ChiObserver = std::function<void(std::span<const double>, std::span<const double>, double)>;
void set_chi_observer(ChiObserver obs);

struct ChiBounds {
  double lo;        // min{1, 1/|a|_1}^{1/min m}
  double hi;        // max{1, 1/|a|_1}^{1/min m}
  double pow_lo;    // min{1, |a|_1^{-max m/min m}}, lower bound of every chi^{m_i}
  double pow_hi;    // max{1, |a|_1^{-max m/min m}}, upper bound of every chi^{m_i}
};
ChiBounds chi_bounds(std::span<const double> a, std::span<const double> m);

// ln of the number fractions of rho
Vec log_number_fractions(const SpeciesSet& sp, std::span<const double> rho);

// m_k (g_k(p0) - g_k(s))
Vec chart_exponents(const SpeciesSet& sp, double s);

Vec forward_chart(const SpeciesSet& sp, const ChartPoint& pt);
ChartPoint inverse_chart(const SpeciesSet& sp, std::span<const double> rho);

struct Quotients {
  Vec F;
  Vec Fbar;
  Vec Funder;
};
Quotients quotients(const SpeciesSet& sp, const ChartPoint& pt);
// Envelopes only; they depend on s alone.
void quotient_envelopes(const SpeciesSet& sp, double s, Vec& Fbar, Vec& Funder);

// F written through pressure and number fractions; equals rho_i / w_i at rho = X(s, w).
Vec quotients_from_composition(const SpeciesSet& sp, double s, std::span<const double> x);

// Right-hand side of the chart ODE, u(X) / (X . 1).
Vec chart_velocity(const SpeciesSet& sp, std::span<const double> X, double s);

// s with X(s, w) . 1 = varrho.
double pressure_of_density(const SpeciesSet& sp, double varrho, std::span<const double> w);

// grad h(w) = g(p0) + ln(x(w)) / m
Vec reduced_potential(const SpeciesSet& sp, std::span<const double> w);

// Tangent basis of S0: tau^i = e^i - nu_i nu, nu = v0 / |v0|.
std::vector<Vec> s0_tangents(const SpeciesSet& sp);

}  // namespace msmix

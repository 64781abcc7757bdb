#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "msmix/thermo.hpp"

namespace fx {

using msmix::GibbsLaw;
using msmix::SpeciesSet;

// two log-law species, p0 = 1, vbar0 = (1, 2)
inline SpeciesSet log2() {
  return SpeciesSet({1.0, 1.0}, {GibbsLaw::log_law(0, 1, 1), GibbsLaw::log_law(0, 2, 1)}, 1.0);
}

// three blended species with distinct masses and exponents
inline SpeciesSet blended3() {
  return SpeciesSet({1.0, 2.0, 3.5},
                    {GibbsLaw::blended_law(1.0, 1.0, 1.3, 0.1, 10.0),
                     GibbsLaw::blended_law(1.5, 1.0, 1.4, 0.05, 20.0),
                     GibbsLaw::blended_law(2.5, 1.0, 1.45, 0.2, 5.0)},
                    1.0);
}

// four log-law species with unequal masses and volumes
inline SpeciesSet log4() {
  return SpeciesSet({1.0, 4.0, 0.5, 2.0},
                    {GibbsLaw::log_law(0.3, 1.0, 1.0), GibbsLaw::log_law(-0.2, 3.0, 1.0),
                     GibbsLaw::log_law(0.0, 1.7, 1.0), GibbsLaw::log_law(1.0, 1.2, 1.0)},
                    1.0);
}

inline std::vector<SpeciesSet> all_sets() { return {log2(), blended3(), log4()}; }

inline std::vector<double> dirichlet(std::mt19937_64& rng, std::size_t n) {
  std::gamma_distribution<double> gam(1.0, 1.0);
  std::vector<double> y(n);
  double s = 0;
  for (auto& v : y) {
    v = std::max(gam(rng), 1e-12);
    s += v;
  }
  for (auto& v : y) v /= s;
  return y;
}

// Upper pressure factor (times p0) for chart sampling. Above about 100 p0 the
// blended set's heaviest constituent drops below the smallest normal double in
// X(s, w): the exponents m_k (g_k(p0) - g_k(s)) reach -1e5 at 1e6 p0.
inline double chart_hi(const SpeciesSet& sp) {
  for (const auto& law : sp.laws())
    if (law.kind() == msmix::LawKind::Blended) return 1e2;
  return 1e6;
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

// Density with mass fractions y whose pressure is s (bisection in ln of the
// total density; the pressure is increasing along rays).
inline std::vector<double> state_at_pressure(const SpeciesSet& sp, const std::vector<double>& y,
                                             double s) {
  auto at = [&](double lr) {
    std::vector<double> r(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) r[i] = std::exp(lr) * y[i];
    return r;
  };
  double lo = -5, hi = 5;
  while (msmix::pressure(sp, at(lo)) > s) lo -= 10;
  while (msmix::pressure(sp, at(hi)) < s) hi += 10;
  for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
    const double mid = 0.5 * (lo + hi);
    (msmix::pressure(sp, at(mid)) < s ? lo : hi) = mid;
  }
  return at(0.5 * (lo + hi));
}

inline std::vector<double> random_state(const SpeciesSet& sp, std::mt19937_64& rng,
                                        double plo = 1e-6, double phi = 1e6) {
  const double s = log_uniform(rng, plo * sp.p0(), phi * sp.p0());
  return state_at_pressure(sp, dirichlet(rng, sp.N()), s);
}

}  // namespace fx

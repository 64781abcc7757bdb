// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "msmix/chart.hpp"
#include "msmix/sim1d.hpp"
#include "msmix/transport.hpp"
#include "msmix/verify.hpp"
#include "oracles.hpp"

using namespace msmix;

namespace {

constexpr std::uint64_t kSeed = 20240611;
constexpr long kSamples = 10000;

struct Outcome {
  bool pass = true;
  std::string detail;

  // value must not exceed limit
  void le(const std::string& what, double value, double limit) {
    const bool ok = value <= limit;
    pass = pass && ok;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s%s %.3g%s%.3g", detail.empty() ? "" : "; ", what.c_str(), value,
                  ok ? " <= " : " > ", limit);
    detail += buf;
  }
  void ge(const std::string& what, double value, double limit) {
    const bool ok = value >= limit;
    pass = pass && ok;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s%s %.3g%s%.3g", detail.empty() ? "" : "; ", what.c_str(), value,
                  ok ? " >= " : " < ", limit);
    detail += buf;
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

const CheckResult& check(const VerifyReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c;
  throw std::runtime_error("no check " + name);
}

double constant(const VerifyReport& r, const std::string& name) {
  for (const auto& [k, v] : r.constants)
    if (k == name) return v;
  throw std::runtime_error("no constant " + name);
}

// worst residual of a harness check, with the sample count in the label
void harness(Outcome& o, const VerifyReport& r, const std::string& name, double tol) {
  const CheckResult& c = check(r, name);
  o.le(name + " [" + std::to_string(c.samples) + "]", c.worst, tol);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ------------------------------------------------------------------ 1

Outcome thermo_identities() {
  Outcome o;
  const VerifyReport r = run_verify("thermo", kSeed, kSamples);
  harness(o, r, "thermo.euler", 1e-10);
  harness(o, r, "thermo.hessian_kernel", 1e-8);
  harness(o, r, "thermo.hessian_inverse", 1e-8);
  harness(o, r, "thermo.log_pressure", 1e-12);

  // blended pressure against a bisection oracle on V(p, rho) = 1
  std::mt19937_64 rng(kSeed + 1);
  const SpeciesSet sp = fx::blended3();
  double worst = 0;
  for (int k = 0; k < 200; ++k) {
    const Vec rho = fx::random_state(sp, rng, 1e-6, 1e6);
    const double p = pressure(sp, rho);
    auto V = [&](double lp) {
      const Vec dg = sp.dg(std::exp(lp));
      double v = 0;
      for (std::size_t i = 0; i < sp.N(); ++i) v += rho[i] * dg[i];
      return v - 1;
    };
    const double lp = oracles::bisect(V, std::log(p) - 1, std::log(p) + 1, 1e-15);
    worst = std::max(worst, std::abs(lp - std::log(p)));
  }
  o.le("blended ln p vs bisection", worst, 1e-10);
  return o;
}

// ------------------------------------------------------------------ 2

Outcome chart_bijectivity() {
  Outcome o;
  const VerifyReport r = run_verify("chart", kSeed, kSamples);
  harness(o, r, "chart.round_trip", 1e-8);
  harness(o, r, "chart.pressure", 1e-10);
  harness(o, r, "chart.potential_invariance", 1e-9);
  return o;
}

// ------------------------------------------------------------------ 3

Outcome chart_analytics() {
  Outcome o;
  const VerifyReport r = run_verify("chart", kSeed + 2, kSamples);
  harness(o, r, "chart.density_envelope", 1e-12);
  // ratio of the finite-difference derivative to its envelope
  harness(o, r, "chart.s_derivative_envelope", 1.0);

  // every chi root seen while the chart runs below, checked against
  // max/min{1, 1/|a|_1}^{1/min m} in log form
  long calls = 0;
  double chi_worst = 0;
  set_chi_observer([&](std::span<const double> log_a, std::span<const double> m, double lchi) {
    double amax = -INFINITY;
    for (double la : log_a) amax = std::max(amax, la);
    double s = 0;
    for (double la : log_a)
      if (std::isfinite(la)) s += std::exp(la - amax);
    const double L = amax + std::log(s);
    const double mmin = *std::min_element(m.begin(), m.end());
    const double lo = std::min(0.0, -L / mmin), hi = std::max(0.0, -L / mmin);
    ++calls;
    chi_worst = std::max({chi_worst, lo - lchi, lchi - hi});
  });

  // RK4 of dX/d ln s = s u(X) / (X . 1) from w at s = p0
  std::mt19937_64 rng(kSeed + 3);
  double rk_worst = 0;
  int n_rk = 0;
  for (const auto& sp : fx::all_sets()) {
    const std::size_t N = sp.N();
    for (int k = 0; k < 34; ++k, ++n_rk) {
      const double s = fx::log_uniform(rng, 0.1 * sp.p0(), 10 * sp.p0());
      Vec w = fx::dirichlet(rng, N);
      double vw = 0;
      for (std::size_t i = 0; i < N; ++i) vw += sp.vbar0()[i] * w[i];
      for (auto& c : w) c /= vw;
      auto rhs = [&](double ls, const Vec& X) {
        Vec u = kernel_direction(sp, X);
        double tot = 0;
        for (double c : X) tot += c;
        for (auto& c : u) c *= std::exp(ls) / tot;
        return u;
      };
      // step exactly onto the C^1 points of the blended laws
      const double a = std::log(sp.p0()), b = std::log(s);
      std::vector<double> cuts{a}, kinks;
      for (const auto& law : sp.laws())
        if (law.kind() == LawKind::Blended) kinks.insert(kinks.end(), {std::log(law.M0()), std::log(law.M1())});
      std::sort(kinks.begin(), kinks.end());
      if (b < a) std::reverse(kinks.begin(), kinks.end());
      for (double c : kinks)
        if ((c - a) * (b - c) > 0) cuts.push_back(c);
      cuts.push_back(b);
      Vec X = w;
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c) X = oracles::rk4(rhs, cuts[c], cuts[c + 1], X, 1000);
      const Vec Xc = forward_chart(sp, {s, w});
      for (std::size_t i = 0; i < N; ++i) rk_worst = std::max(rk_worst, rel(X[i], Xc[i]));
    }
  }
  // more chi calls: inverse charts over the full pressure range
  for (const auto& sp : fx::all_sets())
    for (int k = 0; k < 500; ++k) inverse_chart(sp, fx::random_state(sp, rng, 1e-6, fx::chart_hi(sp)));
  set_chi_observer(nullptr);

  o.le("rk4 vs closed form [" + std::to_string(n_rk) + "]", rk_worst, 1e-7);
  o.le("chi bounds [" + std::to_string(calls) + " roots]", chi_worst, 1e-12);
  harness(o, r, "chart.chi_bounds", 1e-12);
  return o;
}

// ------------------------------------------------------------------ 4

Outcome maxwell_stefan() {
  Outcome o;
  const VerifyReport r = run_verify("transport", kSeed, kSamples);
  harness(o, r, "transport.kernel", 1e-12);
  harness(o, r, "transport.drazin", 1e-9);
  harness(o, r, "transport.flux_residual", 1e-9);
  harness(o, r, "transport.alpha_independence", 1e-10);

  // N = 2 by hand: B J = -d with J1 + J2 = 0 reduces to f12 J1 = -d1
  std::mt19937_64 rng(kSeed + 4);
  std::normal_distribution<double> nd;
  double worst = 0;
  for (const auto& sp : {fx::log2(), verify_set_log2()}) {
    const FrictionModel fm(sp, 2.0, 0.5 * sp.p0(), 0.2);
    for (int k = 0; k < 500; ++k) {
      const Vec rho = fx::random_state(sp, rng, 1e-6, 1e6);
      // exactly antisymmetric forces; forces from driving_forces sum to zero
      // only up to rounding, which the bordered solve passes on to J1 + J2
      Field3 d(2);
      for (int l = 0; l < 3; ++l) {
        d[0][l] = nd(rng) * rho[0];
        d[1][l] = -d[0][l];
      }
      const ThermoPoint tp = evaluate(sp, rho);
      const Field3 J = solve_flux(build_B(fm, rho, tp), d, tp.fr.y);
      const double f12 = friction(fm, tp.p, tp.fr.x)(0, 1);
      // normwise over the three directions
      double err = 0, scale = 1e-300;
      for (int l = 0; l < 3; ++l) {
        const double j1 = -d[0][l] / f12;
        scale = std::max(scale, std::abs(j1));
        err = std::max({err, std::abs(J[0][l] - j1), std::abs(J[1][l] + j1)});
      }
      worst = std::max(worst, err / scale);
    }
  }
  o.le("two-species hand solution", worst, 1e-12);
  return o;
}

// ------------------------------------------------------------------ 5

// identical masses, log laws g_i = g0_i + cbar_i ln(p/p0), written out by hand
double sigma_log_hand(const Vec& cbar, double m, double p, double p0, const Vec& x, int i, int k) {
  double num = 0, den1 = 0, den2 = 0;
  for (std::size_t l = 0; l < x.size(); ++l) {
    num += cbar[l] * x[l] * std::pow(p / p0, m * cbar[l]);
    den1 += cbar[l] * x[l];
    den2 += x[l] * std::pow(p0 / p, m * cbar[l]);
  }
  return num / (den1 * den2) * std::pow(p0 / p, m * (cbar[i] + cbar[k]) - 1.0);
}

Outcome robust_bounds() {
  Outcome o;
  // low and normal samples alternate: 2 x 10^4 gives 10^4 of each
  const VerifyReport r = run_verify("robust", kSeed, 2 * kSamples);
  harness(o, r, "robust.low_operator_bound", 1e-8);
  harness(o, r, "robust.low_flux_bound", 1e-8);
  harness(o, r, "robust.normal_flux_bound", 1e-8);
  const VerifyReport t = run_verify("transport", kSeed + 5, kSamples);
  harness(o, t, "transport.sigma_normalization", 1e-12);

  std::mt19937_64 rng(kSeed + 6);
  const double m = 1.7, p0 = 2.0;
  const Vec cbar{0.8 * p0, 1.3 * p0, 0.5 * p0};
  const SpeciesSet logs({m, m, m},
                        {GibbsLaw::log_law(0.1, 0.8, p0), GibbsLaw::log_law(-0.3, 1.3, p0),
                         GibbsLaw::log_law(0.0, 0.5, p0)},
                        p0);
  const SpeciesSet blend({m, m}, {GibbsLaw::blended_law(1.0, p0, 1.3, 0.1, 10.0),
                                  GibbsLaw::blended_law(1.4, p0, 1.45, 0.3, 30.0)},
                         p0);
  double eq = 0;
  for (int k = 0; k < 2000; ++k) {
    const double p = fx::log_uniform(rng, 1e-3 * p0, 10 * p0);
    const Vec x = fx::dirichlet(rng, 3);
    const Matrix a = sigma(logs, p, x);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) eq = std::max(eq, rel(a(i, j), sigma_log_hand(cbar, m, p, p0, x, i, j)));
    const Vec x2 = fx::dirichlet(rng, 2);
    const Matrix d = sigma(blend, p, x2), e = sigma_equal_mass(blend, p, x2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) eq = std::max(eq, rel(d(i, j), e(i, j)));
  }
  o.le("equal-mass reductions", eq, 1e-12);
  return o;
}

// ------------------------------------------------------------------ 6

Outcome growth() {
  Outcome o;
  const VerifyReport r = run_verify("growth", kSeed, kSamples);
  const double fitted = constant(r, "growth.exponent_fitted");
  const double expected = constant(r, "growth.exponent_expected");
  const double c0 = constant(r, "growth.c0"), c1 = constant(r, "growth.c1");
  o.le("exponent rel. error", std::abs(fitted - expected) / expected, 0.05);

  // fresh samples up to 10^6 x reference, drawn here, against the fitted pair
  const SpeciesSet sp = verify_set_growth();
  double vsum = 0;
  for (double v : sp.vbar0()) vsum += v;
  const double ref = sp.N() / vsum;
  std::mt19937_64 rng(kSeed + 7);
  double worst = 0;
  for (int k = 0; k < 5000; ++k) {
    const double lam = fx::log_uniform(rng, ref, 1e6 * ref);
    Vec rho = fx::dirichlet(rng, sp.N());
    for (auto& c : rho) c *= lam;
    const double h = free_energy(sp, rho);
    worst = std::max(worst, (c0 * std::pow(lam, expected) - c1 - h) / (1 + std::abs(h)));
  }
  o.le("max (c0|rho|^g - c1 - h)/(1+|h|)", worst, 0.0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "c0 %.3g, c1 %.3g", c0, c1);
  o.note(buf);
  return o;
}

// --------------------------------------------------------------- sim1d

SpeciesSet demo_species() {
  return SpeciesSet({1.0, 2.0}, {GibbsLaw::log_law(0, 1, 1), GibbsLaw::log_law(0, 1, 1)}, 1.0);
}

SimConfig demo_config(int n, double t_end, double sigma_reg) {
  SimConfig cfg(FrictionModel(demo_species(), 1.0, 0.5, 0.1));
  cfg.n_cells = n;
  cfg.t_end = t_end;
  cfg.sigma_reg = sigma_reg;
  cfg.eta_shear = 0.05;
  cfg.cfl = 0.4;
  return cfg;
}

Profiles step_profile() {
  return {[](double x) {
            const double s = 0.5 * (1 + std::tanh((x - 0.5) / 0.05));
            return Vec{0.8 - 0.6 * s, 0.2 + 0.6 * s};
          },
          [](double) { return 0.0; }};
}

double contrast(const FieldState& st) {
  double lo = 1, hi = 0;
  for (const auto& r : st.rho) {
    const double y = r[0] / (r[0] + r[1]);
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  return hi - lo;
}

// ------------------------------------------------------------------ 7

Outcome conservation_and_energy() {
  Outcome o;
  const SimConfig cfg = demo_config(128, 0.3, 1e-3);
  const double dx = cfg.grid().dx();
  FieldState st = initialize(cfg, step_profile());
  auto masses = [&](const FieldState& s) {
    Vec m(2, 0.0);
    for (const auto& r : s.rho)
      for (int i = 0; i < 2; ++i) m[i] += r[i] * dx;
    return m;
  };
  const Vec m0 = masses(st);
  const double c0 = contrast(st);
  const double E0 = st.ledger.E0, scale = std::abs(E0);
  double drift = 0, excess = -INFINITY, rise = -INFINITY;
  while (st.t < cfg.t_end * (1 - 1e-13)) {
    FieldState nx = step(cfg, st, cfg.t_end - st.t);
    const Vec m = masses(nx);
    for (int i = 0; i < 2; ++i) drift = std::max(drift, std::abs(m[i] - m0[i]) / m0[i]);
    const auto& L = nx.ledger;
    excess = std::max(excess, (L.free_energy + L.kinetic + L.dissipation_diffusive + L.dissipation_viscous - E0) / scale);
    rise = std::max(rise, (L.free_energy - st.ledger.free_energy) / scale);
    st = std::move(nx);
  }
  o.le("mass drift", drift, 1e-10);
  o.le("max (E + diss - E0)/|E0|", excess, 1e-4);
  o.le("max free-energy rise per step /|E0|", rise, 1e-6);
  o.ge("contrast decay", 1 - contrast(st) / c0, 0.8);
  o.note(std::to_string(st.steps) + " steps");
  return o;
}

// ------------------------------------------------------------------ 8

Outcome regularization_limit() {
  Outcome o;
  const std::vector<double> sig{1e-2, 1e-3, 1e-4};
  std::vector<FieldState> runs;
  for (double s : sig) {
    SimConfig cfg = demo_config(64, 0.1, s);
    runs.push_back(run(cfg, step_profile(), nullptr));
  }
  // least-squares slope of ln |jt| against ln sigma
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::string norms = "|jt|:";
  for (std::size_t k = 0; k < sig.size(); ++k) {
    const double x = std::log(sig[k]), y = 0.5 * std::log(runs[k].ledger.flux_tilde_sq);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    char buf[32];
    std::snprintf(buf, sizeof buf, " %.3g", std::exp(y));
    norms += buf;
  }
  const double n = sig.size();
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  o.le("|slope - 0.5|", std::abs(slope - 0.5), 0.15);
  o.note("slope " + std::to_string(slope));
  o.note(norms);
  // the upper bound |jt| <= C sqrt(sigma) itself: C needed at each sigma
  std::string cs = "|jt|/sqrt(sigma):";
  for (std::size_t k = 0; k < sig.size(); ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " %.3g", std::sqrt(runs[k].ledger.flux_tilde_sq / sig[k]));
    cs += buf;
  }
  o.note(cs);

  const double dx = 1.0 / 64;
  auto gap = [&](const FieldState& a, const FieldState& b) {
    double g = 0;
    for (std::size_t j = 0; j < a.rho.size(); ++j) {
      for (int i = 0; i < 2; ++i) g += std::abs(a.rho[j][i] - b.rho[j][i]) * dx;
      g += std::abs(a.v[j] - b.v[j]) * dx;
    }
    return g;
  };
  const double g1 = gap(runs[0], runs[1]), g2 = gap(runs[1], runs[2]);
  o.le("L1 gap ratio", g2 / g1, 0.6);
  return o;
}

// ------------------------------------------------------------------ 9

Outcome self_convergence() {
  Outcome o;
  const Profiles pr{[](double x) {
                      const double c = std::cos(std::numbers::pi * x);
                      return Vec{0.5 + 0.2 * c, 0.4 - 0.1 * c};
                    },
                    [](double) { return 0.0; }};
  const double t_end = 0.01;
  auto solve = [&](int n) { return run(demo_config(n, t_end, 1e-3), pr, nullptr); };
  const FieldState ref = solve(512);
  auto err = [&](int n) {
    const FieldState s = solve(n);
    const int r = 512 / n;
    double e = 0;
    for (int j = 0; j < n; ++j) {
      double v = 0;
      Vec avg(2, 0.0);
      for (int k = 0; k < r; ++k) {
        for (int i = 0; i < 2; ++i) avg[i] += ref.rho[j * r + k][i] / r;
        v += ref.v[j * r + k] / r;
      }
      for (int i = 0; i < 2; ++i) e += std::abs(s.rho[j][i] - avg[i]) / n;
      e += std::abs(s.v[j] - v) / n;
    }
    return e;
  };
  const double e64 = err(64), e128 = err(128);
  o.ge("e64/e128", e64 / e128, 1.7);
  char buf[96];
  std::snprintf(buf, sizeof buf, "e64 %.3g, e128 %.3g", e64, e128);
  o.note(buf);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> all{
      {1, "thermodynamic identities", thermo_identities},
      {2, "chart bijectivity", chart_bijectivity},
      {3, "chart analytics", chart_analytics},
      {4, "Maxwell-Stefan structure", maxwell_stefan},
      {5, "robust bounds", robust_bounds},
      {6, "growth", growth},
      {7, "conservation and energy", conservation_and_energy},
      {8, "regularization limit", regularization_limit},
      {9, "self-convergence", self_convergence},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d %s: %s (%s) [%.1f s]\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}

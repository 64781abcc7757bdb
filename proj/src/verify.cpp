#include "msmix/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "msmix/chart.hpp"
#include "msmix/config.hpp"
#include "msmix/transport.hpp"

namespace msmix {

SpeciesSet verify_set_log2() {
  return SpeciesSet({1.0, 1.0}, {GibbsLaw::log_law(0, 1, 1), GibbsLaw::log_law(0, 2, 1)}, 1.0);
}

SpeciesSet verify_set_log4() {
  return SpeciesSet({1.0, 4.0, 0.5, 2.0},
                    {GibbsLaw::log_law(0.3, 1.0, 1.0), GibbsLaw::log_law(-0.2, 3.0, 1.0),
                     GibbsLaw::log_law(0.0, 1.7, 1.0), GibbsLaw::log_law(1.0, 1.2, 1.0)},
                    1.0);
}

SpeciesSet verify_set_blended_wide() {
  return SpeciesSet({1.0, 1.5, 2.0},
                    {GibbsLaw::blended_law(1.0, 1.0, 1.3, 1e2, 1e8), GibbsLaw::blended_law(1.2, 1.0, 1.4, 1e2, 1e8),
                     GibbsLaw::blended_law(1.4, 1.0, 1.5, 1e2, 1e8)},
                    1.0);
}

SpeciesSet verify_set_growth() {
  return SpeciesSet({1.0, 2.0, 3.0},
                    {GibbsLaw::blended_law(1.0, 1.0, 1.4, 0.1, 10.0), GibbsLaw::blended_law(1.5, 1.0, 1.4, 0.1, 10.0),
                     GibbsLaw::blended_law(2.0, 1.0, 1.4, 0.1, 10.0)},
                    1.0);
}

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> s{"thermo", "chart", "transport", "robust", "growth"};
  return s;
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.gating || c.passed(); });
}

namespace {

constexpr double kSkip = std::numeric_limits<double>::quiet_NaN();

struct CheckSpec {
  std::string name;
  double tolerance;
};

// One sample: a residual per check (NaN when the check does not apply) and
// measured quantities that are reduced by max into reported constants.
struct SampleOut {
  Vec residual;
  Vec measure;
};

int thread_count(int requested) {
  if (requested > 0) return requested;
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MSMIX_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = n > 0 ? std::min(n, cap) : cap;
  }
  return std::max(n, 1);
}

template <class F>
std::vector<SampleOut> parallel_samples(long n, int threads, F&& fn) {
  std::vector<SampleOut> out(n);
  std::atomic<long> next{0};
  auto worker = [&] {
    for (long i = next++; i < n; i = next++) out[i] = fn(i);
  };
  const int t = static_cast<int>(std::min<long>(threads, std::max<long>(n, 1)));
  std::vector<std::thread> pool;
  for (int k = 1; k < t; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint32_t tag, long i) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag,
                    static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) >> 32)};
  return std::mt19937_64(seq);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

Vec dirichlet(std::mt19937_64& rng, std::size_t n) {
  std::gamma_distribution<double> gam(1.0, 1.0);
  Vec y(n);
  double s = 0;
  for (auto& v : y) {
    v = std::max(gam(rng), 1e-12);
    s += v;
  }
  for (auto& v : y) v /= s;
  return y;
}

Vec on_s0(const SpeciesSet& sp, Vec y) {
  const double v = dot(sp.vbar0(), y);
  for (auto& c : y) c /= v;
  return y;
}

Field3 normal_field(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> nd;
  Field3 f(n);
  for (auto& r : f)
    for (auto& c : r) c = nd(rng);
  return f;
}

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).max_abs(); }

void reduce(VerifyReport& rep, const std::string& suite, const std::vector<CheckSpec>& specs,
            const std::vector<std::string>& measures, const std::vector<SampleOut>& outs, bool gating) {
  for (std::size_t c = 0; c < specs.size(); ++c) {
    CheckResult r;
    r.name = suite + "." + specs[c].name;
    r.tolerance = specs[c].tolerance;
    r.gating = gating;
    for (const auto& o : outs) {
      const double v = o.residual[c];
      if (std::isnan(v)) continue;
      ++r.samples;
      r.worst = std::max(r.worst, v);
      if (!(v <= r.tolerance)) ++r.failures;
    }
    rep.checks.push_back(r);
  }
  for (std::size_t k = 0; k < measures.size(); ++k) {
    double m = 0;
    for (const auto& o : outs)
      if (!std::isnan(o.measure[k])) m = std::max(m, o.measure[k]);
    rep.constants.emplace_back(suite + "." + measures[k], m);
  }
}

std::vector<SpeciesSet> sampled_sets() {
  return {verify_set_log2(), verify_set_log4(), verify_set_blended_wide()};
}

// Density with mass fractions y and pressure s: Newton in ln of the total
// density along the ray, where ln p is increasing.
Vec state_at_pressure(const SpeciesSet& sp, const Vec& y, double s) {
  auto at = [&](double q) {
    Vec r(y);
    for (auto& c : r) c *= std::exp(q);
    return r;
  };
  double lo = -5, hi = 5;
  while (pressure(sp, at(lo)) > s) lo -= 10;
  while (pressure(sp, at(hi)) < s) hi += 10;
  RootProblem pr;
  pr.f = [&](double q) { return std::log(pressure(sp, at(q)) / s); };
  pr.df = [&](double q) {
    const Vec r = at(q);
    const ThermoPoint tp = evaluate(sp, r);
    return dot(pressure_gradient(tp), r) / tp.p;
  };
  pr.bracket_lo = lo;
  pr.bracket_hi = hi;
  pr.tol_abs = 1e-15;
  return at(solve_bracketed(pr));
}

Vec random_state(const SpeciesSet& sp, std::mt19937_64& rng, double lo, double hi) {
  const double s = log_uniform(rng, lo, hi);
  return state_at_pressure(sp, dirichlet(rng, sp.N()), s);
}

ChartPoint random_point(const SpeciesSet& sp, std::mt19937_64& rng, double lo, double hi) {
  return {log_uniform(rng, lo, hi), on_s0(sp, dirichlet(rng, sp.N()))};
}

// ------------------------------------------------------------------- thermo

void suite_thermo(VerifyReport& rep, std::uint64_t seed, long n, int threads) {
  const auto sets = sampled_sets();
  const std::vector<CheckSpec> specs{{"euler", 1e-10},        {"hessian_kernel", 1e-8}, {"hessian_inverse", 1e-8},
                                     {"log_pressure", 1e-12}, {"gibbs_duhem", 1e-10},   {"kernel_positive", 0.0}};
  auto outs = parallel_samples(n, threads, [&](long i) {
    auto rng = sample_rng(seed, 1, i);
    const SpeciesSet& sp = sets[i % sets.size()];
    const std::size_t N = sp.N();
    const Vec rho = random_state(sp, rng, 1e-6 * sp.p0(), 1e6 * sp.p0());
    const ThermoPoint tp = evaluate(sp, rho);
    const Vec mu = chem_potentials(sp, tp);
    const Matrix H = hessian(sp, rho, tp);
    const Matrix Hi = hessian_inverse(sp, rho, tp);
    const Vec u = kernel_direction(sp, rho, tp);
    SampleOut o;
    o.residual.push_back(std::abs(tp.p + free_energy(sp, rho, tp) - dot(rho, mu)) / (1 + tp.p));
    double ku = 0;
    for (double v : H * u) ku = std::max(ku, std::abs(v - 1));
    o.residual.push_back(ku);
    // column-scaled product, so that the check is about the formula, not the conditioning
    const Matrix P = H * Hi;
    double inv = 0;
    for (std::size_t a = 0; a < N; ++a)
      for (std::size_t b = 0; b < N; ++b) {
        double scale = 0;
        for (std::size_t k = 0; k < N; ++k) scale += std::abs(H(a, k) * Hi(k, b));
        inv = std::max(inv, std::abs(P(a, b) - (a == b ? 1.0 : 0.0)) / std::max(scale, 1.0));
      }
    o.residual.push_back(inv);
    bool all_log = true;
    for (const auto& law : sp.laws()) all_log = all_log && law.kind() == LawKind::Log;
    o.residual.push_back(all_log ? std::abs(tp.p - sp.p0() * dot(sp.vbar0(), rho)) / tp.p : kSkip);
    const Vec gp = pressure_gradient(tp);
    const Vec Hr = H * rho;
    double gd = 0;
    for (std::size_t k = 0; k < N; ++k) gd = std::max(gd, std::abs(Hr[k] - gp[k]));
    o.residual.push_back(gd / std::max(norm_inf(gp), 1e-300));
    o.residual.push_back(sum(u) > 0 ? 0.0 : 1.0);
    return o;
  });
  reduce(rep, "thermo", specs, {}, outs, true);
}

// -------------------------------------------------------------------- chart

void suite_chart(VerifyReport& rep, std::uint64_t seed, long n, int threads) {
  const auto sets = sampled_sets();
  const std::vector<CheckSpec> specs{{"round_trip", 1e-8},        {"pressure", 1e-10},
                                     {"potential_invariance", 1e-9}, {"density_envelope", 1e-12},
                                     {"s_derivative_envelope", 1.0}, {"chi_bounds", 1e-12},
                                     {"quotient_envelopes", 1e-10}};
  auto outs = parallel_samples(n, threads, [&](long i) {
    auto rng = sample_rng(seed, 2, i);
    const SpeciesSet& sp = sets[i % sets.size()];
    const std::size_t N = sp.N();
    const ChartPoint pt = random_point(sp, rng, 1e-6 * sp.p0(), 1e6 * sp.p0());
    const Vec X = forward_chart(sp, pt);
    SampleOut o;

    const ChartPoint back = inverse_chart(sp, X);
    double rt = std::abs(back.s - pt.s) / pt.s;
    for (std::size_t k = 0; k < N; ++k) rt = std::max(rt, std::abs(back.w[k] - pt.w[k]) / pt.w[k]);
    o.residual.push_back(rt);
    o.residual.push_back(std::abs(pressure(sp, X) - pt.s) / pt.s);

    std::normal_distribution<double> nd;
    Vec eta(N);
    for (auto& e : eta) e = nd(rng);
    const double mean = sum(eta) / N;
    for (auto& e : eta) e -= mean;
    const Vec mu = chem_potentials(sp, X);
    const Vec muw = reduced_potential(sp, pt.w);
    double scale = 1;
    for (std::size_t k = 0; k < N; ++k) scale += std::abs(eta[k]) * (std::abs(mu[k]) + std::abs(muw[k]));
    o.residual.push_back(std::abs(dot(eta, mu) - dot(eta, muw)) / scale);

    const Vec dg = sp.dg(pt.s), d2g = sp.d2g(pt.s);
    const double gmax = *std::max_element(dg.begin(), dg.end());
    const double gmin = *std::min_element(dg.begin(), dg.end());
    const double tot = sum(X);
    o.residual.push_back(std::max({0.0, 1 / gmax - tot, tot - 1 / gmin}) / tot);

    const double h = 1e-6 * pt.s;
    const Vec Xp = forward_chart(sp, {pt.s + h, pt.w});
    const Vec Xm = forward_chart(sp, {pt.s - h, pt.w});
    double ds = 0, g2 = 0;
    for (std::size_t k = 0; k < N; ++k) {
      ds += std::abs(Xp[k] - Xm[k]) / (2 * h);
      g2 = std::max(g2, std::abs(d2g[k]));
    }
    const double env = (sp.m_max() - sp.m_min()) * (1 + gmax / gmin) + g2 / (gmin * gmin);
    o.residual.push_back(ds / env);

    const Vec lx = log_number_fractions(sp, pt.w);
    const Vec ex = chart_exponents(sp, pt.s);
    Vec a(N);
    for (std::size_t k = 0; k < N; ++k) a[k] = std::exp(lx[k] + ex[k]);
    const double chi = chi_root(a, sp.m());
    const ChiBounds cb = chi_bounds(a, sp.m());
    o.residual.push_back(std::max({0.0, cb.lo - chi, chi - cb.hi}) / chi);

    const Quotients q = quotients(sp, pt);
    double qe = 0;
    for (std::size_t k = 0; k < N; ++k)
      qe = std::max({qe, (q.Funder[k] - q.F[k]) / q.F[k], (q.F[k] - q.Fbar[k]) / q.F[k]});
    o.residual.push_back(qe);

    // tangential derivative against sup Fbar (1 + max g'/min g')
    const double fbar = *std::max_element(q.Fbar.begin(), q.Fbar.end());
    double cd = 0;
    for (const Vec& tau : s0_tangents(sp)) {
      const double hw = 1e-6 * *std::min_element(pt.w.begin(), pt.w.end());
      Vec wp = pt.w, wm = pt.w;
      for (std::size_t k = 0; k < N; ++k) {
        wp[k] += hw * tau[k];
        wm[k] -= hw * tau[k];
      }
      const Vec A = forward_chart(sp, {pt.s, wp}), B = forward_chart(sp, {pt.s, wm});
      double d2 = 0;
      for (std::size_t k = 0; k < N; ++k) d2 += std::pow((A[k] - B[k]) / (2 * hw), 2);
      cd = std::max(cd, std::sqrt(d2) / (fbar * (1 + gmax / gmin)));
    }
    o.measure.push_back(cd);
    return o;
  });
  reduce(rep, "chart", specs, {"C_tangential"}, outs, true);
}

// ---------------------------------------------------------------- transport

std::vector<FrictionModel> models(const std::vector<SpeciesSet>& sets, bool constant) {
  std::vector<FrictionModel> ms;
  for (const auto& sp : sets) ms.emplace_back(sp, 2.0, 0.5 * sp.p0(), 0.2, constant);
  return ms;
}

void suite_transport(VerifyReport& rep, std::uint64_t seed, long n, int threads) {
  const auto sets = sampled_sets();
  const auto ms = models(sets, false);
  const std::vector<CheckSpec> specs{{"kernel", 1e-12},          {"drazin", 1e-9},
                                     {"flux_residual", 1e-9},    {"alpha_independence", 1e-10},
                                     {"sigma_normalization", 1e-12}, {"onsager_psd", 1e-10}};
  auto outs = parallel_samples(n, threads, [&](long i) {
    auto rng = sample_rng(seed, 3, i);
    const std::size_t si = i % sets.size();
    const SpeciesSet& sp = sets[si];
    const std::size_t N = sp.N();
    const Vec rho = random_state(sp, rng, 1e-6 * sp.p0(), 1e6 * sp.p0());
    const ThermoPoint tp = evaluate(sp, rho);
    const Vec& y = tp.fr.y;
    const Matrix B = build_B(ms[si], rho, tp);
    const double nb = B.max_abs();
    SampleOut o;
    double ker = norm_inf(B * y);
    for (std::size_t k = 0; k < N; ++k) {
      double c = 0;
      for (std::size_t j = 0; j < N; ++j) c += B(j, k);
      ker = std::max(ker, std::abs(c));
    }
    o.residual.push_back(ker / nb);

    const Matrix D = drazin_inverse(B, y);
    const double nd = D.max_abs();
    double dz = max_abs_diff(D * B * D, D) / nd;
    dz = std::max(dz, max_abs_diff(B * D * B, B) / nb);
    dz = std::max(dz, max_abs_diff(B * D, D * B) / (nb * nd));
    o.residual.push_back(dz);

    const Field3 d = driving_forces(sp, rho, normal_field(rng, N), normal_field(rng, N));
    const Field3 J = solve_flux(B, d, y);
    const Field3 J2 = solve_flux(B, d, y, 2 * bordering_alpha(B));
    double res = 0, nj = 0, ndd = 0, gap = 0;
    for (int l = 0; l < 3; ++l) {
      Vec col(N);
      for (std::size_t k = 0; k < N; ++k) col[k] = J[k][l];
      const Vec bj = B * col;
      for (std::size_t k = 0; k < N; ++k) {
        res = std::max(res, std::abs(bj[k] + d[k][l]));
        nj = std::max(nj, std::abs(J[k][l]));
        ndd = std::max(ndd, std::abs(d[k][l]));
        gap = std::max(gap, std::abs(J[k][l] - J2[k][l]));
      }
    }
    o.residual.push_back(res / (nb * nj + ndd));
    o.residual.push_back(nj > 0 ? gap / nj : 0.0);

    const Matrix S = sigma(sp, sp.p0(), dirichlet(rng, N));
    double sn = 0;
    for (std::size_t a = 0; a < N; ++a)
      for (std::size_t b = 0; b < N; ++b)
        if (a != b) sn = std::max(sn, std::abs(S(a, b) - 1));
    o.residual.push_back(sn);

    const Matrix M = onsager_matrix(ms[si], rho, tp);
    const double nm = M.max_abs();
    const double asym = max_abs_diff(M, M.transpose()) / nm;
    const double lmin = min_symmetric_eigenvalue(0.5 * (M + M.transpose()));
    o.residual.push_back(std::max(asym, -lmin / nm));
    return o;
  });
  reduce(rep, "transport", specs, {}, outs, true);
}

// ------------------------------------------------------------------- robust

// inf over s in [p1, 1e6 p0] and i of the lower quotient envelope
double normal_operator_constant(const SpeciesSet& sp, double p1) {
  double c = std::numeric_limits<double>::infinity();
  const double lo = std::log(p1), hi = std::log(1e6 * sp.p0());
  for (int k = 0; k <= 400; ++k) {
    Vec Fb, Fu;
    quotient_envelopes(sp, std::exp(lo + (hi - lo) * k / 400), Fb, Fu);
    c = std::min(c, *std::min_element(Fu.begin(), Fu.end()));
  }
  return c;
}

void suite_robust(VerifyReport& rep, std::uint64_t seed, long n, int threads, bool constant) {
  const auto sets = sampled_sets();
  const auto ms = models(sets, constant);
  Vec c3;
  for (std::size_t k = 0; k < sets.size(); ++k) c3.push_back(normal_operator_constant(sets[k], ms[k].p1()));
  const std::vector<CheckSpec> specs{{"low_operator_bound", 1e-8}, {"low_flux_bound", 1e-8},
                                     {"low_flux_bound_derived", 1e-8}, {"dilute_ratio", 1e-8},
                                     {"normal_flux_bound", 1e-8}, {"normal_operator_bound", 1e-8},
                                     {"dissipation_nonnegative", 1e-10}};
  auto outs = parallel_samples(n, threads, [&](long i) {
    auto rng = sample_rng(seed, 4, i);
    const std::size_t si = i % sets.size();
    const SpeciesSet& sp = sets[si];
    const FrictionModel& fm = ms[si];
    const bool low = (i / sets.size()) % 2 == 0;
    const Vec rho = low ? random_state(sp, rng, 1e-6 * sp.p0(), fm.p1())
                        : random_state(sp, rng, fm.p1() * 1.001, 1e6 * sp.p0());
    const ChartPoint pt = inverse_chart(sp, rho);
    const auto r = dissipation_and_bounds(fm, rho, normal_field(rng, sp.N()), normal_field(rng, sp.N()));
    SampleOut o;
    if (low) {
      o.residual.push_back(-r.cert_low / r.scale);
      o.residual.push_back(r.J2 - r.flux_bound_rhs);
      o.residual.push_back(r.J2 - r.flux_bound_rhs_derived);
      o.residual.push_back(r.dilute_ratio - 1);
      o.residual.push_back(kSkip);
      o.residual.push_back(kSkip);
    } else {
      o.residual.insert(o.residual.end(), 4, kSkip);
      o.residual.push_back(-r.cert_normal);
      const ThermoPoint tp = evaluate(sp, rho);
      const Matrix M = onsager_matrix(fm, rho, tp);
      const Matrix P = projector(tp.fr.y);
      const Matrix PWP = P.transpose() * Matrix::diag(pt.w) * P;
      const Matrix A = M - (c3[si] / fm.f3()) * PWP;
      o.residual.push_back(-min_symmetric_eigenvalue(0.5 * (A + A.transpose())) / std::max(r.scale, 1e-300));
    }
    o.residual.push_back(-r.zeta / std::max(1.0, r.J2));
    return o;
  });
  reduce(rep, "robust", specs, {}, outs, !constant);
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const std::string tag = "robust.set" + std::to_string(k + 1) + ".";
    rep.constants.emplace_back(tag + "c_normal_operator", c3[k]);
    rep.constants.emplace_back(tag + "f0", ms[k].f0());
    rep.constants.emplace_back(tag + "f1", ms[k].f1());
    rep.constants.emplace_back(tag + "c2_gradient_chain", gradient_chain_constant(sets[k]));
  }
}

// ------------------------------------------------------------------- growth

struct GrowthFit {
  double exponent = 0, c0 = 0, c1 = 0;
  long holdout_failures = 0, holdout_samples = 0;
  double holdout_worst = 0;
};

GrowthFit fit_growth(const std::vector<double>& norm, const std::vector<double>& h, double ref, double gamma) {
  GrowthFit g;
  // slope of ln h against ln |rho| in the asymptotic range
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long k = 0;
  for (std::size_t i = 0; i < norm.size(); ++i) {
    if (norm[i] < 1e3 * ref || !(h[i] > 0)) continue;
    const double x = std::log(norm[i]), y = std::log(h[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++k;
  }
  g.exponent = k > 1 ? (k * sxy - sx * sy) / (k * sxx - sx * sx) : 0.0;
  // fit on even samples, check on odd ones
  double q = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < norm.size(); i += 2)
    if (norm[i] >= 1e3 * ref) q = std::min(q, h[i] / std::pow(norm[i], gamma));
  g.c0 = std::isfinite(q) ? 0.5 * q : 0.0;
  double worst = 0;
  for (std::size_t i = 0; i < norm.size(); i += 2) worst = std::max(worst, g.c0 * std::pow(norm[i], gamma) - h[i]);
  g.c1 = 1.5 * worst;
  for (std::size_t i = 1; i < norm.size(); i += 2) {
    ++g.holdout_samples;
    const double gap = g.c0 * std::pow(norm[i], gamma) - g.c1 - h[i];
    const double r = std::max(0.0, gap) / (1 + std::abs(h[i]));
    g.holdout_worst = std::max(g.holdout_worst, r);
    if (r > 0) ++g.holdout_failures;
  }
  return g;
}

void suite_growth(VerifyReport& rep, std::uint64_t seed, long n, int threads) {
  const SpeciesSet sp = verify_set_growth();
  double alpha = 0;
  for (const auto& law : sp.laws()) alpha = std::max(alpha, law.alpha());
  const double gamma = alpha / (alpha - 1);
  const double ref = sp.N() / sum(sp.vbar0());
  auto outs = parallel_samples(std::max(n, 4L), threads, [&](long i) {
    auto rng = sample_rng(seed, 5, i);
    const double lam = log_uniform(rng, ref, 1e6 * ref);
    Vec rho = dirichlet(rng, sp.N());
    for (auto& r : rho) r *= lam;
    SampleOut o;
    o.measure = {lam, free_energy(sp, rho)};
    return o;
  });
  std::vector<double> norm, h;
  for (const auto& o : outs) {
    norm.push_back(o.measure[0]);
    h.push_back(o.measure[1]);
  }
  const GrowthFit g = fit_growth(norm, h, ref, gamma);
  CheckResult ce{"growth.exponent", 1, 0, std::abs(g.exponent - gamma) / gamma, 0.05, true};
  if (!(ce.worst <= ce.tolerance)) ce.failures = 1;
  CheckResult ch{"growth.holdout_inequality", g.holdout_samples, g.holdout_failures, g.holdout_worst, 0.0, true};
  rep.checks.push_back(ce);
  rep.checks.push_back(ch);
  rep.constants.emplace_back("growth.exponent_fitted", g.exponent);
  rep.constants.emplace_back("growth.exponent_expected", gamma);
  rep.constants.emplace_back("growth.c0", g.c0);
  rep.constants.emplace_back("growth.c1", g.c1);
}

}  // namespace

VerifyReport run_verify(const std::string& suite, std::uint64_t seed, long samples, bool friction_constant,
                        int threads) {
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, "samples must be >= 1");
  const auto& all = verify_suites();
  if (suite != "all" && std::find(all.begin(), all.end(), suite) == all.end())
    throw Error(ErrorKind::InvalidArgument, "unknown suite '" + suite + "'");
  VerifyReport rep;
  rep.suite = suite;
  rep.seed = seed;
  rep.samples = samples;
  rep.friction_constant = friction_constant;
  const int t = thread_count(threads);
  auto want = [&](const char* s) { return suite == "all" || suite == s; };
  if (want("thermo")) suite_thermo(rep, seed, samples, t);
  if (want("chart")) suite_chart(rep, seed, samples, t);
  if (want("transport")) suite_transport(rep, seed, samples, t);
  if (want("robust")) suite_robust(rep, seed, samples, t, friction_constant);
  if (want("growth")) suite_growth(rep, seed, samples, t);
  return rep;
}

std::string report_csv(const VerifyReport& r) {
  std::ostringstream o;
  o << "suite,seed,samples,friction,status\n";
  o << r.suite << "," << r.seed << "," << r.samples << "," << (r.friction_constant ? "constant" : "default") << ","
    << (r.passed() ? "pass" : "fail") << "\n\n";
  o << "check,samples,failures,worst_residual,tolerance,gating,status\n";
  for (const auto& c : r.checks)
    o << c.name << "," << c.samples << "," << c.failures << "," << format_double(c.worst) << ","
      << format_double(c.tolerance) << "," << (c.gating ? "yes" : "no") << "," << (c.passed() ? "pass" : "fail")
      << "\n";
  o << "\nconstant,value\n";
  for (const auto& [name, v] : r.constants) o << name << "," << format_double(v) << "\n";
  return o.str();
}

}  // namespace msmix

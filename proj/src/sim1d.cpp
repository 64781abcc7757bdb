#include "msmix/sim1d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "msmix/chart.hpp"

namespace msmix {

Grid1D::Grid1D(double L, int n_cells) : L_(L), n_(n_cells) {
  if (!(L > 0) || !std::isfinite(L)) throw Error(ErrorKind::InvalidArgument, "domain length must be positive");
  if (n_cells < 4) throw Error(ErrorKind::InvalidArgument, "need at least 4 cells");
}

Vec SimConfig::body_force() const {
  if (b.empty()) return Vec(species().N(), 0.0);
  return b;
}

double SimConfig::reference_time() const {
  if (t_ref > 0) return t_ref;
  return t_end > 0 ? t_end : 1.0;
}

void SimConfig::validate() const {
  Grid1D g(L, n_cells);
  (void)g;
  auto bad = [](const std::string& m) { throw Error(ErrorKind::InvalidArgument, m); };
  if (!(sigma_reg >= 0)) bad("sigma_reg must be >= 0");
  if (!(eta_shear > 0)) bad("eta_shear must be > 0");
  if (!(eta_bulk >= 0)) bad("eta_bulk must be >= 0");
  if (!(cfl > 0 && cfl < 1)) bad("cfl must lie in (0, 1)");
  if (!(t_end >= 0) || !std::isfinite(t_end)) bad("t_end must be finite and >= 0");
  if (output_every < 1) bad("output_every must be >= 1");
  if (!(floor_density >= 0)) bad("floor_density must be >= 0");
  if (!(t_ref >= 0)) bad("t_ref must be >= 0");
  if (!b.empty() && b.size() != species().N()) bad("b needs one entry per species");
  for (double v : b)
    if (!std::isfinite(v)) bad("b must be finite");
}

namespace {

bool all_zero(const Vec& b) {
  return std::all_of(b.begin(), b.end(), [](double v) { return v == 0.0; });
}

double total(const Vec& r) {
  double s = 0;
  for (double v : r) s += v;
  return s;
}

// Everything one explicit step needs from the current state.
struct Assembly {
  std::vector<ThermoPoint> tp;
  std::vector<Vec> mu;
  std::vector<Matrix> Mf;  // regularized Onsager matrix at interior faces
  std::vector<Vec> X;      // grad mu - b at interior faces
  std::vector<Vec> jf;     // diffusive flux -M X at interior faces
  double dt_stable = 0.0;
};

Assembly assemble(const SimConfig& cfg, const FieldState& st) {
  const SpeciesSet& sp = cfg.species();
  const int n = static_cast<int>(st.rho.size());
  const std::size_t N = sp.N();
  const double dx = cfg.L / n;
  const Vec b = cfg.body_force();

  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(st.v[j])) throw Error(ErrorKind::StateCorrupted, "non-finite velocity in cell " + std::to_string(j));
    for (double r : st.rho[j])
      if (!std::isfinite(r) || !(r > 0))
        throw Error(ErrorKind::StateCorrupted, "invalid density in cell " + std::to_string(j));
  }

  Assembly a;
  a.tp.resize(n);
  a.mu.resize(n);
  double c2max = 0, vmax = 0, rho_min = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    std::optional<double> hint;
    if (static_cast<int>(st.p.size()) == n && st.p[j] > 0) hint = st.p[j];
    a.tp[j] = evaluate(sp, st.rho[j], hint);
    a.mu[j] = chem_potentials(sp, a.tp[j]);
    const Vec dp = pressure_gradient(a.tp[j]);
    c2max = std::max(c2max, dot(a.tp[j].fr.y, dp));
    vmax = std::max(vmax, std::abs(st.v[j]));
    rho_min = std::min(rho_min, a.tp[j].fr.varrho);
  }

  double Dmax = 0;
  a.Mf.resize(n - 1);
  a.X.resize(n - 1);
  a.jf.resize(n - 1);
  for (int f = 0; f < n - 1; ++f) {
    Vec rf(N);
    for (std::size_t i = 0; i < N; ++i) rf[i] = 0.5 * (st.rho[f][i] + st.rho[f + 1][i]);
    const ThermoPoint tpf = evaluate(sp, rf, 0.5 * (a.tp[f].p + a.tp[f + 1].p));
    a.Mf[f] = regularized_onsager(onsager_matrix(cfg.friction, rf, tpf), cfg.sigma_reg);
    a.X[f].resize(N);
    for (std::size_t i = 0; i < N; ++i) a.X[f][i] = (a.mu[f + 1][i] - a.mu[f][i]) / dx - b[i];
    a.jf[f] = a.Mf[f] * a.X[f];
    for (auto& v : a.jf[f]) v = -v;
    Dmax = std::max(Dmax, (a.Mf[f] * hessian(sp, rf, tpf)).norm_inf());
  }

  const double eta = cfg.eta_shear + cfg.eta_bulk;
  double lim = dx * dx * rho_min / (2 * eta);
  lim = std::min(lim, dx / (vmax + std::sqrt(c2max)));
  if (Dmax > 0) lim = std::min(lim, dx * dx / (2 * Dmax));
  a.dt_stable = cfg.cfl * lim;
  return a;
}

double free_energy_total(const SpeciesSet& sp, const std::vector<Vec>& rho,
                         const std::vector<ThermoPoint>& tp, double dx) {
  double e = 0;
  for (std::size_t j = 0; j < rho.size(); ++j) e += free_energy(sp, rho[j], tp[j]) * dx;
  return e;
}

double kinetic_total(const std::vector<Vec>& rho, const Vec& v, double dx) {
  double e = 0;
  for (std::size_t j = 0; j < rho.size(); ++j) e += 0.5 * total(rho[j]) * v[j] * v[j] * dx;
  return e;
}

double w_gradient_sq(const SpeciesSet& sp, const std::vector<Vec>& rho, double dx) {
  std::vector<Vec> w(rho.size());
  for (std::size_t j = 0; j < rho.size(); ++j) w[j] = inverse_chart(sp, rho[j]).w;
  double s = 0;
  for (std::size_t f = 0; f + 1 < rho.size(); ++f)
    for (std::size_t i = 0; i < sp.N(); ++i) {
      const double g = (w[f + 1][i] - w[f][i]) / dx;
      s += g * g * dx;
    }
  return s;
}

}  // namespace

FieldState initialize(const SimConfig& cfg, const Profiles& profiles) {
  cfg.validate();
  const SpeciesSet& sp = cfg.species();
  const Grid1D g = cfg.grid();
  const int n = g.n();
  const double dx = g.dx();
  FieldState st;
  st.rho.resize(n);
  st.v.resize(n);
  st.p.resize(n);
  std::vector<ThermoPoint> tp(n);
  double mean = 0;
  for (int j = 0; j < n; ++j) {
    const double x = g.center(j);
    st.rho[j] = profiles.rho(x);
    st.v[j] = profiles.v ? profiles.v(x) : 0.0;
    if (st.rho[j].size() != sp.N())
      throw Error(ErrorKind::InvalidProfile, "profile returned the wrong number of species");
    for (double r : st.rho[j])
      if (!(r > 0) || !std::isfinite(r)) {
        std::ostringstream os;
        os << "density must be positive and finite, cell " << j << " at x = " << x;
        throw Error(ErrorKind::InvalidProfile, os.str());
      }
    if (!std::isfinite(st.v[j])) throw Error(ErrorKind::InvalidProfile, "velocity must be finite");
    tp[j] = evaluate(sp, st.rho[j]);
    st.p[j] = tp[j].p;
    mean += total(st.rho[j]) / n;
  }
  st.floor = cfg.floor_density > 0 ? cfg.floor_density : 1e-12 * mean;
  st.ledger.free_energy = free_energy_total(sp, st.rho, tp, dx);
  st.ledger.kinetic = kinetic_total(st.rho, st.v, dx);
  st.ledger.E0 = st.ledger.free_energy + st.ledger.kinetic;
  return st;
}

double stable_dt(const SimConfig& cfg, const FieldState& state) {
  return assemble(cfg, state).dt_stable;
}

FieldState step(const SimConfig& cfg, const FieldState& st, double dt_cap) {
  const SpeciesSet& sp = cfg.species();
  const int n = static_cast<int>(st.rho.size());
  const std::size_t N = sp.N();
  const double dx = cfg.L / n;
  const double eta = cfg.eta_shear + cfg.eta_bulk;
  const Vec b = cfg.body_force();

  const Assembly a = assemble(cfg, st);
  if (!std::isfinite(a.dt_stable) || a.dt_stable <= 1e-14 * cfg.reference_time())
    throw Error(ErrorKind::CflViolation, "time step underflow (dt = " + std::to_string(a.dt_stable) + ")");
  const double dt = std::min(a.dt_stable, dt_cap);
  if (!(dt > 0)) throw Error(ErrorKind::InvalidArgument, "time step cap must be positive");

  // species fluxes at faces 0..n (walls carry nothing)
  std::vector<Vec> G(n + 1, Vec(N, 0.0));
  Vec mflux(n + 1, 0.0);
  for (int f = 1; f < n; ++f) {
    const int l = f - 1, r = f;
    const double vf = 0.5 * (st.v[l] + st.v[r]);
    const Vec& up = vf > 0 ? st.rho[l] : st.rho[r];
    for (std::size_t i = 0; i < N; ++i) {
      G[f][i] = vf * up[i] + a.jf[f - 1][i];
      mflux[f] += G[f][i];
    }
  }

  FieldState nx;
  nx.rho.resize(n);
  nx.floor = st.floor;
  nx.floor_hits = st.floor_hits;
  for (int j = 0; j < n; ++j) {
    nx.rho[j].resize(N);
    for (std::size_t i = 0; i < N; ++i) nx.rho[j][i] = st.rho[j][i] - dt / dx * (G[j + 1][i] - G[j][i]);
    if (cfg.entropic) {
      Vec drho(N);
      for (std::size_t i = 0; i < N; ++i) drho[i] = nx.rho[j][i] - st.rho[j][i];
      const Matrix H = hessian(sp, st.rho[j], a.tp[j]);
      Vec mu = H * drho;
      for (std::size_t i = 0; i < N; ++i) mu[i] += a.mu[j][i];
      nx.rho[j] = dual_state(sp, mu);
    }
    for (auto& r : nx.rho[j]) {
      if (std::isnan(r)) throw Error(ErrorKind::StateCorrupted, "density became NaN in cell " + std::to_string(j));
      if (r < nx.floor) {
        r = nx.floor;
        ++nx.floor_hits;
      }
    }
  }

  // pressure from the updated densities (forward-backward coupling)
  std::vector<ThermoPoint> tpn(n);
  nx.p.resize(n);
  for (int j = 0; j < n; ++j) {
    tpn[j] = evaluate(sp, nx.rho[j], a.tp[j].p);
    nx.p[j] = tpn[j].p;
  }

  // momentum fluxes: transport by the full mass flux, pressure, viscous stress
  Vec phi(n + 1);
  phi[0] = nx.p[0] - 2 * eta * st.v[0] / dx;
  phi[n] = nx.p[n - 1] + 2 * eta * st.v[n - 1] / dx;
  for (int f = 1; f < n; ++f) {
    const int l = f - 1, r = f;
    const double vup = mflux[f] > 0 ? st.v[l] : st.v[r];
    phi[f] = mflux[f] * vup + 0.5 * (nx.p[l] + nx.p[r]) - eta * (st.v[r] - st.v[l]) / dx;
  }
  nx.v.resize(n);
  for (int j = 0; j < n; ++j) {
    double force = 0;
    for (std::size_t i = 0; i < N; ++i) force += st.rho[j][i] * b[i];
    const double q = total(st.rho[j]) * st.v[j] - dt / dx * (phi[j + 1] - phi[j]) + dt * force;
    nx.v[j] = q / tpn[j].fr.varrho;
    if (!std::isfinite(nx.v[j])) throw Error(ErrorKind::StateCorrupted, "velocity became non-finite in cell " + std::to_string(j));
  }

  // ledger
  double ddiff = 0, dtilde = 0, work = 0, mnorm = 0;
  for (int f = 0; f < n - 1; ++f) {
    const Vec MX = a.Mf[f] * a.X[f];
    const Vec Mb = a.Mf[f] * b;
    ddiff += dot(a.X[f], MX) * dx;
    work -= dot(a.X[f], Mb) * dx;
    dtilde += cfg.sigma_reg * cfg.sigma_reg * dot(a.X[f], a.X[f]) * dx;
    double fro = 0;
    for (double e : a.Mf[f].data()) fro += e * e;
    mnorm += std::sqrt(fro) * dx;
  }
  double dvisc = eta * (4 * st.v[0] * st.v[0] + 4 * st.v[n - 1] * st.v[n - 1]) / (2 * dx);
  double rho1 = 0, kin = 0;
  for (int j = 0; j < n; ++j) {
    if (j + 1 < n) {
      const double g = (st.v[j + 1] - st.v[j]) / dx;
      dvisc += eta * g * g * dx;
    }
    double force = 0;
    for (std::size_t i = 0; i < N; ++i) force += st.rho[j][i] * b[i];
    work += force * st.v[j] * dx;
    rho1 += total(st.rho[j]) * dx;
    kin += 0.5 * total(st.rho[j]) * st.v[j] * st.v[j] * dx;
  }

  nx.t = st.t + dt;
  nx.steps = st.steps + 1;
  nx.last_dt = dt;
  nx.ledger = st.ledger;
  nx.ledger.free_energy = free_energy_total(sp, nx.rho, tpn, dx);
  nx.ledger.kinetic = kinetic_total(nx.rho, nx.v, dx);
  nx.ledger.dissipation_diffusive += dt * ddiff;
  nx.ledger.dissipation_viscous += dt * dvisc;
  nx.ledger.work_external += dt * work;
  nx.ledger.flux_tilde_sq += dt * dtilde;
  if (cfg.track_w_gradient) nx.ledger.grad_w_sq += dt * w_gradient_sq(sp, st.rho, dx);
  const double b2 = dot(b, b);
  nx.step_forcing_bound = dt * (0.5 * b2 * (mnorm + rho1) + kin);
  return nx;
}

EnergyLedger energy_audit(const SimConfig& cfg, const FieldState& before, const FieldState& after) {
  EnergyLedger d;
  d.E0 = before.ledger.E0;
  d.free_energy = after.ledger.free_energy - before.ledger.free_energy;
  d.kinetic = after.ledger.kinetic - before.ledger.kinetic;
  d.dissipation_diffusive = after.ledger.dissipation_diffusive - before.ledger.dissipation_diffusive;
  d.dissipation_viscous = after.ledger.dissipation_viscous - before.ledger.dissipation_viscous;
  d.work_external = after.ledger.work_external - before.ledger.work_external;
  d.flux_tilde_sq = after.ledger.flux_tilde_sq - before.ledger.flux_tilde_sq;
  d.grad_w_sq = after.ledger.grad_w_sq - before.ledger.grad_w_sq;

  const double dt = after.t - before.t;
  const double tol = 1e-6 * std::abs(d.E0) * dt / cfg.reference_time();
  const double dE = d.free_energy + d.kinetic;
  if (d.dissipation_diffusive < 0 || d.dissipation_viscous < 0)
    throw Error(ErrorKind::AuditFailure, "negative dissipation increment");
  std::ostringstream os;
  os.precision(17);
  if (all_zero(cfg.body_force())) {
    if (dE > tol) {
      os << "energy rose by " << dE << " over dt = " << dt << " (tolerance " << tol << ") at t = " << after.t;
      throw Error(ErrorKind::AuditFailure, os.str());
    }
  } else {
    const double lhs = dE + 0.5 * d.dissipation_diffusive + d.dissipation_viscous;
    if (lhs > after.step_forcing_bound + tol) {
      os << "forced energy balance violated: " << lhs << " > " << after.step_forcing_bound << " + " << tol
         << " at t = " << after.t;
      throw Error(ErrorKind::AuditFailure, os.str());
    }
  }
  return d;
}

OutputFrame make_frame(const SimConfig& cfg, const FieldState& st) {
  const SpeciesSet& sp = cfg.species();
  const Grid1D g(cfg.L, static_cast<int>(st.rho.size()));
  OutputFrame fr;
  fr.t = st.t;
  fr.rho = st.rho;
  fr.v = st.v;
  fr.ledger = st.ledger;
  for (int j = 0; j < g.n(); ++j) {
    fr.x.push_back(g.center(j));
    const ChartPoint cp = inverse_chart(sp, st.rho[j]);
    fr.p.push_back(cp.s);
    fr.w.push_back(cp.w);
  }
  return fr;
}

FieldState run(const SimConfig& cfg, const Profiles& profiles, const Sink& sink) {
  FieldState st = initialize(cfg, profiles);
  if (sink) sink(make_frame(cfg, st));
  const double tref = cfg.reference_time();
  bool emitted = true;
  while (st.t < cfg.t_end && cfg.t_end - st.t > 1e-13 * tref) {
    FieldState nx = step(cfg, st, cfg.t_end - st.t);
    if (std::abs(cfg.t_end - nx.t) <= 1e-13 * tref) nx.t = cfg.t_end;
    if (cfg.audit) energy_audit(cfg, st, nx);
    st = std::move(nx);
    emitted = false;
    if (st.steps % cfg.output_every == 0) {
      if (sink) sink(make_frame(cfg, st));
      emitted = true;
    }
  }
  if (!emitted && sink) sink(make_frame(cfg, st));
  return st;
}

}  // namespace msmix

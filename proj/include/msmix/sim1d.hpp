#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "msmix/thermo.hpp"
#include "msmix/transport.hpp"

namespace msmix {

class Grid1D {
 public:
  Grid1D(double L, int n_cells);
  double L() const { return L_; }
  int n() const { return n_; }
  double dx() const { return L_ / n_; }
  double center(int j) const { return (j + 0.5) * dx(); }
  double face(int f) const { return f * dx(); }

 private:
  double L_;
  int n_;
};

struct EnergyLedger {
  double E0 = 0.0;
  double free_energy = 0.0;
  double kinetic = 0.0;
  double dissipation_diffusive = 0.0;  // cumulative int M(grad mu - b):(grad mu - b)
  double dissipation_viscous = 0.0;    // cumulative int S:grad v
  double work_external = 0.0;          // cumulative forcing terms
  double flux_tilde_sq = 0.0;          // cumulative int |sigma (grad mu - b)|^2
  double grad_w_sq = 0.0;              // cumulative int |grad w|^2 (only if tracked)
};

struct SimConfig {
  explicit SimConfig(FrictionModel f) : friction(std::move(f)) {}

  FrictionModel friction;
  double L = 1.0;
  int n_cells = 64;
  double sigma_reg = 1e-3;
  double eta_shear = 1e-2;
  double eta_bulk = 0.0;
  Vec b;  // empty means zero
  double cfl = 0.4;
  double t_end = 0.0;
  int output_every = 1;
  double floor_density = 0.0;  // 0 selects 1e-12 times the initial mean density
  bool entropic = false;       // update mu and map back through dual_state
  bool audit = true;           // run energy_audit after every step inside run()
  bool track_w_gradient = false;
  double t_ref = 0.0;          // 0 selects t_end (or 1 when t_end = 0)

  const SpeciesSet& species() const { return friction.species(); }
  Grid1D grid() const { return Grid1D(L, n_cells); }
  Vec body_force() const;
  double reference_time() const;
  void validate() const;
};

struct FieldState {
  std::vector<Vec> rho;  // n_cells x N
  Vec v;
  double t = 0.0;
  long steps = 0;
  long floor_hits = 0;
  double floor = 0.0;   // resolved floor density
  double last_dt = 0.0;
  Vec p;                // cached cell pressures
  EnergyLedger ledger;
  // per-step increments, filled by step()
  double step_forcing_bound = 0.0;  // dt (|b|^2/2 int (|M| + |rho|) + int rho v^2 / 2)
};

struct Profiles {
  std::function<Vec(double)> rho;
  std::function<double(double)> v;
};

struct OutputFrame {
  double t = 0.0;
  Vec x;
  std::vector<Vec> rho;
  Vec v;
  Vec p;
  std::vector<Vec> w;
  EnergyLedger ledger;
};

using Sink = std::function<void(const OutputFrame&)>;

FieldState initialize(const SimConfig& cfg, const Profiles& profiles);

double stable_dt(const SimConfig& cfg, const FieldState& state);

FieldState step(const SimConfig& cfg, const FieldState& state,
                double dt_cap = std::numeric_limits<double>::infinity());

// Increments between two consecutive states. Throws AuditFailure when the
// energy rises beyond 1e-6 |E0| dt / t_ref (b = 0) or when the Gronwall form
// with the forcing bound is violated (b != 0).
EnergyLedger energy_audit(const SimConfig& cfg, const FieldState& before, const FieldState& after);

OutputFrame make_frame(const SimConfig& cfg, const FieldState& state);

FieldState run(const SimConfig& cfg, const Profiles& profiles, const Sink& sink);

}  // namespace msmix

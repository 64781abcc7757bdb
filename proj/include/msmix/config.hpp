#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "msmix/sim1d.hpp"

namespace msmix {

// Scenario file: `key = value` lines under [section] headers, '#' comments.
// Lists are comma separated. Unknown sections and keys are rejected.
struct ScenarioConfig {
  struct Species {
    int N = 0;
    double p0 = 1.0;
    Vec masses;
    std::vector<std::string> law;  // "log" or "blended" per species
    Vec vbar0;
    Vec g0;      // log laws
    Vec alpha;   // blended laws
    Vec M0, M1;  // blended laws
    bool operator==(const Species&) const = default;
  } species;
  struct Friction {
    double f_c = 1.0;
    double p1 = 0.5;
    double switch_width = 0.1;
    bool constant = false;
    bool operator==(const Friction&) const = default;
  } friction;
  struct Sim {
    double L = 1.0;
    int n_cells = 64;
    double cfl = 0.4;
    double t_end = 0.1;
    double sigma_reg = 1e-3;
    double eta_shear = 0.05;
    double eta_bulk = 0.0;
    double floor_density = 0.0;
    int output_every = 1;
    bool operator==(const Sim&) const = default;
  } sim;
  struct Forcing {
    Vec b;
    bool operator==(const Forcing&) const = default;
  } forcing;
  struct Init {
    std::string kind = "uniform";  // uniform | step | gaussian
    Vec rho;                       // uniform value, or gaussian base
    Vec rho_left, rho_right;       // step
    double x0 = 0.5;               // step position or gaussian centre (fraction of L)
    double width = 0.05;           // tanh width or gaussian standard deviation (fraction of L)
    Vec amplitude;                 // gaussian bump per species
    double v_amplitude = 0.0;      // v0(x) = v_amplitude sin(pi x / L)
    bool operator==(const Init&) const = default;
  } init;
  struct Output {
    std::string csv;  // empty: standard output
    bool operator==(const Output&) const = default;
  } output;

  bool operator==(const ScenarioConfig&) const = default;
};

// Overrides have the form "section.key=value" and replace (or add) a key
// before validation. All failures throw Error(ErrorKind::Config).
ScenarioConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});
ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});
std::string serialize_config(const ScenarioConfig& cfg);

// Only the [species] section is needed.
SpeciesSet build_species(const ScenarioConfig& cfg);
// Reads a file in which only [species] is required.
SpeciesSet load_species(const std::string& path);
SimConfig build_sim_config(const ScenarioConfig& cfg);
Profiles build_profiles(const ScenarioConfig& cfg);

std::string format_double(double v);  // 17 significant digits, '.' decimal
std::string csv_header(std::size_t N);
void write_csv_frame(std::FILE* out, const OutputFrame& frame);

}  // namespace msmix

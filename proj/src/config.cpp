#include "msmix/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace msmix {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& where, const std::string& s) {
  double v = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) fail(where + ": not a number: '" + s + "'");
  return v;
}

int to_int(const std::string& where, const std::string& s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) fail(where + ": not an integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& where, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  fail(where + ": expected true or false, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

Vec to_vec(const std::string& where, const std::string& s) {
  Vec v;
  for (const auto& item : split_list(s)) v.push_back(to_double(where, item));
  return v;
}

using Raw = std::map<std::string, std::map<std::string, std::string>>;

Raw parse_raw(std::string_view text) {
  Raw raw;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::string at = "line " + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']') fail(at + ": malformed section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (raw.count(section)) fail(at + ": duplicate section [" + section + "]");
      raw[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail(at + ": expected key = value");
    if (section.empty()) fail(at + ": key outside of any section");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string val = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) fail(at + ": empty key");
    if (raw[section].count(key)) fail(at + ": duplicate key " + section + "." + key);
    raw[section][key] = val;
  }
  return raw;
}

void apply_overrides(Raw& raw, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      fail("override '" + o + "' is not of the form section.key=value");
    const std::string sec = trim(std::string_view(o).substr(0, dot));
    const std::string key = trim(std::string_view(o).substr(dot + 1, eq - dot - 1));
    raw[sec][key] = trim(std::string_view(o).substr(eq + 1));
  }
}

using Setter = std::function<void(const std::string& where, const std::string& value)>;

void fill_section(const Raw& raw, const std::string& name, bool required,
                  const std::map<std::string, Setter>& setters) {
  const auto it = raw.find(name);
  if (it == raw.end()) {
    if (required) fail("missing section [" + name + "]");
    return;
  }
  for (const auto& [key, value] : it->second) {
    const auto s = setters.find(key);
    if (s == setters.end()) fail("unknown key '" + key + "' in section [" + name + "]");
    s->second(name + "." + key, value);
  }
}

ScenarioConfig from_raw(const Raw& raw, bool species_only = false) {
  for (const auto& [name, _] : raw) {
    static const char* known[] = {"species", "friction", "sim", "forcing", "init", "output"};
    bool ok = false;
    for (const char* k : known) ok = ok || name == k;
    if (!ok) fail("unknown section [" + name + "]");
  }
  ScenarioConfig c;
  auto& s = c.species;
  fill_section(raw, "species", true,
               {{"N", [&](auto& w, auto& v) { s.N = to_int(w, v); }},
                {"p0", [&](auto& w, auto& v) { s.p0 = to_double(w, v); }},
                {"masses", [&](auto& w, auto& v) { s.masses = to_vec(w, v); }},
                {"law", [&](auto&, auto& v) { s.law = split_list(v); }},
                {"vbar0", [&](auto& w, auto& v) { s.vbar0 = to_vec(w, v); }},
                {"g0", [&](auto& w, auto& v) { s.g0 = to_vec(w, v); }},
                {"alpha", [&](auto& w, auto& v) { s.alpha = to_vec(w, v); }},
                {"M0", [&](auto& w, auto& v) { s.M0 = to_vec(w, v); }},
                {"M1", [&](auto& w, auto& v) { s.M1 = to_vec(w, v); }}});
  auto& f = c.friction;
  fill_section(raw, "friction", !species_only,
               {{"f_c", [&](auto& w, auto& v) { f.f_c = to_double(w, v); }},
                {"p1", [&](auto& w, auto& v) { f.p1 = to_double(w, v); }},
                {"switch_width", [&](auto& w, auto& v) { f.switch_width = to_double(w, v); }},
                {"constant", [&](auto& w, auto& v) { f.constant = to_bool(w, v); }}});
  auto& m = c.sim;
  fill_section(raw, "sim", !species_only,
               {{"L", [&](auto& w, auto& v) { m.L = to_double(w, v); }},
                {"n_cells", [&](auto& w, auto& v) { m.n_cells = to_int(w, v); }},
                {"cfl", [&](auto& w, auto& v) { m.cfl = to_double(w, v); }},
                {"t_end", [&](auto& w, auto& v) { m.t_end = to_double(w, v); }},
                {"sigma_reg", [&](auto& w, auto& v) { m.sigma_reg = to_double(w, v); }},
                {"eta_shear", [&](auto& w, auto& v) { m.eta_shear = to_double(w, v); }},
                {"eta_bulk", [&](auto& w, auto& v) { m.eta_bulk = to_double(w, v); }},
                {"floor_density", [&](auto& w, auto& v) { m.floor_density = to_double(w, v); }},
                {"output_every", [&](auto& w, auto& v) { m.output_every = to_int(w, v); }}});
  fill_section(raw, "forcing", false, {{"b", [&](auto& w, auto& v) { c.forcing.b = to_vec(w, v); }}});
  auto& in = c.init;
  fill_section(raw, "init", !species_only,
               {{"kind", [&](auto&, auto& v) { in.kind = v; }},
                {"rho", [&](auto& w, auto& v) { in.rho = to_vec(w, v); }},
                {"rho_left", [&](auto& w, auto& v) { in.rho_left = to_vec(w, v); }},
                {"rho_right", [&](auto& w, auto& v) { in.rho_right = to_vec(w, v); }},
                {"x0", [&](auto& w, auto& v) { in.x0 = to_double(w, v); }},
                {"width", [&](auto& w, auto& v) { in.width = to_double(w, v); }},
                {"amplitude", [&](auto& w, auto& v) { in.amplitude = to_vec(w, v); }},
                {"v_amplitude", [&](auto& w, auto& v) { in.v_amplitude = to_double(w, v); }}});
  fill_section(raw, "output", false, {{"csv", [&](auto&, auto& v) { c.output.csv = v; }}});
  return c;
}

void require_len(const std::string& what, std::size_t got, int N) {
  if (static_cast<int>(got) != N)
    fail(what + " needs " + std::to_string(N) + " entries, got " + std::to_string(got));
}

void validate(const ScenarioConfig& c) {
  const int N = c.species.N;
  if (N < 1) fail("species.N must be >= 1");
  try {
    build_species(c);
    build_sim_config(c).validate();
    build_profiles(c);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    fail(e.what());
  }
  const auto& in = c.init;
  if (in.kind == "uniform") {
    require_len("init.rho", in.rho.size(), N);
  } else if (in.kind == "step") {
    require_len("init.rho_left", in.rho_left.size(), N);
    require_len("init.rho_right", in.rho_right.size(), N);
    if (!(in.width > 0)) fail("init.width must be > 0");
  } else if (in.kind == "gaussian") {
    require_len("init.rho", in.rho.size(), N);
    require_len("init.amplitude", in.amplitude.size(), N);
    if (!(in.width > 0)) fail("init.width must be > 0");
  } else {
    fail("init.kind must be uniform, step or gaussian, got '" + in.kind + "'");
  }
}

std::string join(const Vec& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, ptr);
}

ScenarioConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
  Raw raw = parse_raw(text);
  apply_overrides(raw, overrides);
  ScenarioConfig c = from_raw(raw);
  validate(c);
  return c;
}

ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) fail("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

SpeciesSet load_species(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const ScenarioConfig c = from_raw(parse_raw(ss.str()), true);
  if (c.species.N < 1) fail("species.N must be >= 1");
  try {
    return build_species(c);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    fail(e.what());
  }
}

std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream o;
  auto kv = [&](const char* k, const std::string& v) {
    if (!v.empty()) o << k << " = " << v << "\n";
  };
  const auto& s = c.species;
  o << "[species]\n";
  kv("N", std::to_string(s.N));
  kv("p0", format_double(s.p0));
  kv("masses", join(s.masses));
  kv("law", join(s.law));
  kv("vbar0", join(s.vbar0));
  kv("g0", join(s.g0));
  kv("alpha", join(s.alpha));
  kv("M0", join(s.M0));
  kv("M1", join(s.M1));
  o << "\n[friction]\n";
  kv("f_c", format_double(c.friction.f_c));
  kv("p1", format_double(c.friction.p1));
  kv("switch_width", format_double(c.friction.switch_width));
  kv("constant", c.friction.constant ? "true" : "false");
  const auto& m = c.sim;
  o << "\n[sim]\n";
  kv("L", format_double(m.L));
  kv("n_cells", std::to_string(m.n_cells));
  kv("cfl", format_double(m.cfl));
  kv("t_end", format_double(m.t_end));
  kv("sigma_reg", format_double(m.sigma_reg));
  kv("eta_shear", format_double(m.eta_shear));
  kv("eta_bulk", format_double(m.eta_bulk));
  kv("floor_density", format_double(m.floor_density));
  kv("output_every", std::to_string(m.output_every));
  o << "\n[forcing]\n";
  kv("b", join(c.forcing.b));
  const auto& in = c.init;
  o << "\n[init]\n";
  kv("kind", in.kind);
  kv("rho", join(in.rho));
  kv("rho_left", join(in.rho_left));
  kv("rho_right", join(in.rho_right));
  kv("x0", format_double(in.x0));
  kv("width", format_double(in.width));
  kv("amplitude", join(in.amplitude));
  kv("v_amplitude", format_double(in.v_amplitude));
  o << "\n[output]\n";
  kv("csv", c.output.csv);
  return o.str();
}

SpeciesSet build_species(const ScenarioConfig& c) {
  const auto& s = c.species;
  const int N = s.N;
  require_len("species.masses", s.masses.size(), N);
  require_len("species.law", s.law.size(), N);
  require_len("species.vbar0", s.vbar0.size(), N);
  bool any_log = false, any_blended = false;
  for (const auto& k : s.law) {
    if (k == "log") any_log = true;
    else if (k == "blended") any_blended = true;
    else fail("species.law entries must be log or blended, got '" + k + "'");
  }
  if (any_log) require_len("species.g0", s.g0.size(), N);
  if (any_blended) {
    require_len("species.alpha", s.alpha.size(), N);
    require_len("species.M0", s.M0.size(), N);
    require_len("species.M1", s.M1.size(), N);
  }
  std::vector<GibbsLaw> laws;
  for (int i = 0; i < N; ++i) {
    if (s.law[i] == "log")
      laws.push_back(GibbsLaw::log_law(s.g0[i], s.vbar0[i], s.p0));
    else
      laws.push_back(GibbsLaw::blended_law(s.vbar0[i], s.p0, s.alpha[i], s.M0[i], s.M1[i]));
  }
  return SpeciesSet(s.masses, std::move(laws), s.p0);
}

SimConfig build_sim_config(const ScenarioConfig& c) {
  const auto& f = c.friction;
  SimConfig cfg(FrictionModel(build_species(c), f.f_c, f.p1, f.switch_width, f.constant));
  const auto& m = c.sim;
  cfg.L = m.L;
  cfg.n_cells = m.n_cells;
  cfg.cfl = m.cfl;
  cfg.t_end = m.t_end;
  cfg.sigma_reg = m.sigma_reg;
  cfg.eta_shear = m.eta_shear;
  cfg.eta_bulk = m.eta_bulk;
  cfg.floor_density = m.floor_density;
  cfg.output_every = m.output_every;
  if (!c.forcing.b.empty()) require_len("forcing.b", c.forcing.b.size(), c.species.N);
  cfg.b = c.forcing.b;
  return cfg;
}

Profiles build_profiles(const ScenarioConfig& c) {
  const auto in = c.init;
  const double L = c.sim.L;
  Profiles p;
  const double va = in.v_amplitude;
  p.v = [va, L](double x) { return va * std::sin(std::numbers::pi * x / L); };
  if (in.kind == "uniform") {
    p.rho = [in](double) { return in.rho; };
  } else if (in.kind == "step") {
    p.rho = [in, L](double x) {
      const double s = 0.5 * (1 + std::tanh((x / L - in.x0) / in.width));
      Vec r(in.rho_left.size());
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = in.rho_left[i] + (in.rho_right[i] - in.rho_left[i]) * s;
      return r;
    };
  } else {
    p.rho = [in, L](double x) {
      const double z = (x / L - in.x0) / in.width;
      const double e = std::exp(-0.5 * z * z);
      Vec r(in.rho.size());
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = in.rho[i] + in.amplitude[i] * e;
      return r;
    };
  }
  return p;
}

std::string csv_header(std::size_t N) {
  std::string h = "t,x";
  for (std::size_t i = 1; i <= N; ++i) h += ",rho_" + std::to_string(i);
  h += ",v,p";
  for (std::size_t i = 1; i <= N; ++i) h += ",w_" + std::to_string(i);
  h += ",free_energy,kinetic,diss_diffusive,diss_viscous";
  return h;
}

void write_csv_frame(std::FILE* out, const OutputFrame& fr) {
  const std::string tail = "," + format_double(fr.ledger.free_energy) + "," + format_double(fr.ledger.kinetic) + "," +
                           format_double(fr.ledger.dissipation_diffusive) + "," +
                           format_double(fr.ledger.dissipation_viscous);
  const std::string t = format_double(fr.t);
  for (std::size_t j = 0; j < fr.x.size(); ++j) {
    std::string row = t + "," + format_double(fr.x[j]);
    for (double r : fr.rho[j]) row += "," + format_double(r);
    row += "," + format_double(fr.v[j]) + "," + format_double(fr.p[j]);
    for (double w : fr.w[j]) row += "," + format_double(w);
    row += tail;
    std::fputs(row.c_str(), out);
    std::fputc('\n', out);
  }
}

}  // namespace msmix

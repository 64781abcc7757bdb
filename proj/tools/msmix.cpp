// msmix command line: run | verify | chart
//
// Exit codes: 0 ok, 1 verification failed, 2 simulation error, 3 bad input.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "msmix/chart.hpp"
#include "msmix/config.hpp"
#include "msmix/sim1d.hpp"
#include "msmix/verify.hpp"

namespace {

using namespace msmix;

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kSimError = 2;
constexpr int kBadInput = 3;

Vec parse_list(const std::string& s) {
  Vec out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "not a number: '" + item + "'");
    }
    while (used < item.size() && (item[used] == ' ' || item[used] == '\t')) ++used;
    if (used != item.size()) throw Error(ErrorKind::InvalidArgument, "not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::string join(const Vec& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

int cmd_run(const std::string& path, const std::vector<std::string>& sets) {
  ScenarioConfig scen;
  std::optional<SimConfig> cfg;
  Profiles prof;
  try {
    scen = load_config(path, sets);
    cfg.emplace(build_sim_config(scen));
    prof = build_profiles(scen);
  } catch (const Error& e) {
    std::cerr << "msmix: config error: " << e.what() << '\n';
    return kBadInput;
  }

  std::FILE* out = stdout;
  if (!scen.output.csv.empty()) {
    out = std::fopen(scen.output.csv.c_str(), "w");
    if (!out) {
      std::cerr << "msmix: cannot open '" << scen.output.csv << "' for writing\n";
      return kBadInput;
    }
  }
  int code = kOk;
  std::fputs((csv_header(cfg->species().N()) + "\n").c_str(), out);
  try {
    const FieldState st = run(*cfg, prof, [&](const OutputFrame& fr) { write_csv_frame(out, fr); });
    std::cerr << "msmix: t = " << format_double(st.t) << " after " << st.steps << " steps, " << st.floor_hits
              << " floor hits\n";
  } catch (const Error& e) {
    std::cerr << "msmix: " << e.what() << '\n';
    code = e.kind() == ErrorKind::InvalidProfile ? kBadInput : kSimError;
  }
  if (out != stdout) std::fclose(out);
  else std::fflush(out);
  return code;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, long samples, const std::string& report_path,
               const std::string& friction) {
  std::vector<std::string> suites;
  if (suite == "all") suites = verify_suites();
  else suites = {suite};

  std::string text;
  bool ok = true;
  for (const auto& s : suites) {
    VerifyReport r;
    try {
      r = run_verify(s, seed, samples, friction == "constant");
    } catch (const Error& e) {
      std::cerr << "msmix: " << e.what() << '\n';
      return kBadInput;
    }
    for (const auto& c : r.checks) {
      std::cout << c.name << ": " << (c.passed() ? "pass" : "FAIL") << " (" << c.failures << '/'
                << c.samples << ", worst " << format_double(c.worst) << ")" << (c.gating ? "" : " [not gating]")
                << '\n';
    }
    ok = ok && r.passed();
    text += report_csv(r);
  }
  if (!report_path.empty()) {
    std::ofstream f(report_path, std::ios::binary);
    if (!f) {
      std::cerr << "msmix: cannot open '" << report_path << "' for writing\n";
      return kBadInput;
    }
    f << text;
  }
  std::cout << (ok ? "verify: PASS" : "verify: FAIL") << '\n';
  return ok ? kOk : kVerifyFailed;
}

int cmd_chart(const std::string& path, const std::string& state, const std::string& point) {
  try {
    const SpeciesSet sp = load_species(path);
    const std::size_t N = sp.N();
    if (!state.empty()) {
      const Vec rho = parse_list(state);
      if (rho.size() != N)
        throw Error(ErrorKind::InvalidArgument, "state has " + std::to_string(rho.size()) + " entries, expected " +
                                                    std::to_string(N));
      require_interior(rho);
      const ChartPoint pt = inverse_chart(sp, rho);
      std::cout << "s = " << format_double(pt.s) << '\n' << "w = " << join(pt.w) << '\n';
      std::cout << "p = " << format_double(pressure(sp, rho)) << '\n';
      return kOk;
    }
    const Vec sw = parse_list(point);
    if (sw.size() != N + 1)
      throw Error(ErrorKind::InvalidArgument,
                  "point has " + std::to_string(sw.size()) + " entries, expected s plus " + std::to_string(N));
    ChartPoint pt{sw[0], Vec(sw.begin() + 1, sw.end())};
    validate_chart_point(sp, pt);
    const Vec X = forward_chart(sp, pt);
    const Quotients q = quotients(sp, pt);
    std::cout << "X = " << join(X) << '\n'
              << "p = " << format_double(pressure(sp, X)) << '\n'
              << "F = " << join(q.F) << '\n'
              << "F_upper = " << join(q.Fbar) << '\n'
              << "F_lower = " << join(q.Funder) << '\n';
    return kOk;
  } catch (const Error& e) {
    std::cerr << "msmix: " << e.what() << '\n';
    return kBadInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"msmix: multicomponent mixture toolkit"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> sets;
  auto* run_cmd = app.add_subcommand("run", "run a 1D simulation and write CSV frames");
  run_cmd->add_option("--config", config, "scenario file")->required();
  run_cmd->add_option("--set", sets, "override, section.key=value")->take_all();

  std::string suite;
  std::uint64_t seed = 0;
  long samples = 1000;
  std::string report;
  std::string friction = "default";
  auto* ver = app.add_subcommand("verify", "randomized property checks");
  ver->add_option("--suite", suite)
      ->required()
      ->check(CLI::IsMember({"thermo", "chart", "transport", "robust", "growth", "all"}));
  ver->add_option("--seed", seed)->required();
  ver->add_option("--samples", samples)->check(CLI::PositiveNumber);
  ver->add_option("--report", report, "CSV report path");
  ver->add_option("--friction", friction)->check(CLI::IsMember({"default", "constant"}));

  std::string cconfig, state, point;
  auto* ch = app.add_subcommand("chart", "evaluate the (s, w) chart");
  ch->add_option("--config", cconfig, "file with a [species] section")->required();
  auto* where = ch->add_option_group("where", "exactly one of --state, --point");
  where->add_option("--state", state, "rho_1,..,rho_N");
  where->add_option("--point", point, "s,w_1,..,w_N");
  where->require_option(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kBadInput;
  }

  if (*run_cmd) return cmd_run(config, sets);
  if (*ver) return cmd_verify(suite, seed, samples, report, friction);
  return cmd_chart(cconfig, state, point);
}

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "msmix/thermo.hpp"

namespace msmix {

struct CheckResult {
  std::string name;
  long samples = 0;
  long failures = 0;
  double worst = 0.0;      // largest residual seen (same units as tolerance)
  double tolerance = 0.0;
  bool gating = true;
  bool passed() const { return failures == 0; }
};

struct VerifyReport {
  std::string suite;
  std::uint64_t seed = 0;
  long samples = 0;
  bool friction_constant = false;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, double>> constants;
  bool passed() const;
};

// Species sets the harness samples from.
SpeciesSet verify_set_log2();
SpeciesSet verify_set_log4();
// Blend window [1e2, 1e8] p0, so X(s, w) stays representable over 1e-6..1e6 p0.
SpeciesSet verify_set_blended_wide();
// Common alpha = 1.4 with the high-pressure regime from 10 p0 on.
SpeciesSet verify_set_growth();

const std::vector<std::string>& verify_suites();  // thermo chart transport robust growth

// threads = 0 reads MSMIX_THREADS, else hardware concurrency. Results do not
// depend on the thread count. Throws InvalidArgument for an unknown suite.
VerifyReport run_verify(const std::string& suite, std::uint64_t seed, long samples,
                        bool friction_constant = false, int threads = 0);

std::string report_csv(const VerifyReport& report);

}  // namespace msmix

#ifndef NBINAR_SELFTEST_HPP
#define NBINAR_SELFTEST_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace nbinar {

struct SelftestOptions {
  // Perturbs the offspring pgf used by the functional-equation suite so the
  // harness can be shown to fail.
  bool inject_fault = false;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestResult {
  std::vector<SuiteResult> suites;
  double functional_equation_residual = 0.0;

  bool passed() const;
};

// Runs the invariant suites of every module on a fixed parameter grid.
SelftestResult run_selftest(const SelftestOptions& options = {});
void print_selftest(std::ostream& os, const SelftestResult& result);

}  // namespace nbinar

#endif  // NBINAR_SELFTEST_HPP

// Acceptance gate: runs every verification check at full scale and prints
// one pass/fail line per criterion.

#include <cstdio>

#include "xrkhs/verify.hpp"

int main() {
  xrkhs::VerifyOptions opts;  // shipped seed, full repetitions
  const auto results = xrkhs::run_verification(opts);
  for (const auto& r : results) {
    std::printf("[%s] criterion %s: %s — %s (%.1f s)\n",
                r.pass ? "PASS" : "FAIL", r.id.c_str(), r.name.c_str(),
                r.detail.c_str(), r.seconds);
  }
  const bool ok = xrkhs::all_passed(results);
  std::printf("%s\n", ok ? "all criteria passed" : "ACCEPTANCE FAILURE");
  return ok ? 0 : 1;
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace xrkhs {

// One verification gate: closed-form Gram vs quadrature, circulant vs dense,
// stability sharpness, Tikhonov identities, the Monte-Carlo MSE match, the
// sinogram consistency moments, the desk-scale head-to-head against FBP, and
// the invariant property suite.
struct CheckResult {
  std::string id;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 20250810;
  // Shrinks the desk-scale repetition count (3 instead of 21) and skips the
  // timing sweeps; for development loops only.
  bool quick = false;
};

std::vector<CheckResult> run_verification(const VerifyOptions& opts = {});

// True when every check passed.
bool all_passed(const std::vector<CheckResult>& results);

}  // namespace xrkhs

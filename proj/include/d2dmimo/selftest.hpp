// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace d2dmimo {

struct SelfTestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast property checks over the library (fading laws, rho scaling, MMSE
/// error variance, Laplace table, determinism, CSV round trip). Each line is
/// written to `log` as it completes.
std::vector<SelfTestCheck> run_selftest(std::ostream& log);

} // namespace d2dmimo

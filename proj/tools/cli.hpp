// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace vplat::cli {

struct Environment {
  std::string cwd;                       // empty: the process working directory
  std::optional<std::string> vplat_root;  // VPLAT_ROOT
};

// Runs one command line (without the program name). Returns the exit status:
// 0 success, 1 operator or I/O error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Environment& env);

}  // namespace vplat::cli

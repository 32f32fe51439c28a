// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  vplat::cli::Environment env;
  if (const char* root = std::getenv("VPLAT_ROOT"); root && *root) env.vplat_root = root;
  return vplat::cli::run(args, std::cout, std::cerr, env);
}

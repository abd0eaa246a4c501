#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "sdcps/cli/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return sdcps::run_cli(args, std::cout, std::cerr, std::getenv("SDCPS_LOG"));
}

#include <iostream>

#include "exocap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return exocap::run_cli(args, std::cout, std::cerr);
}

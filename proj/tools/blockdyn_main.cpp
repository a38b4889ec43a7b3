#include "blockdyn/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return blockdyn::run_cli(args, std::cout, std::cerr);
}

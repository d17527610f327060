#include <iostream>
#include <vector>

#include "tdspec/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tdspec::run_command(args, std::cout, std::cerr);
}

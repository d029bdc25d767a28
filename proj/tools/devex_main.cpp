#include <iostream>
#include <string>
#include <vector>

#include "devex/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return devex::cli::run(args, std::cout, std::cerr);
}

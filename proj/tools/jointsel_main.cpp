#include <iostream>
#include <string>
#include <vector>

#include "jointsel/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return jointsel::cli::run(std::move(args), std::cout, std::cerr);
}

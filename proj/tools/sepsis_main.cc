#include <iostream>
#include <string>
#include <vector>

#include "sepsis/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sepsis::cli::run(args, std::cout, std::cerr);
}

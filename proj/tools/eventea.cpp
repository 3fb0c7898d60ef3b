#include <iostream>
#include <string>
#include <vector>

#include "eventea/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return eventea::cli::dispatch(args, std::cout, std::cerr);
}

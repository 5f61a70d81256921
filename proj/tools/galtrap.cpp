#include <string>
#include <vector>

#include "galtrap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return galtrap::cli::run(args);
}

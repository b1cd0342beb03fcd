#include <vector>
#include <string>

#include "np/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return np::run_cli(args);
}

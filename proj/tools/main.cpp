#include <vector>

#include "atnet/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return atnet::cli::run_cli(args);
}

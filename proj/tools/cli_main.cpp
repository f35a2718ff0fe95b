#include <string>
#include <vector>

#include "polytraj/bench.hpp"

int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return polytraj::bench::run_cli(args);
}

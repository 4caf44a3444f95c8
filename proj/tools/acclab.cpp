#include <string>
#include <vector>

#include "acclab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return acclab::run(std::move(args));
}

#include "g2r/cli.hpp"

int main(int argc, char** argv) {
  return g2r::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}

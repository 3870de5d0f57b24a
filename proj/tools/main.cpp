#include "twogamma/cli.hpp"
#include <iostream>

int main(int argc, char **argv) {
  return twogamma::run_cli(argc, argv, std::cout, std::cerr);
}

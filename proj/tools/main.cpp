#include <iostream>

#include "cptsq/cli_io.hpp"

int main(int argc, char** argv) {
  return cptsq::cli_main(argc, argv, std::cout, std::cerr);
}

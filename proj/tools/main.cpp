#include <iostream>

#include "lexreport/cli.hpp"

int main(int argc, char** argv) {
  return lexreport::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}

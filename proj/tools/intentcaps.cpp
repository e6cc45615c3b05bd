#include <iostream>

#include "intentcaps/harness/cli.hpp"

int main(int argc, char** argv) { return intentcaps::harness::run_cli(argc, argv, std::cout, std::cerr); }

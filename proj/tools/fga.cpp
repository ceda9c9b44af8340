#include <iostream>

#include "fga/harness/cli.hpp"

int main(int argc, char** argv) { return fga::harness::run_cli(argc, argv, std::cout, std::cerr); }

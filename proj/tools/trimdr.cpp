#include <iostream>

#include "trimdr/cli.hpp"

int main(int argc, char** argv) { return trimdr::run_cli(argc, argv, std::cout, std::cerr); }

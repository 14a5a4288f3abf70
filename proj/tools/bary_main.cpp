#include <iostream>

#include "hbary/cli.hpp"

int main(int argc, char** argv) { return hbary::run_cli(argc, argv, std::cout, std::cerr); }

#include "biokg/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return biokg::run_cli(argc, argv, std::cout, std::cerr); }

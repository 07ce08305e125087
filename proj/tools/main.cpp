#include <iostream>

#include "contourlab/cli.hpp"

int main(int argc, char** argv) { return contourlab::run_cli(argc, argv, std::cout, std::cerr); }

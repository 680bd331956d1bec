#include <iostream>

#include "qdecomp/cli.hpp"

int main(int argc, char** argv) { return qdecomp::run_cli(argc, argv, std::cout, std::cerr); }

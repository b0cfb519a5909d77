#include <iostream>

#include "iproj/cli.hpp"

int main(int argc, char** argv) { return iproj::run_cli(argc, argv, std::cout, std::cerr); }

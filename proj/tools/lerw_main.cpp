#include <iostream>

#include "lerw/cli.hpp"

int main(int argc, char** argv) { return lerw::run_cli(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "qimaps/cli.hpp"

int main(int argc, char** argv) { return qimaps::run_cli(argc, argv, std::cout, std::cerr); }

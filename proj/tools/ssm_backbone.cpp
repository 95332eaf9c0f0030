#include <iostream>

#include "ssmbb/cli.hpp"

int main(int argc, char** argv) { return ssmbb::run_cli(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "dualqp/cli.hpp"

int main(int argc, char** argv) { return dualqp::run_cli(argc, argv, std::cout, std::cerr); }

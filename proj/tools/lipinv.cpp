#include "lipinv/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return lipinv::run_cli(argc, argv, std::cout, std::cerr); }

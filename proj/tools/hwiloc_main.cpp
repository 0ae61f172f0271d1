#include <iostream>

#include "hwiloc/cli.hpp"

int main(int argc, char** argv) { return hwiloc::cli_main(argc, argv, std::cout, std::cerr); }

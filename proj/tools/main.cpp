#include <iostream>

#include "wps_cli.hpp"

int main(int argc, char** argv) { return wps::cli::run(argc, argv, std::cin, std::cout, std::cerr); }

#include <iostream>

#include "hstab/cli.hpp"

int main(int argc, char** argv) { return hstab::cli::run(argc, argv, std::cout, std::cerr); }

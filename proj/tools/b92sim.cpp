#include <iostream>

#include "b92/cli.hpp"

int main(int argc, char** argv) { return b92::cli::run(argc, argv, std::cout, std::cerr); }

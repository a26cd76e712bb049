#include <iostream>

#include "pqbias/cli.hpp"

int main(int argc, char** argv) { return pqbias::cli::main(argc, argv, std::cout, std::cerr); }

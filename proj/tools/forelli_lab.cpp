#include <iostream>

#include "forelli/cli.hpp"

int main(int argc, char** argv) { return forelli::run(argc, argv, std::cout, std::cerr); }

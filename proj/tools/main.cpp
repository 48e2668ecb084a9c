#include <iostream>

#include "uwbpos/commands.hpp"

int main(int argc, char** argv) { return uwbpos::cli::run(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "facruin/cli.hpp"

int main(int argc, char** argv) { return facruin::cli::run(argc, argv, std::cout, std::cerr); }

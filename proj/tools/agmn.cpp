#include <iostream>

#include "agmn/cli.hpp"

int main(int argc, char** argv) { return agmn::cli::run(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "rtpc/cli.hpp"

int main(int argc, char** argv) { return rtpc::cli::run(argc, argv, std::cout, std::cerr); }

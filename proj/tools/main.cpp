#include <iostream>

#include "rdest/cli_io.hpp"

int main(int argc, char** argv) { return rdest::run_main(argc, argv, std::cout, std::cerr); }

#include "efpe/cli_io.hpp"

#include <iostream>

int main(int argc, char** argv) { return efpe::io::run_cli(argc, argv, std::cout, std::cerr); }

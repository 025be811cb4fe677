#include "spikekal/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return spikekal::cli_main(argc, argv, std::cout, std::cerr); }

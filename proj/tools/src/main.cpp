#include <iostream>

#include "critmag_cli/run.hpp"

int main(int argc, char** argv) { return critmag::cli::run_cli(argc, argv, std::cout); }

#include <iostream>

#include "bugtriage_cli/cli.hpp"

int main(int argc, char** argv) { return bugtriage::cli::run_cli(argc, argv, std::cout, std::cerr); }

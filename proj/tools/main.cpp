#include <iostream>

#include "lvlingam/cli.hpp"

int main(int argc, char** argv) { return lvlingam::run_cli(argc, argv, std::cout, std::cerr); }

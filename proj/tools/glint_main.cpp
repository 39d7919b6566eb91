// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "glint/cli/cli.hpp"

int main(int argc, char** argv) { return glint::cli::cli_main(argc, argv, std::cout, std::cerr); }

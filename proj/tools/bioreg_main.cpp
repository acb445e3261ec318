#include <iostream>

#include "bioreg/cli/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return bioreg::cli::run(args, std::cout, std::cerr);
}

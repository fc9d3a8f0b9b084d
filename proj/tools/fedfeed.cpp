#include "fedfeed/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return fedfeed::run_cli(args, std::cout, std::cerr);
}

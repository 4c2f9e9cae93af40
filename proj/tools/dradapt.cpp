#include <iostream>

#include "dradapt/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dradapt::run_cli(args, std::cout, std::cerr);
}

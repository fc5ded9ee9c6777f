#include <iostream>

#include "pcstream/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return pcstream::cli::run(args, std::cout, std::cerr);
}

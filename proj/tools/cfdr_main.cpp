#include <iostream>
#include <string>
#include <vector>

#include "cfdr/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cfdr::run_cli(args, std::cout, std::cerr);
}

#include <iostream>
#include <string>
#include <vector>

#include "lattassoc/run.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return lattassoc::cli_main(args, std::cout, std::cerr);
}

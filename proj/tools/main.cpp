#include <iostream>

#include "cforge/cli.hpp"

int main(int argc, char** argv) {
    return cforge::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

#include <iostream>
#include <string>
#include <vector>

#include "nlslab/cli.hpp"

int main(int argc, char** argv) {
    return nlslab::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}

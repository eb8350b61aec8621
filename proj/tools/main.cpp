#include <iostream>

#include "bridge_extrema/cli.hpp"

int main(int argc, char** argv) {
    return bridge_extrema::cli::run(argc, argv, std::cout, std::cerr);
}

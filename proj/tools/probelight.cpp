#include "probelight/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return probelight::cli::dispatch(argc, argv, std::cout, std::cerr);
}
